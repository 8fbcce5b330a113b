# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import sys

from setuptools import find_packages, setup

if sys.version_info < (3, 7):
    exit('Only Python 3.7 and higher is supported.')

VERSION = '0.3'

setup(
    name='lfv',
    version=VERSION,
    description='Λ-coalescent rates, lookdown particle systems and support'
                ' diagnostics for Λ-Fleming-Viot processes.',
    author='lfv contributors',
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.4',
        'click>=7.0',
        'texttable>=1.2.1',
        'coloredlogs>=9.0'
    ],
    entry_points={'console_scripts': ['lfv = lfv_cli:cli']},
    tests_require=['pytest', 'pytest-cov', 'mock']
)
