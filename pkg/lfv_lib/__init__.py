# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Λ-coalescent and Λ-Fleming-Viot lookdown toolkit."""

__version__ = '0.3'
