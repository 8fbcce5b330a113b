# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""The main CLI for lfv."""
import json
import logging
import logging.config
import logging.handlers
import os
import re
import signal
import sys

import click
import coloredlogs
import texttable

import lfv_lib
import lfv_lib.lfv as lfv
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_json as lfv_json

# If a utility decides to cut off the pipe, we don't care (IE: head)
if hasattr(signal, 'SIGPIPE'):
    signal.signal(signal.SIGPIPE, signal.SIG_DFL)


def print_version(ctx, param, value):
    """Prints the version and then exits."""
    if not value or ctx.resilient_parsing:
        return

    click.echo(f'Version\t{lfv_lib.__version__}')
    ctx.exit()


class InfoHandler(logging.Handler):

    def emit(self, record):
        log = self.format(record)

        if record.levelno < 30:
            print(log, file=sys.stdout)
        else:
            print(log, file=sys.stderr)


class LFVLogger(object):

    def __init__(self):
        self.log_file = os.environ.get('LFV_LOGFILE')
        self.colorize = os.environ.get('LFV_COLOR', 'FALSE')
        logger = logging.getLogger('lfv')

        if logger.hasHandlers():
            # Repeated invocations in one process (tests) reuse the logger.
            for handler in logger.handlers:
                handler.close()

            logger.handlers = []

        logging.addLevelName(15, 'VERBOSE')
        logging.addLevelName(25, 'NOTICE')
        logger.setLevel(logging.INFO)
        logger.propagate = False

        if self.log_file:
            logging.config.dictConfig({
                'version': 1,
                'disable_existing_loggers': False,
                'formatters': {
                    'log': {
                        'format': '%(asctime)s (%(levelname)s) %(message)s',
                        'datefmt': '%Y/%m/%d %H:%M:%S',
                    },
                },
                'handlers': {
                    'file': {
                        'level': 'DEBUG',
                        'class': 'logging.handlers.RotatingFileHandler',
                        'filename': self.log_file,
                        'mode': 'a',
                        'maxBytes': 10485760,
                        'backupCount': 5,
                        'encoding': 'utf-8',
                        'formatter': 'log',
                    },
                },
                'loggers': {
                    'lfv': {
                        'handlers': ['file'],
                        'level': 'DEBUG',
                        'propagate': False
                    },
                },
            })
            # dictConfig resets the logger level; the console handler filters.
            logger.setLevel(logging.DEBUG)

        if self.colorize == 'TRUE':
            cli_colors = {
                'info': {'color': 'white'},
                'notice': {'color': 'magenta'},
                'verbose': {'color': 'blue'},
                'critical': {'color': 'red', 'bold': True},
                'error': {'color': 'red'},
                'debug': {'color': 'green'},
                'warning': {'color': 'yellow'}
            }
        else:
            cli_colors = {}

        handler = InfoHandler(level=logging.INFO)
        handler.setFormatter(coloredlogs.ColoredFormatter(
            fmt='%(message)s',
            level_styles=cli_colors))
        logger.addHandler(handler)
        self.console = handler

    def setConsoleLogLevel(self, level):
        logger = logging.getLogger('lfv')
        self.console.setLevel(level)
        logger.setLevel(min(logger.level, level))


class JSONParam(click.ParamType):

    """A JSON literal given on the command line, e.g. an initial spec."""

    name = 'json'

    def convert(self, value, param, ctx):
        if not isinstance(value, str):
            return value

        try:
            return json.loads(value)
        except json.JSONDecodeError:
            # Bare words such as origin or levels.
            return value


def config_options(func):
    """Options every run command shares."""
    options = [
        click.option('--config', '-c', 'config_path',
                     type=click.Path(exists=True, dir_okay=False),
                     help='JSON run configuration; flags override it.'),
        click.option('--measure', help='Measure spec, e.g. beta:1.5.'),
        click.option('--seed', '-s', type=int, help='Master seed.'),
        click.option('--output-dir', '-o', 'output_dir',
                     help='Directory for the artifacts and manifest.'),
        click.option('--workers', '-w', type=int,
                     help='Worker processes for the replicas.')
    ]

    for option in reversed(options):
        func = option(func)

    return func


def overrides(**kwargs):
    """Flag values keyed by config key; unset flags and empty lists drop."""
    return {
        key: list(value) if isinstance(value, tuple) else value
        for key, value in kwargs.items()
        if value is not None and value != ()
    }


def report(header, rows):
    table = texttable.Texttable(max_width=0)
    table.set_cols_dtype(['t'] * len(header))
    table.add_rows([list(header)] + [
        [lfv_common.format_number(cell) for cell in row] for row in rows
    ])
    lfv_common.logit({'level': 'INFO', 'message': table.draw()})


def execute(method, config_path, values):
    """Load the config, run one LFV method and write its artifacts."""
    config = lfv_json.load_config(
        config_path, values, require_seed=method in lfv_json.STOCHASTIC
    )
    driver = lfv.LFV(config)
    result = getattr(driver, method)()
    manifest = driver.write(result)
    report(result.header, result.rows)
    lfv_common.logit({
        'level': 'NOTICE',
        'message': f'{len(manifest.files)} file(s) and manifest.json in'
                   f' {config["output_dir"]}'
    })

    return manifest


cmd_folder = os.path.abspath(os.path.dirname(__file__))


class LFVCLI(click.Group):

    """
    Iterates in the 'cli' directory and will load any module's cli definition.
    """

    def list_commands(self, ctx):
        rv = []

        for filename in os.listdir(cmd_folder):
            if filename.endswith('.py') and \
                    not filename.startswith('__init__'):
                rv.append(re.sub('.py$', '', filename))
        rv.sort()

        return rv

    def get_command(self, ctx, name):
        if name not in self.list_commands(ctx):
            return

        mod = __import__(f'lfv_cli.{name}', None, None, ['cli'])

        return mod.cli

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except lfv_exceptions.LFVError as err:
            logging.getLogger('lfv').error(str(err))
            ctx.exit(err.exit_code)


@click.command(cls=LFVCLI)
@click.option(
    '--version',
    '-v',
    is_flag=True,
    callback=print_version,
    expose_value=False,
    is_eager=True,
    help="Display lfv's version and exit.")
@click.option(
    '--debug',
    '-D',
    is_flag=True,
    help='Log debug output to the console.')
def cli(debug):
    """Λ-Fleming-Viot experiments: rates, coalescents, lookdown, support."""
    logger = LFVLogger()
    lfv_common.set_interactive(True)

    if debug:
        logger.setConsoleLogLevel(logging.DEBUG)


if __name__ == '__main__':
    cli(prog_name='lfv')
