"""
gesture-fusion entry point.
Dispatches `gesture-fusion <command> [options]` to the app's management
commands and maps the outcome to an exit code: 0 success, 1 runtime
failure, 2 usage error.
Location: gesture_fusion_APP/cli.py
"""
import json
import logging
import sys
from typing import Optional, Sequence, TextIO

from django.core.management import load_command_class
from django.core.management.base import CommandError

from .exceptions import GestureFusionError, UnknownCommand

logger = logging.getLogger(__name__)

PROG = 'gesture-fusion'
COMMANDS = ('convert', 'inspect', 'train', 'eval', 'replay', 'bench')

USAGE = f"""usage: {PROG} <command> [options]

commands:
  convert   FGCN <-> JSON model conversion, synthetic sessions
  inspect   event frames, patches and EMG features of a recording
  train     fit a linear SVM, RBF SVM or CNN for one modality
  eval      k-fold accuracy table over modalities and models
  replay    classify a session through the four-role runtime
  bench     per-window inference latency of a model

global options: --config FILE  --seed N  --json
run '{PROG} <command> -h' for the options of a command
"""


def report_error(error: Exception, json_output: bool, stderr: TextIO):
    """Structured error on standard error"""
    cause = error.__cause__ if error.__cause__ is not None else error
    error_type = type(cause).__name__
    message = str(cause)
    if json_output:
        stderr.write(json.dumps({'error': message, 'type': error_type}) + '\n')
    else:
        stderr.write(f"{PROG}: {error_type}: {message}\n")


def cli_dispatch(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    argv = list(argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    json_output = '--json' in argv

    if not argv:
        stderr.write(USAGE)
        return 2
    if argv[0] in ('-h', '--help'):
        stdout.write(USAGE)
        return 0

    name = argv[0]
    if name not in COMMANDS:
        report_error(UnknownCommand(f"Unknown command '{name}', expected one of {', '.join(COMMANDS)}"),
                     json_output, stderr)
        return 2

    command = load_command_class('gesture_fusion_APP', name)
    command._called_from_command_line = True
    parser = command.create_parser(PROG, name)
    try:
        options = vars(parser.parse_args(argv[1:]))
        args = options.pop('args', ())
        command.execute(*args, stdout=stdout, stderr=stderr, **options)
    except SystemExit as e:
        # argparse exits 2 on bad arguments and 0 after -h
        return e.code if isinstance(e.code, int) else 2
    except CommandError as e:
        report_error(e, json_output, stderr)
        return e.returncode
    except GestureFusionError as e:
        report_error(e, json_output, stderr)
        return 1
    except Exception as e:
        logger.exception(f"{name} failed")
        report_error(e, json_output, stderr)
        return 1
    return 0
