# errors.py

"""
Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code `main.py` returns when the
error escapes a subcommand:

    1  usage / configuration error
    2  data error
    3  numerical failure
"""


class RvflError(Exception):
    exit_code = 1


class ConfigError(RvflError, ValueError):
    """Bad hyperparameter, flag, range or learner name."""
    exit_code = 1


class DataError(RvflError, ValueError):
    """Malformed input data, shape mismatches, task mismatches."""
    exit_code = 2


class NumericalError(RvflError, ArithmeticError):
    """Non-finite inputs or outputs, singular systems."""
    exit_code = 3
