import logging
import sys

LOG_FORMAT = '%(asctime)s %(name)s [%(levelname)s]: %(message)s'
# third-party loggers that are only useful when debugging
QUIET_LOGGERS = ('libcloud', 'urllib3')


def resolve_level(log_level):
    """Numeric level of a name such as 'info' or 'WARNING'."""
    numeric_level = logging.getLevelName(str(log_level).upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log_level '{log_level}'.")
    return numeric_level


def setup_logging(log_level):
    """Sends log records to standard error; standard output carries the
    machine-parseable results of a command."""
    level = resolve_level(log_level)
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True
    )
    quiet = level if level <= logging.DEBUG else max(level, logging.WARNING)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(quiet)
