import logging
import os
import sys
from logging.handlers import RotatingFileHandler

DEFAULT_LOGGER_NAME = "spline_system_verifier"
DEFAULT_LOG_FILE = "logs/splinesys.log"
# batches run in a process pool, so every record carries its worker
DEFAULT_LOG_FORMAT = (
    "%(asctime)s %(levelname)-7s [%(processName)s] "
    "%(name)s.%(funcName)s: %(message)s"
)
DEFAULT_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
CONSOLE_HANDLER_NAME = "splinesys-console"
FILE_HANDLER_NAME = "splinesys-file"
MAX_LOG_BYTES = 5 * 1024 * 1024
LOG_BACKUPS = 3


def _console_handler(formatter: logging.Formatter, level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stdout)
    handler.set_name(CONSOLE_HANDLER_NAME)
    handler.setFormatter(formatter)
    handler.setLevel(level)
    return handler


def _file_handler(path: str, formatter: logging.Formatter, level: int) -> logging.Handler:
    handler = RotatingFileHandler(
        path, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS, encoding="utf-8"
    )
    handler.set_name(FILE_HANDLER_NAME)
    handler.setFormatter(formatter)
    handler.setLevel(level)
    return handler


def setup_logger(
    config: dict | None = None,
    logger_name: str = DEFAULT_LOGGER_NAME,
    *,
    force_reconfigure: bool = False,
) -> logging.Logger:
    """Create or update the verifier logger from the ``"logging"`` config section.

    Parameters
    ----------
    config : dict, optional
        Application configuration; the ``"logging"`` section may set
        ``log_file``, ``log_level``, ``format``, ``console`` and ``file``.
    logger_name : str, optional
        Name of the logger to retrieve or create.
    force_reconfigure : bool, optional
        When ``True`` existing handlers are closed and replaced by the
        ``splinesys-console`` and ``splinesys-file`` handlers. Otherwise a
        logger that already has handlers is returned unchanged.

    Returns
    -------
    logging.Logger
        The configured logger instance.
    """
    logger = logging.getLogger(logger_name)

    log_conf = (config or {}).get("logging", {})
    log_file_path = log_conf.get("log_file", DEFAULT_LOG_FILE)
    log_level_str = str(log_conf.get("log_level", "INFO")).upper()
    log_format = log_conf.get("format", DEFAULT_LOG_FORMAT)
    enable_console = log_conf.get("console", True)
    enable_file = log_conf.get("file", True)

    log_level = getattr(logging, log_level_str, None)
    if not isinstance(log_level, int):
        sys.stderr.write(
            "Warning: Invalid log level "
            f"'{log_level_str}'. Defaulting to INFO.\n"
        )
        log_level_str = "INFO"
        log_level = logging.INFO

    logger.setLevel(log_level)

    if logger.handlers:
        if not force_reconfigure:
            return logger
        for handler in logger.handlers[:]:
            try:
                handler.close()
            except Exception:
                pass
            logger.removeHandler(handler)

    if enable_file and log_file_path:
        log_dir = os.path.dirname(log_file_path)
        try:
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)
        except OSError as e:
            sys.stderr.write(
                "Warning: Could not create log directory "
                f"{log_dir}: {e}. Logging to the working directory.\n"
            )
            log_file_path = os.path.basename(log_file_path) or "splinesys.log"

    formatter = logging.Formatter(log_format, datefmt=DEFAULT_DATE_FORMAT)

    if enable_console:
        logger.addHandler(_console_handler(formatter, log_level))

    file_target = "N/A"
    if enable_file and log_file_path:
        try:
            logger.addHandler(_file_handler(log_file_path, formatter, log_level))
            file_target = log_file_path
        except OSError as e:
            sys.stderr.write(
                "Error: Could not set up file logging at "
                f"{log_file_path}: {e}\n"
            )

    logger.info(
        "Verifier logger '%s' ready. Level: %s. Log file: %s",
        logger_name, log_level_str, file_target,
    )
    return logger
