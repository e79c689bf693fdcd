"""
Logging configuration for the simulator, the CLI and the workbench.
Logs to both console and file (logs/hswarm.log).
"""
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

WORKER_LOGGER = "hswarm_worker"


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = "logs/hswarm.log",
    stream: Optional[TextIO] = None,
):
    """
    Configure the root logger.

    Args:
        log_level: Console logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Path to log file, or None for console only
        stream: Console stream, stderr when None; stdout stays free for command output

    Returns:
        The configured root logger
    """
    logger = logging.getLogger()
    level = getattr(logging, log_level.upper(), logging.INFO)
    logger.setLevel(min(level, logging.DEBUG) if log_file else level)

    # Remove existing handlers to avoid duplicates
    logger.handlers.clear()

    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))

    if log_file:
        try:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(
                    '[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s',
                    datefmt='%Y-%m-%d %H:%M:%S',
                )
            )
            logger.addHandler(file_handler)
        except OSError as e:
            # If file logging fails, continue with console only
            print(f"Warning: Could not set up file logging: {e}", file=sys.stderr)

    logger.addHandler(console_handler)
    logger.debug("Logging initialized")
    return logger


def setup_worker_logging(log_file: str = "logs/worker.log", log_level: str = "WARNING"):
    """
    Configure logging inside an experiment worker process.

    Worker processes start from a fresh interpreter, so their records would
    otherwise be lost. Everything goes to a separate worker log file.

    Args:
        log_file: Path to worker log file
        log_level: Level for the root logger inside the worker

    Returns:
        Logger instance for worker bookkeeping messages
    """
    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(getattr(logging, log_level.upper(), logging.WARNING))

    worker_logger = logging.getLogger(WORKER_LOGGER)
    worker_logger.setLevel(logging.DEBUG)
    worker_logger.handlers.clear()

    try:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(
                '[%(asctime)s] [%(levelname)s] [WORKER %(process)d] [%(name)s] %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S',
            )
        )
        root.addHandler(file_handler)
    except OSError as e:
        print(f"Warning: Could not set up worker logging: {e}", file=sys.stderr)

    return worker_logger
