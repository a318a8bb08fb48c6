import logging
import sys
from typing import Optional, Dict, Any, List
from pathlib import Path
from datetime import datetime

ROOT_LOGGER_NAME = "SparseDenoise"
# Classes log under their module path, e.g. src.pipeline.denoiser.DenoisePipeline
PACKAGE_LOGGER_NAME = __name__.split(".")[0]


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    log_dir: str = "logs",
    format_string: Optional[str] = None
) -> logging.Logger:
    """
    Set up logging configuration for the denoising system.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file name (will be created in log_dir)
        log_dir: Directory for log files
        format_string: Custom format string

    Returns:
        Configured logger instance
    """
    if format_string is None:
        format_string = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    numeric_level = getattr(logging, level.upper())

    handlers: List[logging.Handler] = []

    # Console handler; stderr keeps stdout free for command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(logging.Formatter(format_string))
    handlers.append(console_handler)

    # File handler (if specified)
    if log_file:
        if not log_file.endswith('.log'):
            log_file += '.log'

        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_path = log_path / log_file
        file_handler = logging.FileHandler(file_path, encoding='utf-8')
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(logging.Formatter(format_string))
        handlers.append(file_handler)

    for name in (ROOT_LOGGER_NAME, PACKAGE_LOGGER_NAME):
        configured = logging.getLogger(name)
        configured.handlers.clear()  # Clear any existing handlers
        configured.setLevel(numeric_level)
        configured.propagate = False
        for handler in handlers:
            configured.addHandler(handler)

    logger = logging.getLogger(ROOT_LOGGER_NAME)
    if log_file:
        logger.info(f"Logging to file: {file_path}")

    logger.debug(f"Logging initialized at level: {level}")
    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger with the specified name.

    Args:
        name: Logger name (usually __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


class StageLogger:
    """
    Logger for one stage of a denoising run (train, code, reconstruct)
    that also keeps the stage timing.
    """

    def __init__(self, run: str, stage: str):
        """
        Initialize the stage logger.

        Args:
            run: Run label (e.g. "lena/sigma=50/pdas")
            stage: Stage name (e.g. "train", "code", "reconstruct")
        """
        self.run = run
        self.stage = stage
        self.logger = get_logger(f"stage.{stage}")
        self.start_time = datetime.now()

        self.success_count = 0
        self.warning_count = 0

    @staticmethod
    def _format(tag: str, message: str, extras: Dict[str, Any]) -> str:
        extra_info = " | ".join([f"{k}={v}" for k, v in extras.items()])
        log_message = f"[{tag}] {message}"
        if extra_info:
            log_message += f" | {extra_info}"
        return log_message

    def log_start(self, message: str = None, **kwargs):
        """Log the start of the stage and reset its clock."""
        if message is None:
            message = f"Starting {self.stage} for {self.run}"
        self.logger.info(self._format("START", message, kwargs))
        self.start_time = datetime.now()

    def log_success(self, message: str, **kwargs):
        """Log a successful step."""
        self.success_count += 1
        self.logger.info(self._format("SUCCESS", message, kwargs))

    def log_warning(self, message: str, **kwargs):
        """Log a warning."""
        self.warning_count += 1
        self.logger.warning(self._format("WARNING", message, kwargs))

    def elapsed_seconds(self) -> float:
        """Seconds since the last log_start."""
        return (datetime.now() - self.start_time).total_seconds()

    def log_completion(self, message: str = None) -> Dict[str, Any]:
        """Log the completion of the stage with summary and return it."""
        duration = self.elapsed_seconds()

        if message is None:
            message = f"Completed {self.stage} for {self.run}"

        summary = (
            f"{message} | "
            f"Duration: {duration:.2f}s | "
            f"Success: {self.success_count} | "
            f"Warnings: {self.warning_count}"
        )
        self.logger.info(f"[COMPLETION] {summary}")

        return {
            'duration_seconds': duration,
            'success_count': self.success_count,
            'warning_count': self.warning_count
        }
