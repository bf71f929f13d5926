import logging
import os
from datetime import datetime
from dataclasses import dataclass
from enum import Enum

from config.settings import get_settings

FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

@dataclass
class LogTypeInfo:
    directory_name: str
    logger_format: logging.Formatter
    max_count: int
    level: int

# Console, run summary and per-root/per-step detail streams
class LogType(Enum):
    DEFAULT = LogTypeInfo(directory_name="",
                          logger_format=logging.Formatter(FORMAT),
                          max_count=10,
                          level=logging.INFO)
    APPLICATION = LogTypeInfo(directory_name="application",
                              logger_format=logging.Formatter(FORMAT),
                              max_count=30,
                              level=logging.INFO)
    DEBUG = LogTypeInfo(directory_name="debug",
                        logger_format=logging.Formatter(FORMAT),
                        max_count=5,
                        level=logging.DEBUG)

    @property
    def directory_name(self):
        return self.value.directory_name

    @property
    def logger_format(self):
        return self.value.logger_format

    @property
    def max_count(self):
        return self.value.max_count

    @property
    def level(self):
        return self.value.level

def _file_handler(log_root: str, log_type: LogType, timestamp: str) -> logging.FileHandler:
    directory = os.path.join(log_root, log_type.directory_name)
    os.makedirs(directory, exist_ok=True)
    handler = logging.FileHandler(os.path.join(directory, f"{timestamp}_{log_type.directory_name}.log"))
    handler.setLevel(log_type.level)
    handler.setFormatter(log_type.logger_format)

    cleanup_logs(log_list=[f for f in os.listdir(directory) if f.endswith(f"{log_type.directory_name}.log")],
                 log_dir=directory,
                 log_type=log_type)
    return handler

def setup_logging(log_dir: str | None = None):
    settings = get_settings()
    log_root = log_dir or settings.log_dir

    # Console output at the configured level
    console_handler = logging.StreamHandler()
    console_handler.setLevel(settings.log_level.upper())
    console_handler.setFormatter(LogType.DEFAULT.logger_format)
    handlers = [console_handler]

    if settings.log_to_file:
        timestamp = datetime.now().strftime("%Y%m%d%H%M%S")
        handlers.append(_file_handler(log_root, LogType.APPLICATION, timestamp))
        handlers.append(_file_handler(log_root, LogType.DEBUG, timestamp))

    # Root logger passes everything; handlers filter
    logging.basicConfig(level=logging.DEBUG, handlers=handlers, force=True)

    return logging.getLogger(__name__)

def cleanup_logs(log_list: list[str], log_dir: str, log_type: LogType = LogType.DEFAULT):
    # Sort by timestamp (oldest first)
    sorted_logs = sorted(log_list, key=lambda filename: filename.split("_")[0])

    # Remove oldest logs until we have max_count or fewer
    logs_to_remove = sorted_logs[:-log_type.max_count]

    for log_file in logs_to_remove:
        file_path = os.path.join(log_dir, log_file)
        try:
            os.remove(file_path)
        except OSError as e:
            logging.getLogger(__name__).warning(f"Error removing log {log_file}: {e}")
