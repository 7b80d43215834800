import os
import logging
from typing import Optional, Tuple

LOGGER_NAME = "SysmelKernel"


# --- Logging Configuration ---
def setup_logging(level: str = "WARNING", log_file: Optional[str] = None) -> Tuple[logging.Logger, str]:
    """Sets up logging for the kernel: a log file plus the console"""
    APP_NAME = "SysmelKernel"
    COMPANY_NAME = "Sysmel"
    log_base_dir = os.getenv('LOCALAPPDATA')
    log_dir = os.path.join(log_base_dir, COMPANY_NAME, APP_NAME, 'Logs') if log_base_dir else os.path.join(
        os.path.expanduser("~"), f".{APP_NAME.lower()}", 'logs')

    if log_file:
        log_file_path = log_file
    else:
        try:
            os.makedirs(log_dir, exist_ok=True)
            log_file_path = os.path.join(log_dir, "sysmel_kernel.log")
        except OSError as e:
            print(f"WARNING: Could not create log directory '{log_dir}': {e}. Logging to current directory instead.")
            log_file_path = "sysmel_kernel.log"

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(getattr(logging, level.upper(), logging.WARNING))
    handlers = [stream_handler]
    try:
        handlers.append(logging.FileHandler(log_file_path, encoding='utf-8'))
    except OSError as e:
        print(f"WARNING: Could not open log file '{log_file_path}': {e}. Logging to the console only.")

    logging.basicConfig(
        level=logging.DEBUG if level.upper() == "DEBUG" else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    logger = logging.getLogger(LOGGER_NAME)
    logger.info(f"Logging initialized. Main log: {log_file_path}")
    return logger, log_file_path


def read_source_file(path: str) -> str:
    """Read a UTF-8 source file"""
    logger = logging.getLogger(LOGGER_NAME)
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    logger.info(f"Read {len(text)} characters from '{path}'")
    return text


def write_binary_file(path: str, data: bytes) -> str:
    """Write bytes to path, creating the parent folder when needed"""
    logger = logging.getLogger(LOGGER_NAME)
    folder = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
    except OSError as e:
        logger.error(f"Fatal: Could not create folder '{folder}': {e}")
        raise
    with open(path, 'wb') as f:
        f.write(data)
    logger.info(f"Wrote {len(data)} bytes to '{path}'")
    return path


def read_binary_file(path: str) -> bytes:
    with open(path, 'rb') as f:
        return f.read()
