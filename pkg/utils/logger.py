# utils/logger.py
import os
import logging
import platform
from logging.handlers import RotatingFileHandler

APP_NAME = "JJDuality"
ROOT_NAME = "jjduality"
LOG_FILE = "jjduality.log"


def _log_dir():
    """确定日志目录, JJDUALITY_LOG_DIR 优先"""
    override = os.environ.get("JJDUALITY_LOG_DIR")
    if override:
        return os.path.expanduser(override)

    if platform.system() == "Darwin":  # macOS
        return os.path.expanduser(f"~/Library/Logs/{APP_NAME}")
    elif platform.system() == "Windows":
        return os.path.join(os.environ.get("APPDATA", os.path.expanduser("~")), APP_NAME, "logs")
    else:  # Linux
        return os.path.expanduser("~/.jjduality/logs")


def _configure_root(level):
    """包根日志记录器: 控制台 + 轮转文件, 只配置一次"""
    root = logging.getLogger(ROOT_NAME)

    # 如果已经配置过，直接返回
    if root.handlers:
        return root

    root.setLevel(level)
    root.propagate = False

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # 控制台处理器
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)

    log_dir = _log_dir()
    try:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, LOG_FILE)

        # 每个日志文件限制5MB，保留5个备份
        file_handler = RotatingFileHandler(
            log_file, maxBytes=5*1024*1024, backupCount=5, encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
        root.debug(f"Log file path: {log_file}")
    except OSError as e:
        root.warning(f"File logging disabled, cannot use {log_dir}: {e}")

    return root


def setup_logger(name=ROOT_NAME, level=logging.DEBUG):
    """设置并返回日志记录器; 模块记录器是 jjduality.<name>, 共用根记录器的处理器"""
    root = _configure_root(level)
    if name == ROOT_NAME:
        return root
    if not name.startswith(ROOT_NAME + "."):
        name = f"{ROOT_NAME}.{name}"
    return logging.getLogger(name)


def set_console_level(level):
    """Adjust the console verbosity of the jjduality root logger."""
    for handler in _configure_root(logging.DEBUG).handlers:
        if type(handler) is logging.StreamHandler:
            handler.setLevel(level)
