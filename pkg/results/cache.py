# results/cache.py
import json
import os
from typing import Optional

from results.records import ResultRecord, record_from_document
from utils.errors import ResultIOError
from utils.logger import setup_logger

logger = setup_logger(__name__)

CACHE_ENV = "JJDUALITY_CACHE_DIR"
DEFAULT_CACHE_DIR = "~/.jjduality/cache"


def default_cache_dir(configured: str = "") -> str:
    """环境变量优先, 其次用户设置, 最后默认目录"""
    return os.path.expanduser(os.environ.get(CACHE_ENV) or configured or DEFAULT_CACHE_DIR)


class ResultCache:
    """按配置哈希寻址的结果目录, 只增不删 (清理靠手动删除目录)"""

    def __init__(self, root: Optional[str] = None):
        self.root = root or default_cache_dir()

    def path_for(self, key: str) -> str:
        return os.path.join(self.root, key[:2], f"{key}.json")

    def get(self, key: str) -> Optional[ResultRecord]:
        path = self.path_for(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                record = record_from_document(json.load(f), path)
        except (OSError, ValueError, KeyError, ResultIOError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            return None
        logger.info(f"Cache hit: {key[:12]}")
        return record

    def put(self, record: ResultRecord) -> str:
        path = self.path_for(record.key)
        temp_file = f"{path}.{os.getpid()}.tmp"
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(temp_file, 'w', encoding='utf-8') as f:
                json.dump(record.to_document(), f, sort_keys=True, indent=2, allow_nan=False)
                f.write("\n")

            # 写完再替换, 读者看不到半个文件
            os.replace(temp_file, path)
        except OSError as e:
            raise ResultIOError(f"cannot write cache entry ({e.strerror})", path)
        logger.debug(f"Cached {record.kind} result under {path}")
        return path
