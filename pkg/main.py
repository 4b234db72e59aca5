# main.py
import argparse
import json
import logging
import sys
import traceback

from commands.run import COMMANDS, run_command
from config.settings import RunConfig, Settings, apply_overrides, parse_config, serialize_config
from results.cache import ResultCache, default_cache_dir
from utils.errors import DualityError, ResultIOError
from utils.logger import set_console_level, setup_logger

# 设置日志记录
logger = setup_logger("jjduality")


# 设置全局异常处理
def global_exception_handler(exctype, value, tb):
    error_msg = ''.join(traceback.format_exception(exctype, value, tb))
    logger.critical(f"Uncaught exception: {error_msg}")
    # 原始的异常处理
    sys.__excepthook__(exctype, value, tb)


sys.excepthook = global_exception_handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjduality",
        description="约瑟夫森结 + 传输线的精确对角化: 能带、迁移率拟合、对偶映射与光子谱",
    )
    parser.add_argument('command', choices=COMMANDS, help='要运行的命令')
    parser.add_argument('--config', help='JSON 配置文件 (缺省时全部使用默认值)')
    parser.add_argument('--out', help='输出目录, 覆盖 output.out_dir')
    parser.add_argument('--format', choices=['csv', 'json'], help='输出格式, 覆盖 output.format')
    parser.add_argument('--threads', type=int, help='扫描线程数 (默认取用户设置)')
    parser.add_argument('--audit', action='store_true', help='截断加倍审计, 结果写入 provenance')
    parser.add_argument('--lenient', action='store_true', help='未知配置键只警告不报错')
    parser.add_argument('--set', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='覆盖单个配置键, 可重复')
    parser.add_argument('--print-config', action='store_true', help='打印规范化后的配置并退出')
    parser.add_argument('-v', '--verbose', action='store_true', help='控制台输出 DEBUG 日志')
    return parser


def load_config(path, lenient: bool) -> RunConfig:
    if not path:
        return RunConfig()
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ResultIOError(f"cannot read config ({e.strerror})", path)
    return parse_config(text, lenient=lenient)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    try:
        settings = Settings()
        cfg = apply_overrides(load_config(args.config, args.lenient), args.set)
        if args.print_config:
            sys.stdout.write(serialize_config(cfg))
            return 0
        threads = args.threads or int(settings.get("threads", 1))
        fmt = args.format or (cfg.output.format if args.config else settings.get("format", cfg.output.format))
        cache = ResultCache(default_cache_dir(settings.get("cache_dir", "")))
        status, paths, _ = run_command(args.command, cfg, out_dir=args.out, fmt=fmt,
                                       threads=threads, audit=args.audit, cache=cache)
        for path in paths:
            print(path)
        logger.info(f"Command '{args.command}' finished with status {status}")
        return status
    except DualityError as e:
        logger.critical(f"Command '{args.command}' failed: {e}")
        traceback.print_exc()
        sys.stderr.write(json.dumps(e.to_record(), sort_keys=True) + "\n")
        return 1
    except Exception as e:
        logger.critical(f"Main program exception: {e}")
        traceback.print_exc()
        sys.stderr.write(json.dumps({'code': 500, 'error': type(e).__name__, 'message': str(e)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
