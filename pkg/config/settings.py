# config/settings.py
import os
import json
import math
import platform
import traceback
from dataclasses import dataclass, field, fields, asdict, replace
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union, get_args, get_origin

from utils.errors import ConfigParseError, ConfigValidationError
from utils.logger import setup_logger

logger = setup_logger(__name__)

SECTIONS = ("circuit", "numerics", "sweep", "output", "verify")


def _rule(default, allowed: str, check=None, **kw):
    """带校验规则的字段: allowed 是写进错误信息的允许范围"""
    return field(default=default, metadata={"allowed": allowed, "check": check}, **kw)


def _positive(v):
    return v > 0


def _non_negative(v):
    return v >= 0


@dataclass(frozen=True)
class CircuitBlock:
    e_j: float = _rule(1.0, ">= 0", _non_negative)
    e_c: float = _rule(1.0, "> 0", _positive)
    z_ratio: float = _rule(1.0, "> 0", _positive)
    omega_c: float = _rule(4.0, "> 0", _positive)
    n_modes: Optional[int] = _rule(10, "integer >= 1", lambda v: v >= 1)
    delta: Optional[float] = _rule(None, "> 0", _positive)
    boundary: str = _rule("open", "one of open, short", lambda v: v in ("open", "short"))
    bias: float = _rule(0.0, "[-0.5, 0.5]", lambda v: -0.5 <= v <= 0.5)


@dataclass(frozen=True)
class NumericsConfig:
    e_cut: Optional[float] = _rule(None, "> 0", _positive)
    e_cut_delta: float = _rule(6.0, "> 0", _positive)
    n_max: int = _rule(12, "integer >= 1", lambda v: v >= 1)
    n_lev: int = _rule(24, "integer >= 2", lambda v: v >= 2)
    grid_factor: int = _rule(8, "integer >= 2", lambda v: v >= 2)
    n_bands: Optional[int] = _rule(None, "integer >= 1", lambda v: v >= 1)
    n_levels: int = _rule(6, "integer >= 1", lambda v: v >= 1)
    max_basis: int = _rule(200000, "integer >= 1", lambda v: v >= 1)
    dense_threshold: int = _rule(2000, "integer >= 1", lambda v: v >= 1)
    eig_tol: float = _rule(1e-12, ">= 0", _non_negative)
    max_iter: Optional[int] = _rule(None, "integer >= 1", lambda v: v >= 1)
    shift_invert: bool = _rule(False, "true or false")
    residual_tol: float = _rule(1e-8, "> 0", _positive)
    drop_tol: float = _rule(1e-14, ">= 0", _non_negative)
    gamma: float = _rule(0.02, "> 0", _positive)
    n_states: int = _rule(40, "integer >= 2", lambda v: v >= 2)
    u0_method: str = _rule("bandwidth", "one of bandwidth, fit", lambda v: v in ("bandwidth", "fit"))
    oracle_max_dim: int = _rule(20000, "integer >= 1", lambda v: v >= 1)


@dataclass(frozen=True)
class SweepConfig:
    bias_points: int = _rule(41, "integer >= 2", lambda v: v >= 2)
    e_j: Tuple[float, ...] = _rule((0.25, 1.0, 2.0, 4.0), "non-empty list of values >= 0",
                                   lambda v: len(v) > 0 and all(x >= 0 for x in v))
    z_ratio: Tuple[float, ...] = _rule((0.5, 1.0, 2.0), "non-empty list of values > 0",
                                       lambda v: len(v) > 0 and all(x > 0 for x in v))
    omega_min: float = _rule(0.0, ">= 0", _non_negative)
    omega_max: float = _rule(4.0, "> 0", _positive)
    omega_points: int = _rule(401, "integer >= 2", lambda v: v >= 2)
    skip_failed: bool = _rule(False, "true or false")


@dataclass(frozen=True)
class OutputConfig:
    out_dir: str = _rule("results", "non-empty path", lambda v: len(v) > 0)
    format: str = _rule("csv", "one of csv, json", lambda v: v in ("csv", "json"))
    rescale: bool = _rule(True, "true or false")
    normalize_columns: bool = _rule(False, "true or false")
    use_cache: bool = _rule(True, "true or false")


@dataclass(frozen=True)
class VerifyConfig:
    include_slow: bool = _rule(False, "true or false")
    checks: Tuple[str, ...] = _rule((), "list of check names")


@dataclass(frozen=True)
class RunConfig:
    circuit: CircuitBlock = field(default_factory=CircuitBlock)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)


_BLOCKS = {
    "circuit": CircuitBlock,
    "numerics": NumericsConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
    "verify": VerifyConfig,
}


def _base_type(tp):
    """Optional[X] -> (X, True)"""
    origin = get_origin(tp)
    if origin is Union:
        args = [a for a in get_args(tp) if a is not type(None)]
        return args[0], True
    return tp, False


def _coerce(section: str, f, value):
    """把 JSON 值转换成字段类型, 失败抛 ConfigValidationError"""
    name = f"{section}.{f.name}"
    allowed = f.metadata.get("allowed", "")
    tp, optional = _base_type(f.type)
    if value is None:
        if optional:
            return None
        raise ConfigValidationError(name, allowed, value)
    try:
        if get_origin(tp) is tuple:
            item = get_args(tp)[0]
            if not isinstance(value, list):
                value = [value]
            if any(isinstance(x, bool) for x in value):
                raise TypeError
            return tuple(item(x) for x in value)
        if tp is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if tp is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if tp is float:
            if isinstance(value, bool):
                raise TypeError
            value = float(value)
            if not math.isfinite(value):
                raise ValueError
            return value
        if tp is str and not isinstance(value, str):
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigValidationError(name, allowed, value)
    return value


def _build_block(section: str, data: Mapping[str, Any], lenient: bool):
    cls = _BLOCKS[section]
    if not isinstance(data, Mapping):
        raise ConfigValidationError(section, "an object of key/value pairs", data)
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            if lenient:
                logger.warning(f"Ignoring unknown config key '{section}.{key}'")
                continue
            raise ConfigValidationError(f"{section}.{key}", f"one of {', '.join(sorted(known))}", value)
        f = known[key]
        value = _coerce(section, f, value)
        check = f.metadata.get("check")
        if value is not None and check is not None and not check(value):
            raise ConfigValidationError(f"{section}.{key}", f.metadata["allowed"], value)
        kwargs[key] = value
    if section == "circuit" and kwargs.get("delta") is not None and "n_modes" not in kwargs:
        # 只给了 delta: N_m 由 _reconcile_modes 换算
        kwargs["n_modes"] = None
    return cls(**kwargs)


def _reconcile_modes(circuit: CircuitBlock) -> CircuitBlock:
    """delta 与 n_modes 二选一, delta 换算成 N_m = round(pi*omega_c/(2*delta))"""
    if circuit.delta is not None and circuit.n_modes is not None:
        raise ConfigValidationError("circuit.delta", "only one of delta, n_modes", circuit.delta)
    if circuit.delta is None:
        if circuit.n_modes is None:
            return replace(circuit, n_modes=10)
        return circuit
    exact = math.pi * circuit.omega_c / (2.0 * circuit.delta)
    n_modes = max(1, int(round(exact)))
    error = abs(n_modes - exact) / exact
    if error > 0.01:
        logger.warning(
            f"delta={circuit.delta} gives N_m={exact:.4f}, rounded to {n_modes} "
            f"(relative error {error:.2%})"
        )
    return replace(circuit, n_modes=n_modes, delta=None)


def config_from_mapping(document: Mapping[str, Any], lenient: bool = False) -> RunConfig:
    if not isinstance(document, Mapping):
        raise ConfigValidationError("<root>", "an object with sections " + ", ".join(SECTIONS), document)
    blocks = {}
    for key, value in document.items():
        if key not in _BLOCKS:
            if lenient:
                logger.warning(f"Ignoring unknown config section '{key}'")
                continue
            raise ConfigValidationError(key, "one of " + ", ".join(SECTIONS), value)
        blocks[key] = _build_block(key, value, lenient)
    cfg = RunConfig(**blocks)
    return replace(cfg, circuit=_reconcile_modes(cfg.circuit))


def parse_config(text: str, lenient: bool = False) -> RunConfig:
    """解析 JSON 配置文本并校验"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, e.lineno, e.colno)
    cfg = config_from_mapping(document, lenient=lenient)
    logger.debug(f"Parsed config: N_m={cfg.circuit.n_modes}, boundary={cfg.circuit.boundary}")
    return cfg


def config_to_dict(cfg: RunConfig) -> Dict[str, Any]:
    data = asdict(cfg)
    for section in data.values():
        for key, value in section.items():
            if isinstance(value, tuple):
                section[key] = list(value)
    return data


def serialize_config(cfg: RunConfig) -> str:
    """规范形式: 排序键, 默认值补齐"""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def apply_overrides(cfg: RunConfig, assignments: Sequence[str]) -> RunConfig:
    """命令行 --set section.key=value, 值按 JSON 解析, 否则当作字符串"""
    if not assignments:
        return cfg
    data = config_to_dict(cfg)
    for item in assignments:
        path, sep, raw = item.partition("=")
        section, dot, key = path.strip().partition(".")
        if not sep or not dot or section not in data:
            raise ConfigValidationError(path or item, "section.key=value", item)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        data[section][key] = value
        if section == "circuit" and key == "delta":
            data["circuit"]["n_modes"] = None
        logger.debug(f"Override {section}.{key} = {value!r}")
    return config_from_mapping(data)


class Settings:
    """用户级偏好 (线程数、缓存目录、默认格式), 保存在平台配置目录"""

    DEFAULTS = {
        "threads": 1,
        "cache_dir": "",
        "format": "csv",
    }

    def __init__(self, config_file: Optional[str] = None):
        try:
            self.system = platform.system()
            self.config_file = config_file or self._get_config_path()
            self.settings = self._load_settings()
            logger.debug(f"Settings loaded, config file: {self.config_file}")
        except Exception as e:
            logger.critical(f"Failed to initialize settings: {e}")
            traceback.print_exc()
            raise

    def _get_config_path(self):
        """获取配置文件路径"""
        override = os.environ.get("JJDUALITY_CONFIG_DIR")
        try:
            if override:
                config_dir = os.path.expanduser(override)
            elif self.system == "Darwin":  # macOS
                config_dir = os.path.expanduser("~/Library/Application Support/JJDuality")
            elif self.system == "Windows":
                config_dir = os.path.join(os.environ["APPDATA"], "JJDuality")
            else:
                config_dir = os.path.expanduser("~/.jjduality")

            # 确保目录存在
            os.makedirs(config_dir, exist_ok=True)

            return os.path.join(config_dir, "settings.json")
        except Exception as e:
            logger.error(f"Error getting config path: {e}")
            # 使用备用路径
            return os.path.join(os.getcwd(), "jjduality-settings.json")

    def _load_settings(self):
        """加载设置, 文件不存在或损坏时使用默认值"""
        if not os.path.exists(self.config_file):
            return dict(self.DEFAULTS)
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                stored = json.load(f)
            merged = dict(self.DEFAULTS)
            merged.update({k: v for k, v in stored.items() if k in self.DEFAULTS})
            return merged
        except (OSError, ValueError) as e:
            logger.error(f"Error loading config file {self.config_file}: {e}")
            return dict(self.DEFAULTS)

    def get(self, key, default=None):
        return self.settings.get(key, default)
