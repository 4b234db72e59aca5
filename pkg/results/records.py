# results/records.py
"""
结果记录与输出.

CSV: 一行表头 (带单位), 浮点数写成最短可回读的十进制 (repr), 行顺序固定.
JSON: 带 schema 版本, 内嵌配置哈希与 provenance.
"""
import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.settings import RunConfig, config_to_dict
from utils.errors import ResultIOError
from utils.logger import setup_logger

logger = setup_logger(__name__)

ARTIFACT_VERSION = "1.0.0"
SCHEMA = "jjduality.result/1"
ENERGY = "[E_C]"

Table = Tuple[List[str], List[Sequence[Any]]]


@dataclass(frozen=True)
class ResultRecord:
    kind: str
    key: str
    payload: Dict[str, Any]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def to_document(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "config_hash": self.key,
            "provenance": self.provenance,
            "payload": self.payload,
        }


def clean(value):
    """numpy -> 纯 Python, 非有限浮点 -> None, tuple -> list"""
    if isinstance(value, Mapping):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return clean(value.tolist())
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def canonical_json(data: Any) -> str:
    return json.dumps(clean(data), sort_keys=True, separators=(",", ":"), allow_nan=False)


def cache_key(command: str, cfg: RunConfig) -> str:
    """sha256 of the canonical config subset that determines the payload."""
    data = config_to_dict(cfg)
    subset = {
        "command": command,
        "circuit": data["circuit"],
        "numerics": data["numerics"],
        "sweep": data["sweep"],
        "output": {k: data["output"][k] for k in ("rescale", "normalize_columns")},
    }
    if command == "verify":
        subset["verify"] = data["verify"]
    return hashlib.sha256(canonical_json(subset).encode("utf-8")).hexdigest()


def make_record(kind: str, cfg: RunConfig, payload: Mapping[str, Any],
                audit: Optional[Mapping[str, float]] = None) -> ResultRecord:
    provenance = {
        "version": ARTIFACT_VERSION,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "audit": clean(audit) if audit is not None else None,
    }
    return ResultRecord(kind=kind, key=cache_key(kind, cfg), payload=clean(payload), provenance=provenance)


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


# ---- per-kind tables ---------------------------------------------------------

def _band_table(bands: Mapping[str, Any]) -> Table:
    energies = bands.get("energies") or []
    n_bands = len(energies[0]) if energies else int(bands.get("metadata", {}).get("n_bands", 0))
    suffix = "_rescaled" if bands.get("rescale_reference") is not None else f" {ENERGY}"
    header = [bands.get("bias_name", "bias")] + [f"E{s + 1}{suffix}" for s in range(n_bands)]
    rows = [[x] + list(row) for x, row in zip(bands.get("bias", []), energies)]
    return header, rows


def _modes_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    header = ["mode", f"Omega {ENERGY}", f"f {ENERGY}"]
    bath = p.get("bath")
    if bath:
        header += [f"omega {ENERGY}", f"g {ENERGY}", f"g_approx {ENERGY}"]
    rows = []
    for k, (w, f) in enumerate(zip(p["frequencies"], p["couplings"])):
        row = [k + 1, w, f]
        if bath:
            row += [bath["frequencies"][k], bath["couplings"][k], bath["approx_couplings"][k]]
        rows.append(row)
    summary = [["sum_rule_residual", p.get("sum_rule_residual")]]
    for name in ("e_c_tilde", "josephson_suppression", "e_l_tilde", "one_band_ratio"):
        if p.get(name) is not None:
            summary.append([name, p[name]])
    return {"": (header, rows), "summary": (["quantity", "value"], summary)}


def _fit_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    fit = p["fit"]
    names = ["mu", "rms_residual", "offset", "band_index", "grid_size", "at_bound", "flagged"]
    header = names + ["cft_residual_bands_1_3"]
    tables = {"": (header, [[fit[n] for n in names] + [p.get("cft_residual")]])}
    if p.get("bands"):
        tables["bands"] = _band_table(p["bands"])
    return tables


def _duality_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    samples = [["charge"] + list(s) for s in p["charge_samples"]] \
        + [["flux"] + list(s) for s in p["flux_samples"]]
    summary = [[name, p.get(name)] for name in ("self_dual_point", "mu_at_self_dual", "fixed_point", "coincident")]
    return {
        "": ([f"E_J {ENERGY}", f"F(E_J) {ENERGY}"], p["map"]),
        "samples": (["circuit", f"E_J {ENERGY}", "mu"], samples),
        "summary": (["quantity", "value"], summary),
    }


def _spectroscopy_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    header = [f"omega {ENERGY}"] + [f"D[E_J={e!r}]" for e in p["e_j"]]
    rows = [[w] + [column[i] for column in p["values"]] for i, w in enumerate(p["omega"])]
    transitions = [[e, dE, w] for e, t in zip(p["e_j"], p["transitions"])
                   for dE, w in zip(t["energies"], t["weights"])]
    return {
        "": (header, rows),
        "transitions": ([f"E_J {ENERGY}", f"dE {ENERGY}", "weight"], transitions),
    }


def _heatmap_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    rows = []
    for i, z in enumerate(p["z_ratio"]):
        for j, e in enumerate(p["e_j"]):
            rows.append([z, e, p["mu"][i][j], p["mu_bar"][i][j], p["flagged"][i][j]])
    tables = {"": (["z_ratio", f"E_J {ENERGY}", "mu", "mu_bar", "flagged"], rows)}
    scan = p.get("impedance_scan")
    if scan:
        n_levels = len(scan["levels"][0][0]) if scan["levels"] else 0
        header = ["z_ratio", "bias"] + [f"E{s + 1} {ENERGY}" for s in range(n_levels)]
        scan_rows = [[z, b] + list(levels) for z, per_bias in zip(scan["z_ratio"], scan["levels"])
                     for b, levels in zip(scan["bias"], per_bias)]
        tables["impedance"] = (header, scan_rows)
    return tables


def _verify_tables(p: Mapping[str, Any]) -> Dict[str, Table]:
    rows = [[c["name"], c["passed"], c["detail"]] for c in p["checks"]]
    return {"": (["check", "passed", "detail"], rows)}


TABULATORS: Dict[str, Callable[[Mapping[str, Any]], Dict[str, Table]]] = {
    "modes": _modes_tables,
    "bands": lambda p: {"": _band_table(p)},
    "fit": _fit_tables,
    "duality": _duality_tables,
    "spectroscopy": _spectroscopy_tables,
    "heatmap": _heatmap_tables,
    "verify": _verify_tables,
}


# ---- writers -----------------------------------------------------------------

def _write_text(path: str, text: str):
    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise ResultIOError(f"cannot write result file ({e.strerror})", path)


def _csv_text(table: Table) -> str:
    header, rows = table
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def _json_text(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def emit_results(record: ResultRecord, fmt: str, out_dir: str) -> List[str]:
    """Write the record; returns the written paths in a fixed order."""
    if fmt not in ("csv", "json"):
        raise ResultIOError(f"unknown output format '{fmt}'", out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise ResultIOError(f"cannot create output directory ({e.strerror})", out_dir)

    written = []
    if fmt == "json":
        path = os.path.join(out_dir, f"{record.kind}.json")
        _write_text(path, _json_text(record.to_document()))
        written.append(path)
    else:
        for name, table in TABULATORS[record.kind](record.payload).items():
            stem = record.kind if not name else f"{record.kind}_{name}"
            path = os.path.join(out_dir, f"{stem}.csv")
            _write_text(path, _csv_text(table))
            written.append(path)
        meta = {k: v for k, v in record.to_document().items() if k != "payload"}
        path = os.path.join(out_dir, f"{record.kind}.meta.json")
        _write_text(path, _json_text(meta))
        written.append(path)
    logger.info(f"Wrote {record.kind} results: {', '.join(written)}")
    return written


def record_from_document(document: Mapping[str, Any], path: str = "<memory>") -> ResultRecord:
    if document.get("schema") != SCHEMA:
        raise ResultIOError(f"unsupported result schema {document.get('schema')!r}", path)
    return ResultRecord(
        kind=document["kind"],
        key=document["config_hash"],
        payload=document["payload"],
        provenance=document.get("provenance") or {},
    )


def load_record(path: str) -> ResultRecord:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except OSError as e:
        raise ResultIOError(f"cannot read result file ({e.strerror})", path)
    except ValueError:
        raise ResultIOError("result file is not valid JSON", path)
    return record_from_document(document, path)
