"""Pipelines behind the CLI subcommands and report serialization."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import analyzer
from .config import RunConfig
from .tower import Tower
from .tree import build_tree, export_dot

REPORT_FORMAT = "renormlab-report"
REPORT_VERSION = 1
TABLE_COLUMNS = ("level", "n", "Q_order", "D_order", "D_shape", "bonding_surjective")


def cache_path(cfg: RunConfig) -> Path | None:
    if not cfg.cache_dir:
        return None
    spec = cfg.chain_spec().describe()
    spec.pop("max_level")
    digest = hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()[:16]
    return Path(cfg.cache_dir) / f"{cfg.backend}-{digest}.json"


def obtain_tower(cfg: RunConfig, depth: int | None = None) -> Tower:
    """Load the tower from cache when possible, else build (and cache) it."""
    spec = cfg.chain_spec()
    depth = cfg.max_level if depth is None else depth
    path = cache_path(cfg)
    if path is not None and path.exists():
        tower = Tower.load(path, spec)
        if tower.depth >= depth:
            return tower
        tower.cache_hit = False
        tower.extend(depth)
    else:
        tower = Tower.build(spec, depth)
    if path is not None:
        tower.save(path)
    return tower


def level_table(tower: Tower, shape_budget: int = 10**6) -> list[dict[str, Any]]:
    rows = []
    for lv in range(tower.depth + 1):
        shape = tower.shape(lv, shape_budget)
        rows.append({
            "level": lv,
            "n": tower.n(lv),
            "Q_order": tower.quotient(lv).order,
            "D_order": tower.discriminant(lv).order,
            "D_shape": None if shape is None else shape.to_json(),
            "bonding_surjective": tower.bonding_surjective(lv) if lv < tower.depth else None,
        })
    return rows


def _envelope(command: str, cfg: RunConfig) -> dict[str, Any]:
    return {"format": REPORT_FORMAT, "version": REPORT_VERSION, "command": command, "config": cfg.to_json()}


def _finish(report: dict[str, Any], started: float, cache_hit: bool) -> dict[str, Any]:
    report["runtime"] = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "elapsed_s": round(time.perf_counter() - started, 3),
        "cache_hit": cache_hit,
    }
    return report


def run_tower(cfg: RunConfig) -> dict[str, Any]:
    started = time.perf_counter()
    tower = obtain_tower(cfg)
    report = _envelope("tower", cfg)
    report["table"] = level_table(tower, cfg.shape_budget)
    return _finish(report, started, tower.cache_hit)


def run_analyze(cfg: RunConfig) -> dict[str, Any]:
    started = time.perf_counter()
    tower = obtain_tower(cfg)
    backend = tower.spec.backend
    report = _envelope("analyze", cfg)
    report["table"] = level_table(tower, cfg.shape_budget)
    if tower.depth >= 2:
        report["verdict"] = analyzer.classify_discriminant(tower, cfg.effective_window).to_json()
    else:
        report["verdict"] = None
    probes: dict[str, Any] = {}
    if cfg.qa is not None:
        probes["qa"] = _qa(tower, cfg.qa)
    if cfg.kernel is not None:
        words = analyzer.kernel_probe(tower, cfg.kernel["level"], cfg.kernel["word_bound"])
        probes["kernel"] = {**cfg.kernel, "words": [w.to_json(backend) for w in words]}
    if cfg.contracting is not None:
        c = cfg.contracting
        if c["elements"] == "generators":
            elements = list(zip(backend.generator_names(), backend.generators()))
        else:
            elements = [(json.dumps(e), backend.decode(e)) for e in c["elements"]]
        probes["contracting"] = [
            {"element": name, **analyzer.contracting_probe(tower, g, c["max_level"], c["max_iterate"]).to_json()}
            for name, g in elements
        ]
    if cfg.self_replicating is not None:
        s = cfg.self_replicating
        probes["self_replicating"] = analyzer.self_replicating_probe(backend, s["word_bound"], s["depth"]).to_json()
    report["probes"] = probes
    return _finish(report, started, tower.cache_hit)


def _qa(tower: Tower, qa: dict[str, int]) -> dict[str, Any]:
    result = analyzer.qa_witness_search(tower, qa["level"], qa["cylinder_depth"], qa["word_bound"])
    out = result.to_json()
    if result.witness is not None:
        out["witness"]["certificate_valid"] = analyzer.validate_witness(tower, result.witness)
    return out


def run_qa_scan(cfg: RunConfig) -> dict[str, Any]:
    started = time.perf_counter()
    qa = cfg.qa or {"level": cfg.max_level, "cylinder_depth": 1, "word_bound": 8}
    tower = obtain_tower(cfg, qa["level"])
    report = _envelope("qa-scan", cfg)
    report["qa"] = _qa(tower, qa)
    return _finish(report, started, tower.cache_hit)


def run_tree_export(cfg: RunConfig, depth: int | None = None) -> str:
    depth = cfg.max_level if depth is None else depth
    tower = obtain_tower(cfg, depth)
    return export_dot(build_tree(tower, depth))


# formatting ----------------------------------------------------------------

def strip_runtime(report: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in report.items() if k != "runtime"}


def to_json_text(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def table_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        shape = out["D_shape"]
        out["D_shape"] = "" if shape is None else shape if isinstance(shape, str) else "x".join(map(str, shape)) or "1"
        out["bonding_surjective"] = "" if out["bonding_surjective"] is None else str(out["bonding_surjective"]).lower()
        writer.writerow(out)
    return buf.getvalue()


def read_table_csv(text: str) -> list[dict[str, Any]]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        shape = rec["D_shape"]
        rows.append({
            "level": int(rec["level"]),
            "n": int(rec["n"]),
            "Q_order": int(rec["Q_order"]),
            "D_order": int(rec["D_order"]),
            "D_shape": None if shape == "" else "NonAbelian" if shape == "NonAbelian" else [] if shape == "1"
            else [int(x) for x in shape.split("x")],
            "bonding_surjective": None if rec["bonding_surjective"] == "" else rec["bonding_surjective"] == "true",
        })
    return rows


def to_text(report: dict[str, Any]) -> str:
    lines = [f"renormlab {report['command']}  ({report['config']['backend']}, {report['config']['chain']})"]
    if "table" in report:
        lines.append(f"{'l':>3} {'n_l':>10} {'|Q_l|':>22} {'|D_l|':>14}  shape  surj")
        for r in report["table"]:
            shape = r["D_shape"]
            shape_s = "-" if shape is None else shape if isinstance(shape, str) else "x".join(map(str, shape)) or "1"
            surj = "" if r["bonding_surjective"] is None else "yes" if r["bonding_surjective"] else "no"
            lines.append(f"{r['level']:>3} {r['n']:>10} {r['Q_order']:>22} {r['D_order']:>14}  {shape_s}  {surj}")
    verdict = report.get("verdict")
    if verdict:
        lines.append(f"verdict: {verdict['label']} (depth {verdict['evidence_depth']}, window {verdict['window']})")
    qa = report.get("qa") or report.get("probes", {}).get("qa")
    if qa:
        if qa["witness"]:
            w = qa["witness"]
            lines.append(f"qa-scan: witness '{w['word']}' fixes U_{w['cylinder_depth']} at level {w['level']}, "
                         f"moves {w['moved_point']} -> {w['moved_to']}")
        else:
            lines.append(f"qa-scan: NoneFound (level {qa['level']}, cylinder {qa['cylinder_depth']}, "
                         f"words <= {qa['word_bound']}, {qa['words_examined']} examined)")
    for name, probe in report.get("probes", {}).items():
        if name != "qa":
            lines.append(f"{name}: {json.dumps(probe, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def render(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return to_json_text(report)
    if fmt == "csv":
        if "table" not in report:
            raise ValueError(f"csv output needs a per-level table; {report['command']} has none")
        return table_csv(report["table"])
    return to_text(report)
