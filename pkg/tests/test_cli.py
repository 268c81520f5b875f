import json
import subprocess
import sys
from pathlib import Path

import pytest

from renormlab import report as rep
from renormlab.cli import main
from renormlab.config import load_config, parse_config
from renormlab.errors import ConfigInvalid

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_shipped_configs_parse():
    names = sorted(p.stem for p in CONFIGS.glob("*.json"))
    assert {"heisenberg", "lattice", "affine-unit", "odometer", "grigorchuk"} <= set(names)
    for path in CONFIGS.glob("*.json"):
        cfg = load_config(path)
        assert cfg.max_level >= cfg.effective_window + 1


@pytest.mark.parametrize("data", [
    {"backend": "quaternion"},
    {"backend": "heisenberg", "params": {"p": 0}},
    {"backend": "heisenberg", "colour": 1},
    {"backend": "heisenberg", "max_level": -1},
    {"backend": "heisenberg", "max_level": 2, "window": 2},
    {"backend": "heisenberg", "chain": "vertex_stabilizer"},
    {"backend": "grigorchuk", "chain": "renormalization"},
    {"backend": "grigorchuk", "contracting": {}},
    {"backend": "heisenberg", "self_replicating": {}},
    {"backend": "heisenberg", "qa": {"level": 2, "cylinder_depth": 2}},
    {"backend": "affine-unit", "contracting": {"elements": [[1, 3, 0, 0]]}},
    {"backend": "lattice", "outputs": ["xml"]},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigInvalid):
        parse_config(data)


def test_analyze_heisenberg_table():
    cfg = parse_config({"backend": "heisenberg", "max_level": 3})
    report = rep.run_analyze(cfg)
    row = report["table"][3]
    assert (row["n"], row["Q_order"], row["D_order"], row["D_shape"]) == (46656, 10077696, 216, [216])
    assert report["format"] == "renormlab-report" and report["version"] == 1
    assert report["config"]["backend"] == "heisenberg"
    assert report["verdict"]["kind"] == "Growing"


def test_analyze_affine_discriminant_column():
    report = rep.run_analyze(parse_config({"backend": "affine-unit", "max_level": 6}))
    assert [r["D_order"] for r in report["table"][1:]] == [1, 2, 4, 8, 16, 32]


def test_json_round_trip_and_determinism(tmp_path):
    cfg = parse_config({"backend": "lattice", "max_level": 3, "kernel": {"level": 3, "word_bound": 2},
                        "cache_dir": str(tmp_path)})
    first = rep.run_analyze(cfg)
    second = rep.run_analyze(cfg)
    assert not first["runtime"]["cache_hit"] and second["runtime"]["cache_hit"]
    a = rep.to_json_text(rep.strip_runtime(first))
    b = rep.to_json_text(rep.strip_runtime(second))
    assert a == b
    assert json.loads(rep.to_json_text(first)) == first


def test_csv_rows_equal_table():
    report = rep.run_tower(parse_config({"backend": "heisenberg", "params": {"p": 2, "q": 2}, "max_level": 3}))
    assert rep.read_table_csv(rep.table_csv(report["table"])) == report["table"]
    report = rep.run_tower(parse_config({"backend": "grigorchuk", "max_level": 4}))
    assert rep.read_table_csv(rep.table_csv(report["table"])) == report["table"]


def test_cli_tower_cache_hit(tmp_path, capsys):
    args = ["tower", "--preset", "heisenberg", "--depth", "2", "--cache-dir", str(tmp_path)]
    code, out, _ = run(capsys, *args)
    assert code == 0 and not json.loads(out)["runtime"]["cache_hit"]
    code, out2, _ = run(capsys, *args)
    assert code == 0 and json.loads(out2)["runtime"]["cache_hit"]
    strip = lambda s: rep.strip_runtime(json.loads(s))
    assert strip(out) == strip(out2)
    assert len(list(tmp_path.glob("*.json"))) == 1


def test_cli_csv_and_out(tmp_path, capsys):
    out_path = tmp_path / "sub" / "table.csv"
    code, out, _ = run(capsys, "tower", "--preset", "lattice", "--depth", "2", "--format", "csv", "--out", str(out_path))
    assert code == 0 and out == ""
    rows = rep.read_table_csv(out_path.read_text())
    assert [r["n"] for r in rows] == [1, 8, 64]


def test_cli_text_report(capsys):
    code, out, _ = run(capsys, "analyze", "--preset", "heisenberg", "--param", "q=2", "--depth", "4", "--window", "2",
                       "--format", "text")
    assert code == 0 and "verdict: TrivialInLimit" in out


def test_cli_qa_scan_grigorchuk(capsys):
    code, out, _ = run(capsys, "qa-scan", "--preset", "grigorchuk", "--depth", "6", "--level", "6", "--word-bound", "12")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["chain"] == "vertex_stabilizer"
    witness = report["qa"]["witness"]
    assert witness["certificate_valid"] and witness["level"] == 6 and witness["cylinder_depth"] == 1


def test_cli_tree_export_builds_deeper_levels(tmp_path, capsys):
    run(capsys, "tower", "--preset", "odometer", "--depth", "1", "--cache-dir", str(tmp_path))
    code, out, _ = run(capsys, "tree-export", "--preset", "odometer", "--depth", "3", "--cache-dir", str(tmp_path))
    assert code == 0
    assert out.count("->") == 14
    code, out, _ = run(capsys, "tree-export", "--preset", "heisenberg", "--depth", "1")
    assert out.count("[label=") == 37


def test_cli_exit_codes(tmp_path, capsys):
    assert run(capsys, "tower", "--preset", "heisenberg", "--param", "p=1")[0] == 2
    assert run(capsys, "tower")[0] == 2
    assert run(capsys, "tower", "--config", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "qa-scan", "--preset", "heisenberg", "--depth", "2", "--format", "csv")[0] == 2
    code, _, err = run(capsys, "tower", "--preset", "heisenberg", "--depth", "3", "--max-index", "500")
    assert code == 3 and "IndexBudgetExceeded" in err
    # corrupt the cache
    run(capsys, "tower", "--preset", "lattice", "--depth", "2", "--cache-dir", str(tmp_path))
    cache = next(tmp_path.glob("lattice-*.json"))
    raw = bytearray(cache.read_bytes())
    i = raw.index(b'"generator_perms"') + 25
    raw[i] = ord("7") if raw[i] != ord("7") else ord("6")
    cache.write_bytes(bytes(raw))
    code, _, err = run(capsys, "tower", "--preset", "lattice", "--depth", "2", "--cache-dir", str(tmp_path))
    assert code == 4 and "CacheVersionMismatch" in err


def test_cli_config_file_and_overrides(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", "--config", str(CONFIGS / "lattice.json"), "--window", "2")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["max_level"] == 4 and report["config"]["window"] == 2
    assert report["verdict"]["label"] == "FiniteStable(3)"
    assert [w["word"] for w in report["probes"]["kernel"]["words"]] == ["h1", "h1^-1"]
    # probe levels beyond a lowered depth are a config error
    assert run(capsys, "analyze", "--config", str(CONFIGS / "lattice.json"), "--depth", "3")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "renormlab", "tower", "--preset", "odometer", "--depth", "2",
                           "--format", "csv"], capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "level,n,Q_order,D_order,D_shape,bonding_surjective"
