import json
import os
import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from ulln_lab.cli import ConfigError, parse_config, run

SRC = Path(__file__).resolve().parents[1] / "src"


def config_path(name: str) -> Path:
    return Path(resources.files("ulln_lab") / "configs" / name)


def load_config(name: str) -> dict:
    return json.loads(config_path(name).read_text())


def write_config(tmp_path: Path, doc: dict, name: str = "cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def cli(*args, env_extra=None):
    env = dict(os.environ, PYTHONPATH=str(SRC))
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "ulln_lab", *args],
                          env=env, capture_output=True, text=True)


class TestParseConfig:
    def test_shipped_flagship_is_valid(self):
        cfg = parse_config(config_path("flagship.json"))
        assert cfg.plan.dist.sigma == 1.0
        assert cfg.plan.h.id == "signlog"
        assert cfg.plan.estimator.id == "median"
        assert cfg.plan.n_grid == (50, 200, 800, 3200)
        assert len(cfg.plan.v_grid) == 21
        assert cfg.plan.replicates == 2000
        assert cfg.audit is True

    def test_shipped_quick_and_reciprocal_are_valid(self):
        parse_config(config_path("quick.json"))
        cfg = parse_config(config_path("reciprocal.json"))
        assert cfg.plan.h.id == "reciprocal"

    def test_missing_endpoint_rejected(self, tmp_path):
        doc = load_config("quick.json")
        doc["v_grid"] = [0.0, 0.25, 0.5]
        with pytest.raises(ConfigError, match="endpoints"):
            parse_config(write_config(tmp_path, doc))

    def test_unknown_estimator_rejected(self, tmp_path):
        doc = load_config("quick.json")
        doc["estimator"] = "bogus"
        with pytest.raises(ConfigError, match="unknown id 'bogus'"):
            parse_config(write_config(tmp_path, doc))

    def test_unknown_key_rejected(self, tmp_path):
        doc = load_config("quick.json")
        doc["gamma"] = 8.0
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(write_config(tmp_path, doc))

    def test_unknown_nested_key_rejected(self, tmp_path):
        doc = load_config("quick.json")
        doc["audit_settings"] = {"mc_replicates": 10, "replicas": 10}
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(write_config(tmp_path, doc))

    def test_too_few_replicates_rejected(self, tmp_path):
        doc = load_config("quick.json")
        doc["replicates"] = 1
        with pytest.raises(ConfigError, match="replicates"):
            parse_config(write_config(tmp_path, doc))

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="malformed"):
            parse_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.json")

    def test_envelope_override(self, tmp_path):
        doc = load_config("quick.json")
        doc["envelope"] = {"gamma": 4.0, "beta0": 5.0}
        cfg = parse_config(write_config(tmp_path, doc))
        assert cfg.plan.h.envelope.gamma == 4.0
        assert cfg.plan.estimator.tail.gamma == 8.0  # estimator bound unchanged


@pytest.fixture(scope="module")
def quick_cfg(tmp_path_factory):
    # trimmed copy of the shipped quick config for fast end-to-end runs
    doc = load_config("quick.json")
    doc["n_grid"] = [10, 30, 90]
    doc["replicates"] = 60
    doc["audit_settings"] = {"mc_replicates": 100, "e2_trials": 10,
                             "e4_replicates": 500, "tail_spot_replicates": 100}
    doc["tailcheck"] = {"n_min": 8, "n_max": 16, "t_min": 8.0, "t_max": 12.0,
                        "t_step": 1.0}
    doc["taylor"] = {"samples": 3, "n": 21, "quad_tol": 1e-8}
    return write_config(tmp_path_factory.mktemp("cfg"), doc, "quick_small.json")


class TestRunCommands:
    def test_simulate_artifacts_and_schema(self, quick_cfg, tmp_path):
        cfg = parse_config(quick_cfg)
        rc = run("simulate", cfg, out_dir=str(tmp_path))
        assert rc == 0
        csv = (tmp_path / "simulate.csv").read_text().splitlines()
        assert csv[0] == "n,v,l1_estimate,l1_se,replicates"
        assert any(",sup," in line for line in csv[1:])
        doc = json.loads((tmp_path / "simulate.json").read_text())
        assert doc["plan"]["master_seed"] == cfg.plan.master_seed
        assert doc["convergence"]["verdict"] in ("decreasing", "not_decreasing")
        assert "lower bound" in doc["note"]
        assert (tmp_path / "simulate.svg").exists()

    def test_audit_artifacts(self, quick_cfg, tmp_path):
        cfg = parse_config(quick_cfg)
        rc = run("audit", cfg, out_dir=str(tmp_path))
        assert rc == 0
        doc = json.loads((tmp_path / "audit.json").read_text())
        ids = [c["id"] for c in doc["conditions"]]
        assert len(ids) == 18
        assert (tmp_path / "audit.txt").read_text().startswith("condition audit")

    def test_tailcheck_and_taylor(self, quick_cfg, tmp_path):
        cfg = parse_config(quick_cfg)
        assert run("tailcheck", cfg, out_dir=str(tmp_path)) == 0
        rows = (tmp_path / "tailcheck.csv").read_text().splitlines()
        assert rows[0] == "n,t,sigma,verdict"
        assert run("taylor", cfg, out_dir=str(tmp_path)) == 0
        doc = json.loads((tmp_path / "taylor.json").read_text())
        assert doc["failed"] == 0

    def test_command_must_be_enabled(self, tmp_path):
        doc = load_config("quick.json")
        doc["commands"] = ["audit"]
        cfg = parse_config(write_config(tmp_path, doc))
        with pytest.raises(ConfigError, match="not enabled"):
            run("simulate", cfg, out_dir=str(tmp_path))


class TestDeterminismViaSubprocess:
    def test_repeat_runs_identical_bytes_across_threads(self, quick_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        r1 = cli("simulate", str(quick_cfg), "--out", str(out1), "--threads", "1")
        r2 = cli("simulate", str(quick_cfg), "--out", str(out2), "--threads", "3")
        assert r1.returncode == 0 and r2.returncode == 0, (r1.stderr, r2.stderr)
        for name in ("simulate.csv", "simulate.json", "simulate.svg"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_audit_repeat_identical(self, quick_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        r1 = cli("audit", str(quick_cfg), "--out", str(out1))
        r2 = cli("audit", str(quick_cfg), "--out", str(out2), "--threads", "2")
        assert r1.returncode == 0 and r2.returncode == 0, (r1.stderr, r2.stderr)
        assert (out1 / "audit.json").read_bytes() == (out2 / "audit.json").read_bytes()

    def test_threads_env_fallback(self, quick_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        r1 = cli("simulate", str(quick_cfg), "--out", str(out1))
        r2 = cli("simulate", str(quick_cfg), "--out", str(out2),
                 env_extra={"ULLN_LAB_THREADS": "2"})
        assert r1.returncode == 0 and r2.returncode == 0
        assert (out1 / "simulate.csv").read_bytes() == (out2 / "simulate.csv").read_bytes()

    def test_seed_override_changes_results(self, quick_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cli("simulate", str(quick_cfg), "--out", str(out1))
        cli("simulate", str(quick_cfg), "--out", str(out2), "--seed", "12345")
        assert (out1 / "simulate.csv").read_bytes() != (out2 / "simulate.csv").read_bytes()
        doc = json.loads((out2 / "simulate.json").read_text())
        assert doc["plan"]["master_seed"] == 12345

    def test_config_error_exit_code(self, tmp_path):
        r = cli("simulate", str(tmp_path / "missing.json"))
        assert r.returncode == 2
        assert "error:" in r.stderr

    def test_reciprocal_audit_exits_nonzero_with_h2_failure(self, tmp_path):
        r = cli("audit", str(config_path("reciprocal.json")), "--out", str(tmp_path))
        assert r.returncode == 1
        doc = json.loads((tmp_path / "audit.json").read_text())
        status = {c["id"]: c["status"] for c in doc["conditions"]}
        assert status["H.2"] == "fail"
        assert status["H.4"] == "fail"
