import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from confpoly import cli
from confpoly.knotproxy import loose_confinement_check


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return config, rows[0], rows[1:]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith(cli.ENV_PREFIX):
            monkeypatch.delenv(key)


class TestCurve:
    def test_full_grid(self, capsys):
        code, out, _ = run(["curve", "--r-min", "1.0", "--r-max", "2.0", "--steps", "21",
                            "--method", "quadrature"], capsys)
        assert code == cli.EXIT_OK
        _, header, rows = parse_csv(out)
        assert header == ["r", "kappa_bar", "method", "std_error", "area", "kappa_B", "crofton_residual"]
        assert len(rows) == 22
        assert rows[-1][:2] == ["verdict", "PASS"]
        kb = [float(r[1]) for r in rows[:-1]]
        assert np.all(np.diff(kb) <= 1e-6)

    def test_single_point(self, capsys):
        code, out, _ = run(["curve", "--steps", "1", "--r-min", "2.0", "--r-max", "2.0"], capsys)
        assert code == 0
        _, _, rows = parse_csv(out)
        assert len(rows) == 2
        assert float(rows[0][1]) == pytest.approx(8.0, abs=1e-9)
        assert rows[0][6] == "nan"

    def test_byte_identical(self, tmp_path, capsys):
        path = tmp_path / "curve.csv"
        argv = ["curve", "--steps", "5", "--out", str(path)]
        assert run(argv, capsys)[0] == 0
        first = path.read_bytes()
        assert run(argv, capsys)[0] == 0
        assert path.read_bytes() == first

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(["curve", "--steps", "2", "--r-min", "1.2", "--r-max", "1.3"], capsys)
        _, _, rows = parse_csv(out)
        val = rows[0][1]
        assert float(val) == float(f"{float(val):.17g}")
        assert len(val.replace(".", "").lstrip("0")) >= 16

    def test_monte_carlo(self, capsys):
        code, out, _ = run(["curve", "--steps", "3", "--method", "monte_carlo", "--samples", "20000"], capsys)
        assert code == 0
        _, _, rows = parse_csv(out)
        assert {r[2] for r in rows[:-1]} == {"monte_carlo"}
        assert all(float(r[3]) > 0 for r in rows[:-1])

    def test_json(self, capsys):
        code, out, _ = run(["curve", "--steps", "3", "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["verdict"] == "PASS" and len(doc["rows"]) == 3

    def test_unwritable(self, capsys):
        code, _, err = run(["curve", "--steps", "2", "--out", "/nonexistent/dir/x.csv"], capsys)
        assert code == cli.EXIT_USAGE
        assert "cannot write" in err

    @pytest.mark.parametrize("argv", [
        ["curve", "--r-min", "0.5"],
        ["curve", "--r-min", "1.5", "--r-max", "1.2"],
        ["curve", "--steps", "0"],
        ["curve", "--method", "simpson"],
        ["curve", "--format", "xml"],
        ["curve", "--bogus"],
        ["nope"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert run(argv, capsys)[0] == cli.EXIT_USAGE


class TestBoundary:
    def test_mu(self, capsys):
        code, out, _ = run(["boundary", "--r", "1.1", "--grid-size", "64"], capsys)
        assert code == 0
        _, header, rows = parse_csv(out)
        assert header == ["arc", "param", "mu_B", "mu_I"]
        assert len(rows) == 129
        assert rows[-1][0] == "alpha"
        assert abs(float(rows[-1][1]) - 0.5) < 5e-3

    def test_nu_constant(self, capsys):
        code, out, _ = run(["boundary", "--r", "1.5", "--measures", "nu", "--grid-size", "64"], capsys)
        assert code == 0
        _, header, rows = parse_csv(out)
        assert header == ["arc", "param", "nu_B", "nu_I"]
        assert len({r[2] for r in rows[:-1]}) == 1
        assert rows[-1][0] == "arc_end"
        assert float(rows[-1][1]) == pytest.approx(math.pi)

    def test_regime_error(self, capsys):
        code, _, err = run(["boundary", "--r", "1.6", "--measures", "mu"], capsys)
        assert code == cli.EXIT_USAGE
        assert "sqrt(2)" in err

    def _columns(self, capsys, size):
        _, out, _ = run(["boundary", "--r", "1.2", "--grid-size", str(size)], capsys)
        _, _, rows = parse_csv(out)
        data = [r for r in rows if r[0] in ("ell", "theta")]
        arcs = {}
        for arc, x, b, i in data:
            arcs.setdefault(arc, []).append((float(x), float(b), float(i)))
        return {k: np.array(v) for k, v in arcs.items()}

    def test_grid_doubling(self, capsys):
        coarse, fine = self._columns(capsys, 1025), self._columns(capsys, 2049)
        for arc in ("ell", "theta"):
            c, f = coarse[arc], fine[arc][::2]
            np.testing.assert_array_equal(c[:, 0], f[:, 0])
            assert np.abs(c[:, 1] - f[:, 1]).max() < 1e-6
        assert np.abs(coarse["theta"][:, 2] - fine["theta"][::2, 2]).max() < 1e-6
        # the ell-arc mu_I density has an interior square-root kink, so its
        # trapezoid normalisation converges like h^1.5 rather than h^2
        h = coarse["ell"][1, 0] - coarse["ell"][0, 0]
        assert np.abs(coarse["ell"][:, 2] - fine["ell"][::2, 2]).max() < 10 * h**1.5


class TestVerify:
    def test_alpha_suite(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        code, _, err = run(["verify", "--suite", "alpha", "--out", str(path)], capsys)
        assert code == 0
        doc = json.loads(path.read_text())
        assert doc["passed"] and doc["suite"] == "alpha"
        assert len(doc["checks"]) >= 3
        for c in doc["checks"]:
            assert {"name", "tolerance", "measured", "margin", "passed"} <= set(c)
        assert "PASS" in err

    def test_crofton_suite(self, capsys):
        code, out, _ = run(["verify", "--suite", "crofton", "--samples", "1000"], capsys)
        doc = json.loads(out)
        assert code == 0
        res = [c for c in doc["checks"] if c["name"].startswith("Crofton residual")]
        assert len(res) == 10 and all(c["measured"] <= 1e-3 for c in res)

    def test_unknown_suite(self, capsys):
        assert run(["verify", "--suite", "everything"], capsys)[0] == cli.EXIT_USAGE


class TestSample:
    def test_n4_r2(self, capsys):
        code, out, _ = run(["sample", "--n", "4", "--r", "2", "--samples", "1000"], capsys)
        assert code == 0
        _, header, rows = parse_csv(out)
        assert header == ["index", "ell_3", "theta_3", "curvature", "diameter", "accepted"]
        assert len(rows) == 1000
        assert max(float(r[4]) for r in rows) <= 2 + 1e-9

    def test_same_seed_identical(self, capsys):
        argv = ["sample", "--n", "6", "--r", "1", "--samples", "50", "--seed", "9"]
        first = run(argv, capsys)[1]
        assert run(argv, capsys)[1] == first
        assert run(argv[:-1] + ["10"], capsys)[1] != first

    def test_loose_near_straight(self, capsys):
        code, out, _ = run(["sample", "--n", "6", "--r", "2.95", "--region", "loose",
                            "--samples", "2000", "--seed", "1"], capsys)
        assert code == 0
        _, _, rows = parse_csv(out)
        k = np.array([float(r[-3]) for r in rows])
        # delta from the sqrt(eps) fit, with headroom for a different sample set
        fit = loose_confinement_check(6, samples=5000, seed=0)
        c = max(d / math.sqrt(e) for d, e in zip(fit.max_deviation, fit.epsilons))
        delta = 1.5 * c * math.sqrt(0.05)
        assert np.abs(k - 2 * math.pi).max() <= delta

    def test_exhaustion(self, capsys, monkeypatch):
        import confpoly.moduli as moduli
        monkeypatch.setattr(moduli, "DEFAULT_PROBE_BUDGET", 1000)
        monkeypatch.setattr(cli, "sample_confined",
                            lambda spec, count, seed: moduli.sample_confined(
                                spec, count, seed, chunk=1000, probe_budget=1000))
        code, _, err = run(["sample", "--n", "9", "--r", "1", "--samples", "1"], capsys)
        assert code == cli.EXIT_EXHAUSTED
        assert "region too small" in err

    @pytest.mark.parametrize("argv", [
        ["sample", "--n", "4", "--r", "2.5"],
        ["sample", "--n", "3"],
        ["sample", "--n", "7", "--r", "3.4", "--region", "loose"],
        ["sample", "--samples", "0"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert run(argv, capsys)[0] == cli.EXIT_USAGE


class TestConfig:
    def test_precedence(self, tmp_path, monkeypatch):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"seed": 2, "samples": 30, "steps": 4}))
        monkeypatch.setenv("CONFPOLY_SEED", "3")
        monkeypatch.setenv("CONFPOLY_GRID_SIZE", "32")
        monkeypatch.setenv("CONFPOLY_STEPS", "9")
        c = cli.resolve_config(["sample", "--config", str(cfg), "--samples", "40"])
        assert c.samples == 40      # flag beats file
        assert c.seed == 2          # file beats env
        assert c.grid_size == 32    # env beats default
        assert c.steps == 4

    def test_max_samples_cap(self, monkeypatch):
        monkeypatch.setenv("CONFPOLY_MAX_SAMPLES", "100")
        assert cli.resolve_config(["sample", "--samples", "5000"]).samples == 100

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"sead": 1}))
        assert run(["curve", "--config", str(cfg)], capsys)[0] == cli.EXIT_USAGE
        assert run(["curve", "--config", str(tmp_path / "missing.json")], capsys)[0] == cli.EXIT_USAGE

    def test_bad_env(self, monkeypatch, capsys):
        monkeypatch.setenv("CONFPOLY_SEED", "seven")
        assert run(["curve"], capsys)[0] == cli.EXIT_USAGE

    def test_config_echoed(self, capsys):
        _, out, _ = run(["sample", "--n", "5", "--r", "1.7", "--samples", "3", "--seed", "4"], capsys)
        config, _, _ = parse_csv(out)
        assert config["seed"] == 4 and config["n"] == 5 and config["command"] == "sample"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "confpoly.cli", "boundary", "--r", "1.2",
                           "--grid-size", "16"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].startswith("alpha,")
