"""Command-line interface: config schema, exit codes and reproducible outputs."""

import json
import math
import textwrap
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from kirchhoff import cli, outputs
from kirchhoff.energetics import fit_order
from kirchhoff.model import FAIL, Verdict

BASE = """\
domain: {kind: interval, lengths: [3.141592653589793], N: 8}
coefficients:
  sigma: {family: power_affine, sigma0: 1.0, sigma1: 1.0, beta: 1.0}
  phi: {family: power_affine, phi0: 0.5, phi1: 1.0, alpha: 1.0}
  f: {family: cubic_minus_linear, a: 1.0, b: 1.0}
stepper: {dt: 0.01}
run: {T: 1.0, stride: 10, seed: 3}
initial:
  u: {1: 1.0, 3: 0.3}
  v: {2: 0.5}
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return str(p)


def run(tmp_path, *args, out="out"):
    return cli.main([*args, "-o", str(tmp_path / out)])


class TestConfig:
    def test_unknown_key_reports_line(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE + "run2: {T: 1}\n")
        assert run(tmp_path, "check", cfg) == 4
        err = capsys.readouterr().err
        assert "line 11" in err and "run2" in err

    def test_misspelled_nested_key(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE.replace("stride: 10", "strid: 10"))
        assert run(tmp_path, "simulate", cfg) == 4
        assert "line 7" in capsys.readouterr().err

    def test_unknown_family_parameter(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE.replace("beta: 1.0", "betta: 1.0"))
        assert run(tmp_path, "check", cfg) == 4
        assert "betta" in capsys.readouterr().err

    def test_syntax_error(self, tmp_path, capsys):
        cfg = write(tmp_path, "domain: {N: 4\n")
        assert run(tmp_path, "check", cfg) == 4
        assert "line" in capsys.readouterr().err

    def test_missing_block(self, tmp_path):
        assert run(tmp_path, "check", write(tmp_path, "domain: {N: 4}\n")) == 4

    def test_bad_value(self, tmp_path):
        assert run(tmp_path, "simulate", write(tmp_path, BASE.replace("dt: 0.01", "dt: -1"))) == 4

    def test_missing_file(self, tmp_path):
        assert cli.main(["check", str(tmp_path / "nope.yaml")]) == 4

    def test_defaults(self, tmp_path):
        cfg = cli.load_config(write(tmp_path, BASE))
        assert cfg.stepper.newton_tol == 1e-11 and cfg.domain.lambda1 == pytest.approx(1.0)
        assert len(cfg.sha256) == 64


class TestCommands:
    def test_check_admissible(self, tmp_path):
        cfg = write(tmp_path, BASE.replace("phi0: 0.5", "phi0: 1.0"))
        assert run(tmp_path, "check", cfg) == 0
        data = json.loads((tmp_path / "out" / "check.json").read_text())
        assert data["assumptions"]["verdicts"]["A:dis"]["status"] == "pass"

    def test_check_rejects_out_of_range_family(self, tmp_path):
        text = BASE.replace("{family: power_affine, sigma0: 1.0, sigma1: 1.0, beta: 1.0}", "{family: constant, sigma0: -1}")
        assert run(tmp_path, "check", write(tmp_path, text)) == 4

    def test_check_refuses_failed_well_posedness(self, tmp_path, monkeypatch):
        # built-in families satisfy A1 by construction, so flip a verdict in the report
        real = cli.check_assumptions

        def broken(*args, **kwargs):
            rep = real(*args, **kwargs)
            rep.verdicts["A1(i)"] = Verdict(FAIL, 1.0, "forced")
            return rep

        monkeypatch.setattr(cli, "check_assumptions", broken)
        cfg = write(tmp_path, BASE)
        assert run(tmp_path, "check", cfg) == 2
        assert (tmp_path / "out" / "check.json").exists()
        assert run(tmp_path, "simulate", cfg, out="sim") == 2
        assert not (tmp_path / "sim" / "ledger.csv").exists()

    def test_simulate_outputs(self, tmp_path):
        cfg = write(tmp_path, BASE.replace("seed: 3", "seed: 3, plots: true"))
        assert run(tmp_path, "simulate", cfg) == 0
        out = tmp_path / "out"
        names = {p.name for p in out.iterdir()}
        assert {"trajectory.csv", "ledger.csv", "summary.json", "energy.svg", "residual.svg", "timing.json"} <= names
        assert not any(n.startswith(".") for n in names)
        meta, header, data = outputs.read_csv(out / "ledger.csv")
        assert header == ["t", "E", "gradnorm2", "kinetic2", "D", "residual"]
        assert len(data) == 101 and data[0, 5] == 0.0
        sha = cli.load_config(cfg).sha256
        assert meta["config_sha256"] == sha
        assert outputs.read_csv(out / "trajectory.csv")[0]["config_sha256"] == sha
        assert json.loads((out / "summary.json").read_text())["config_sha256"] == sha
        for name in ("energy.svg", "residual.svg"):
            svg = (out / name).read_text()
            assert svg.startswith("<svg") and f"config_sha256: {sha}" in svg
            ET.fromstring(svg)
        assert json.loads((out / "timing.json").read_text())["config_sha256"] == sha

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write(tmp_path, BASE)
        assert run(tmp_path, "simulate", cfg, out="a") == 0
        assert run(tmp_path, "simulate", cfg, out="b") == 0
        for name in ("trajectory.csv", "ledger.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(tmp_path / "envout"))
        assert cli.main(["check", write(tmp_path, BASE)]) == 0
        assert (tmp_path / "envout" / "check.json").exists()

    def test_numerical_failure(self, tmp_path):
        text = BASE.replace("dt: 0.01", "dt: 0.5, newton_max_iters: 1, max_halvings: 0").replace("T: 1.0", "T: 1.0")
        text = text.replace("u: {1: 1.0, 3: 0.3}", "u: {1: 3.0}").replace("v: {2: 0.5}", "v: {1: 5.0}")
        assert run(tmp_path, "simulate", write(tmp_path, text)) == 3

    def test_gate_refusal(self, tmp_path, capsys):
        text = BASE.replace("{family: power_affine, phi0: 0.5, phi1: 1.0, alpha: 1.0}", "{family: constant, phi0: -1}")
        text = text.replace("{family: cubic_minus_linear, a: 1.0, b: 1.0}", "{family: zero}")
        assert run(tmp_path, "probe", "absorbing", write(tmp_path, text)) == 2
        assert "A:dis" in capsys.readouterr().err

    def test_equilibria(self, tmp_path):
        assert run(tmp_path, "equilibria", write(tmp_path, BASE)) == 0
        data = json.loads((tmp_path / "out" / "equilibria.json").read_text())
        assert len(data["equilibria"]) == 3

    def test_probe_determining_defect(self, tmp_path):
        text = BASE + "probe:\n  determining: {n_low: 3, pairs: 1}\n"
        assert run(tmp_path, "probe", "determining", write(tmp_path, text.replace("T: 1.0", "T: 2.0"))) == 0
        rep = json.loads((tmp_path / "out" / "probe_determining.json").read_text())
        assert rep["constants"]["epsilon_L"] == 0.25
        assert rep["series"] == "probe_determining_series.csv"
        assert (tmp_path / "out" / rep["series"]).exists()

    def test_probe_splitting(self, tmp_path):
        assert run(tmp_path, "probe", "splitting", write(tmp_path, BASE.replace("T: 1.0", "T: 4.0"))) == 0
        rep = json.loads((tmp_path / "out" / "probe_splitting.json").read_text())
        assert rep["status"] == "pass"

    def test_oracle_compare(self, tmp_path):
        text = BASE + "oracle: {fd_nodes: 64}\n"
        assert run(tmp_path, "oracle-compare", write(tmp_path, text.replace("T: 1.0", "T: 0.2"))) == 0
        data = json.loads((tmp_path / "out" / "oracle_compare.json").read_text())
        assert {"gap", "spectral_self_convergence", "fd_self_convergence"} <= set(data)

    def test_oracle_compare_rejects_rectangle(self, tmp_path):
        text = BASE.replace("kind: interval, lengths: [3.141592653589793], N: 8", "kind: rectangle, N: 3")
        text = text.replace("u: {1: 1.0, 3: 0.3}", "u: {1: 1.0}")
        assert run(tmp_path, "oracle-compare", write(tmp_path, text)) == 4

    def test_sweep_dt_convergence(self, tmp_path):
        text = BASE.replace("T: 1.0", "T: 5.0") + "sweep: {parameter: stepper.dt, values: [0.01, 0.005, 0.0025], workers: 3}\n"
        assert run(tmp_path, "sweep", write(tmp_path, text)) == 0
        out = tmp_path / "out"
        res = []
        for i, dt in enumerate((0.01, 0.005, 0.0025)):
            _, _, data = outputs.read_csv(out / f"run_{i:03d}" / "ledger.csv")
            res.append(abs(data[-1, 5]))
        assert fit_order([0.01, 0.005, 0.0025], res) >= 1.9
        _, header, agg = outputs.read_csv(out / "aggregate.csv")
        assert header[1] == "stepper.dt" and list(agg[:, 2]) == [0, 0, 0]


class TestOutputs:
    def test_float_round_trip(self):
        for x in (math.pi, 1e-300, -2.5e17, 0.1 + 0.2):
            assert float(outputs.fmt(x)) == x
        assert outputs.fmt(float("nan")) == "nan"

    def test_csv_round_trip(self, tmp_path):
        rows = np.random.default_rng(0).normal(size=(5, 3))
        outputs.write_csv(tmp_path / "x.csv", ["a", "b", "c"], rows.tolist(), {"config_sha256": "abc"})
        meta, header, data = outputs.read_csv(tmp_path / "x.csv")
        assert meta == {"config_sha256": "abc"} and header == ["a", "b", "c"]
        assert np.array_equal(data, rows)

    def test_atomic_write_replaces(self, tmp_path):
        outputs.atomic_write(tmp_path / "f.txt", "one")
        outputs.atomic_write(tmp_path / "f.txt", "two")
        assert (tmp_path / "f.txt").read_text() == "two"
        assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]

    def test_svg_empty_and_log(self):
        assert "<polyline" in outputs.svg_line_chart({"y": ([0, 1, 2], [1e-3, 1e-2, 0.0])}, logy=True)
        assert outputs.svg_line_chart({}).endswith("</svg>\n")

    def test_svg_escapes_labels(self):
        svg = outputs.svg_line_chart({"a < b & c": ([0, 1], [0, 1])}, "x<y", meta={"k": "<v>"})
        root = ET.fromstring(svg)
        assert "a < b & c" in [el.text for el in root.iter() if el.text]
