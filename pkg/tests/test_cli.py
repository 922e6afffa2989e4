from __future__ import annotations

import json
import math

import pytest

from shadowqae.cli import (
    BINS_HEADER,
    ESTIMATES_HEADER,
    MSCALING_HEADER,
    SWEEP_HEADER,
    CliConfig,
    ConfigError,
    build_parser,
    main,
    make_cli_config,
    parse_float,
)

SMALL = ["--set", "n=3", "--set", "N=100", "--set", "M=64", "--set", "K=5"]


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def strip_timing(path):
    doc = json.loads(path.read_text())
    doc.pop("timing")
    return doc


class TestParsing:
    def test_pi_tokens(self):
        assert parse_float("pi/2") == pytest.approx(math.pi / 2)
        assert parse_float("0.25pi") == pytest.approx(math.pi / 4)
        assert parse_float("3*pi/8") == pytest.approx(3 * math.pi / 8)
        assert parse_float("0.5") == 0.5
        with pytest.raises(ConfigError):
            parse_float("half")

    def test_unknown_key(self, tmp_path):
        code, _ = run(tmp_path, "run", "--set", "bogus=1")
        assert code == 2

    def test_wrong_section(self, tmp_path):
        code, _ = run(tmp_path, "run", "--set", "noise.n=3")
        assert code == 2

    def test_bad_value(self, tmp_path):
        assert run(tmp_path, "run", "--set", "N=ten")[0] == 2

    def test_usage_error(self, tmp_path):
        assert main(["frobnicate"]) == 2
        assert main(["run", "--workers", "x"]) == 2

    def test_config_file(self, tmp_path):
        ini = tmp_path / "c.ini"
        ini.write_text("[protocol]\nn = 3\nN = 100\nM = 64\nK = 5\n\n[noise]\nmodel = twirl\nparam = pi/4\n")
        code, out = run(tmp_path, "run", "--config", str(ini), "--set", "protocol.N=80")
        assert code == 0
        doc = json.loads((out / "run.json").read_text())
        assert doc["config"]["settings"]["protocol"]["N"] == "80"
        assert doc["result"]["protocol"]["noise"] == {"model": "twirl", "param": pytest.approx(math.pi / 4)}

    def test_bad_config_file(self, tmp_path):
        ini = tmp_path / "c.ini"
        ini.write_text("[extras]\nfoo = 1\n")
        assert run(tmp_path, "run", "--config", str(ini))[0] == 2
        assert run(tmp_path, "run", "--config", str(tmp_path / "missing.ini"))[0] == 2

    def test_echo_roundtrip(self):
        args = build_parser().parse_args(["sweep", *SMALL, "--set", "grid=0,0.5", "--seed", "17"])
        cfg = make_cli_config(args)
        echo = json.loads(json.dumps(cfg.echo()))
        again = CliConfig.from_echo(echo)
        assert again.echo() == cfg.echo()
        assert all(again.value(k) == cfg.value(k) for k in ("n", "N", "grid", "model", "param"))


class TestRun:
    def test_smoke(self, tmp_path):
        code, out = run(tmp_path, "run", *SMALL, "--set", "P=1")
        assert code == 0
        doc = json.loads((out / "run.json").read_text())
        assert list(doc) == ["command", "config", "result", "timing"]
        assert "estimate" in doc["result"]

    def test_deterministic(self, tmp_path):
        _, a = run(tmp_path, "run", *SMALL, name="a")
        _, b = run(tmp_path, "run", *SMALL, "--workers", "3", name="b")
        assert strip_timing(a / "run.json") == strip_timing(b / "run.json")

    def test_power_of_two_message(self, tmp_path, capsys):
        code, _ = run(tmp_path, "run", "--set", "M=100")
        assert code == 2
        assert "power of two" in capsys.readouterr().err


class TestSweep:
    def test_pauli_grid(self, tmp_path):
        code, out = run(tmp_path, "sweep", *SMALL, "--set", "repetitions=4", "--set", "n=9")
        assert code == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == ",".join(SWEEP_HEADER) == "param,true_fidelity,est_mean,est_std,reps"
        assert len(lines) == 6

    def test_twirl_svg(self, tmp_path):
        code, out = run(tmp_path, "sweep", *SMALL, "--set", "model=twirl", "--set", "repetitions=3",
                        "--set", "grid=0,pi/4,pi/2", "--svg")
        assert code == 0
        assert (out / "sweep.svg").read_text().startswith("<svg")
        assert len((out / "sweep.csv").read_text().splitlines()) == 4

    def test_empty_grid(self, tmp_path):
        assert run(tmp_path, "sweep", *SMALL, "--set", "grid=")[0] == 2

    def test_workers_byte_identical(self, tmp_path):
        args = ["sweep", *SMALL, "--set", "repetitions=6", "--set", "grid=0.1,0.6", "--svg"]
        run(tmp_path, *args, "--workers", "1", name="w1")
        run(tmp_path, *args, "--workers", "4", name="w4")
        for f in ("sweep.csv", "sweep.svg"):
            assert (tmp_path / "w1" / f).read_bytes() == (tmp_path / "w4" / f).read_bytes()


class TestMscaling:
    def test_single_n(self, tmp_path):
        assert run(tmp_path, "mscaling", "--set", "n_values=4")[0] == 2

    def test_bad_grid(self, tmp_path):
        assert run(tmp_path, "mscaling", "--set", "M_grid=4,12,16")[0] == 2

    def test_exact_mode_degenerate(self, tmp_path):
        code, out = run(tmp_path, "mscaling", "--set", "amplitude_mode=exact", "--set", "n_values=4,5,6",
                        "--set", "repetitions=40", "--set", "M_grid=4,8,16", "--svg")
        assert code == 0
        doc = json.loads((out / "mscaling.json").read_text())
        assert doc["result"]["degenerate"] is True
        assert doc["result"]["beta"] == pytest.approx(0.0, abs=1e-12)
        lines = (out / "mscaling.csv").read_text().splitlines()
        assert lines[0] == ",".join(MSCALING_HEADER) == "n,d,M_selected"
        assert lines[1:] == ["4,16,4", "5,32,4", "6,64,4"]
        assert (out / "mscaling.svg").exists()

    def test_fit_impossible(self, tmp_path):
        # far too few repetitions for any M to land inside the strip
        code, out = run(tmp_path, "mscaling", "--set", "n_values=3,4,5", "--set", "repetitions=2",
                        "--set", "N=20", "--set", "M_grid=4,8", "--set", "error_bar=std")
        assert code == 1
        doc = json.loads((out / "mscaling.json").read_text())
        assert doc["result"]["beta"] is None and doc["result"]["unresolved"]


class TestHistogram:
    def test_outputs(self, tmp_path):
        code, out = run(tmp_path, "histogram", *SMALL, "--set", "bins=10", "--svg")
        assert code == 0
        est = (out / "histogram_estimates.csv").read_text().splitlines()
        assert est[0] == ",".join(ESTIMATES_HEADER) and len(est) == 101
        bins = (out / "histogram_bins.csv").read_text().splitlines()
        assert bins[0] == ",".join(BINS_HEADER) and len(bins) == 11
        assert sum(int(r.split(",")[2]) for r in bins[1:]) == 100
        doc = json.loads((out / "histogram.json").read_text())
        assert set(doc["result"]["gaussian_fit"]) == {"center", "width"}
        assert (out / "histogram.svg").exists()

    def test_too_few_reps(self, tmp_path):
        assert run(tmp_path, "histogram", *SMALL, "--set", "repetitions=10")[0] == 2


class TestBounds:
    def test_feasible(self, tmp_path, capsys):
        code, out = run(tmp_path, "bounds", "--epsilon", "0.05", "--delta", "0.2")
        assert code == 0
        assert "single-run plan (feasible)" in capsys.readouterr().out
        doc = json.loads((out / "bounds.json").read_text())
        assert doc["result"]["single_run"]["K_min"] == 72

    def test_infeasible_and_rejected(self, tmp_path, capsys):
        code, out = run(tmp_path, "bounds", "--epsilon", "0.2", "--delta", "0.5")
        assert code == 0
        text = capsys.readouterr().out
        assert "infeasible" in text and "rejected" in text
        assert json.loads((out / "bounds.json").read_text())["result"]["median_of_means"] is None

    def test_corollary(self, tmp_path):
        code, out = run(tmp_path, "bounds", "--epsilon", "0.1", "--delta", "0.05")
        plan = json.loads((out / "bounds.json").read_text())["result"]["median_of_means"]
        assert (plan["P"], plan["N"], plan["K"]) == (54, 7200, 59)

    def test_out_of_domain(self, tmp_path):
        assert run(tmp_path, "bounds", "--epsilon", "1.5", "--delta", "0.05")[0] == 2
