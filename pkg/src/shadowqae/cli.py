"""Command-line front end.

Usage::

    shadowqae run       [--config FILE] [--set key=value ...] [--out DIR] [--seed S] [--workers W]
    shadowqae sweep     ... [--svg]
    shadowqae mscaling  ... [--svg]
    shadowqae histogram ... [--svg]
    shadowqae bounds    [--epsilon E] [--delta D] [--n N]

Config files are INI with ``[protocol]``, ``[noise]`` and ``[experiment]``
sections; ``--set`` takes either a bare key or ``section.key``. Unknown keys
are rejected. Exit codes: 0 success, 1 runtime error, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from shadowqae import bounds, svgplot
from shadowqae.noise import CliffordTwirl, PauliZGlobal, true_fidelity
from shadowqae.protocol import (
    DEFAULT_SEED,
    ProtocolConfig,
    derive_seed,
    m_scaling_experiment,
    run_ensemble,
    run_protocol,
)

SWEEP_HEADER = ("param", "true_fidelity", "est_mean", "est_std", "reps")
MSCALING_HEADER = ("n", "d", "M_selected")
ESTIMATES_HEADER = ("repetition", "estimate")
BINS_HEADER = ("bin_left", "bin_right", "count", "density")
MIN_HISTOGRAM_REPS = 100
SUBCOMMANDS = ("run", "sweep", "mscaling", "bounds", "histogram")


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


_PI_TOKEN = re.compile(r"^([0-9.eE+-]*)\*?pi(?:/([0-9.eE+-]+))?$")


def parse_float(text: str) -> float:
    """Float, also accepting ``pi``, ``pi/2``, ``0.25pi`` and ``3*pi/8``."""
    s = text.strip().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI_TOKEN.match(s)
    if not m:
        raise ConfigError(f"not a number: {text!r}")
    coeff = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
    denom = float(m.group(2)) if m.group(2) else 1.0
    return coeff * math.pi / denom


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


def _list(item: Callable[[str], Any]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        parts = [t for t in re.split(r"[,\s]+", text.strip()) if t]
        return [item(t) for t in parts]
    return parse


def _str(text: str) -> str:
    return text.strip()


# key -> (section, parser, default); defaults are strings so they parse like user input
SCHEMA: dict[str, tuple[str, Callable[[str], Any], str]] = {
    "n": ("protocol", _int, "9"),
    "N": ("protocol", _int, "1000"),
    "M": ("protocol", _int, "512"),
    "K": ("protocol", _int, "10"),
    "P": ("protocol", _int, "1"),
    "amplitude_mode": ("protocol", _str, "qae"),
    "aggregation": ("protocol", _str, "median-of-means"),
    "mass_floor": ("protocol", parse_float, "0.999"),
    "model": ("noise", _str, "pauli_z"),
    "param": ("noise", parse_float, "0"),
    "repetitions": ("experiment", _int, "100"),
    "grid": ("experiment", _list(parse_float), ""),
    "n_values": ("experiment", _list(_int), "4,5,6,7,8,9"),
    "M_grid": ("experiment", _list(_int), "4,8,16,32,64,128,256,512,1024,2048,4096"),
    "accuracy": ("experiment", parse_float, "0.02"),
    "error_bar": ("experiment", _str, "sem"),
    "p": ("experiment", parse_float, "0.1"),
    "bins": ("experiment", _int, "40"),
    "epsilon": ("experiment", parse_float, "0.1"),
    "delta": ("experiment", parse_float, "0.05"),
}
SECTIONS = ("protocol", "noise", "experiment")
NOISE_MODELS = ("pauli_z", "twirl")


def _resolve_key(key: str) -> str:
    if "." in key:
        section, name = key.split(".", 1)
        if name not in SCHEMA or SCHEMA[name][0] != section:
            raise ConfigError(f"unknown config key: {key!r}")
        return name
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key: {key!r}")
    return key


@dataclass
class CliConfig:
    """Everything a subcommand needs. ``settings`` holds raw strings keyed by schema name."""

    subcommand: str
    config_path: str | None = None
    overrides: dict[str, str] = field(default_factory=dict)
    out_dir: str = "results"
    seed: int = DEFAULT_SEED
    workers: int = 1
    svg: bool = False
    settings: dict[str, str] = field(default_factory=dict)

    def value(self, key: str) -> Any:
        section, parse, default = SCHEMA[key]
        raw = self.settings.get(key, default)
        return parse(raw)

    def echo(self) -> dict:
        """Config echo for result files. Worker count and paths are left out on purpose."""
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "settings": {
                section: {k: self.settings.get(k, SCHEMA[k][2]) for k in SCHEMA if SCHEMA[k][0] == section}
                for section in SECTIONS
            },
        }

    @classmethod
    def from_echo(cls, echo: dict) -> "CliConfig":
        settings = {}
        for section, values in echo["settings"].items():
            for k, v in values.items():
                if _resolve_key(f"{section}.{k}") != k:
                    raise ConfigError(f"bad echo key {section}.{k}")
                settings[k] = v
        return cls(subcommand=echo["subcommand"], seed=int(echo["seed"]), settings=settings)


def load_settings(config_path: str | None, overrides: dict[str, str]) -> dict[str, str]:
    settings: dict[str, str] = {}
    if config_path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(config_path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown config section: [{section}]")
            for key, raw in parser.items(section):
                settings[_resolve_key(f"{section}.{key}")] = raw
    for key, raw in overrides.items():
        settings[_resolve_key(key)] = raw
    return settings


def parse_overrides(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def noise_model(cfg: CliConfig, n: int, param: float | None = None):
    model = cfg.value("model")
    value = cfg.value("param") if param is None else param
    if model == "pauli_z":
        return PauliZGlobal(n, value)
    if model == "twirl":
        return CliffordTwirl(n, value)
    raise ConfigError(f"noise model must be one of {NOISE_MODELS}, got {model!r}")


def protocol_config(cfg: CliConfig, param: float | None = None, seed: int | None = None) -> ProtocolConfig:
    n = cfg.value("n")
    try:
        return ProtocolConfig(
            n=n, N=cfg.value("N"), M=cfg.value("M"), K=cfg.value("K"), P=cfg.value("P"),
            noise=noise_model(cfg, n, param),
            amplitude_mode=cfg.value("amplitude_mode"),
            aggregation=cfg.value("aggregation"),
            master_seed=cfg.seed if seed is None else seed,
            mass_floor=cfg.value("mass_floor"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- output helpers

def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _document(cfg: CliConfig, result: dict, started: float) -> dict:
    return {
        "command": cfg.subcommand,
        "config": cfg.echo(),
        "result": result,
        "timing": {"seconds": round(time.perf_counter() - started, 6)},
    }


# ---------------------------------------------------------------- subcommands

def cmd_run(cfg: CliConfig, out: Path) -> int:
    started = time.perf_counter()
    pc = protocol_config(cfg)
    est = run_protocol(pc)
    result = {
        "estimate": est.estimate,
        "runs": est.runs,
        "true_fidelity": true_fidelity(pc.noise),
        "protocol": pc.as_dict(),
    }
    _write(out, "run.json", _dumps(_document(cfg, result, started)))
    print(f"estimate {est.estimate:.6f} (true fidelity {result['true_fidelity']:.6f})")
    return 0


def _default_grid(model: str) -> list[float]:
    if model == "twirl":
        return [k * math.pi / 16 for k in range(9)]
    return [0.0, 0.25, 0.5, 0.75, 1.0]


def cmd_sweep(cfg: CliConfig, out: Path) -> int:
    started = time.perf_counter()
    model = cfg.value("model")
    grid = cfg.value("grid") if "grid" in cfg.settings else _default_grid(model)
    if not grid:
        raise ConfigError("sweep grid is empty")
    reps = cfg.value("repetitions")
    if reps < 2:
        raise ConfigError("repetitions must be >= 2")
    configs = [protocol_config(cfg, param=v, seed=derive_seed(cfg.seed, i)) for i, v in enumerate(grid)]
    rows = []
    for v, pc in zip(grid, configs):
        ens = run_ensemble(pc, reps, workers=cfg.workers)
        rows.append((float(v), ens.true_fidelity, ens.mean, ens.std, reps))
    _write(out, "sweep.csv", _csv_text(SWEEP_HEADER, rows))
    result = {"variable": "theta" if model == "twirl" else "p",
              "rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]}
    _write(out, "sweep.json", _dumps(_document(cfg, result, started)))
    if cfg.svg:
        xlabel = "theta" if model == "twirl" else "p"
        _write(out, "sweep.svg", svgplot.sweep_chart(
            [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], [r[3] for r in rows], xlabel))
    for r in rows:
        print(f"{r[0]:.6g}\ttrue {r[1]:.4f}\tmean {r[2]:.4f}\tstd {r[3]:.4f}")
    return 0


def cmd_mscaling(cfg: CliConfig, out: Path) -> int:
    started = time.perf_counter()
    n_values = cfg.value("n_values")
    if len(n_values) < 3:
        raise ConfigError("mscaling needs at least 3 values of n for the power-law fit")
    grid = cfg.value("M_grid")
    mode = cfg.value("amplitude_mode")
    error_bar = cfg.value("error_bar")
    if error_bar not in ("std", "sem"):
        raise ConfigError("error_bar must be 'std' or 'sem'")
    try:
        for M in grid:
            if M < 2 or M & (M - 1):
                raise ConfigError(f"M_grid values must be powers of two >= 2, got {M}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("M_grid must be strictly ascending")
    except TypeError:
        raise ConfigError("M_grid must be a list of integers") from None
    res = m_scaling_experiment(
        n_values, accuracy=cfg.value("accuracy"), N=cfg.value("N"), K=cfg.value("K"),
        M_grid=grid, repetitions=cfg.value("repetitions"), p=cfg.value("p"),
        error_bar=error_bar, amplitude_mode=mode, master_seed=cfg.seed, workers=cfg.workers,
    )
    rows = [(n, 2 ** n, res.selected_M[n]) for n in res.resolved]
    _write(out, "mscaling.csv", _csv_text(MSCALING_HEADER, rows))
    degenerate = bool(res.resolved) and all(res.selected_M[n] == grid[0] for n in res.resolved)
    result = {
        "alpha": res.alpha,
        "beta": res.beta,
        "degenerate": degenerate,
        "selected_M": {str(n): res.selected_M[n] for n in res.n_values},
        "unresolved": [n for n in res.n_values if res.selected_M[n] is None],
        "criterion": res.criterion,
        "M_grid": res.M_grid,
        "true_fidelity": {str(n): res.true_fidelity[n] for n in res.n_values},
        "means": {str(n): res.means[n] for n in res.n_values},
        "stds": {str(n): res.stds[n] for n in res.n_values},
    }
    _write(out, "mscaling.json", _dumps(_document(cfg, result, started)))
    if cfg.svg:
        _write(out, "mscaling.svg", svgplot.scaling_chart(
            [r[1] for r in rows], [r[2] for r in rows], res.alpha, res.beta))
    for n in res.n_values:
        print(f"n={n}\tM_selected={res.selected_M[n]}")
    if res.beta is None:
        print("fit impossible: fewer than 3 qubit counts resolved", file=sys.stderr)
        return 1
    note = " (degenerate: every selection at grid minimum)" if degenerate else ""
    print(f"alpha={res.alpha:.6g} beta={res.beta:.6g}{note}")
    return 0


def histogram_bins(estimates: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts, edges = np.histogram(estimates, bins=bins)
    width = np.diff(edges)
    density = counts / (counts.sum() * width)
    return edges, counts, density


def cmd_histogram(cfg: CliConfig, out: Path) -> int:
    started = time.perf_counter()
    reps = cfg.value("repetitions")
    if reps < MIN_HISTOGRAM_REPS:
        raise ConfigError(f"histogram needs at least {MIN_HISTOGRAM_REPS} repetitions, got {reps}")
    bins = cfg.value("bins")
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    pc = protocol_config(cfg)
    ens = run_ensemble(pc, reps, workers=cfg.workers)
    edges, counts, density = histogram_bins(ens.estimates, bins)
    _write(out, "histogram_estimates.csv",
           _csv_text(ESTIMATES_HEADER, [(i, float(v)) for i, v in enumerate(ens.estimates)]))
    _write(out, "histogram_bins.csv", _csv_text(
        BINS_HEADER,
        [(float(edges[i]), float(edges[i + 1]), int(counts[i]), float(density[i])) for i in range(bins)],
    ))
    center, width = ens.gaussian_fit
    result = {
        "gaussian_fit": {"center": center, "width": width},
        "mean": ens.mean,
        "std": ens.std,
        "true_fidelity": ens.true_fidelity,
        "repetitions": reps,
        "protocol": pc.as_dict(),
    }
    _write(out, "histogram.json", _dumps(_document(cfg, result, started)))
    if cfg.svg:
        _write(out, "histogram.svg", svgplot.histogram_chart(
            edges.tolist(), density.tolist(), center, width, ens.true_fidelity))
    print(f"center {center:.6f} width {width:.6f} (true fidelity {ens.true_fidelity:.6f})")
    return 0


def bounds_report(epsilon: float, delta: float, n: int) -> dict:
    try:
        prop = bounds.proposition4_plan(epsilon, delta, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        cor = bounds.corollary_plan(epsilon, delta, n).as_dict()
        cor_note = None
    except ValueError as exc:
        cor, cor_note = None, str(exc)
    return {
        "epsilon": epsilon,
        "delta": delta,
        "n": n,
        "single_run": prop.as_dict(),
        "median_of_means": cor,
        "median_of_means_rejected": cor_note,
    }


def _print_bounds(rep: dict) -> None:
    sr = rep["single_run"]
    verdict = "feasible" if sr["feasible"] else "infeasible"
    print(f"epsilon={rep['epsilon']} delta={rep['delta']} n={rep['n']}")
    print(f"single-run plan ({verdict})")
    for key in ("N_min", "N_max", "M_min", "K_min", "N_total"):
        print(f"  {key:<12}{sr[key]}")
    if rep["median_of_means"] is None:
        print(f"median-of-means plan rejected: {rep['median_of_means_rejected']}")
    else:
        print("median-of-means plan")
        for key in ("P", "N", "K", "M", "bob_cost", "alice_cost"):
            print(f"  {key:<12}{rep['median_of_means'][key]}")


def cmd_bounds(cfg: CliConfig, out: Path) -> int:
    started = time.perf_counter()
    rep = bounds_report(cfg.value("epsilon"), cfg.value("delta"), cfg.value("n"))
    _print_bounds(rep)
    _write(out, "bounds.json", _dumps(_document(cfg, rep, started)))
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "mscaling": cmd_mscaling,
    "bounds": cmd_bounds,
    "histogram": cmd_histogram,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file")
    common.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--out", default="results", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--workers", type=int, default=1, help="worker threads for repetitions")
    common.add_argument("--svg", action="store_true", help="also write an SVG plot")

    parser = argparse.ArgumentParser(prog="shadowqae", description="Fidelity estimation via classical shadows and QAE.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "bounds":
            sp.add_argument("--epsilon", help="target accuracy")
            sp.add_argument("--delta", help="failure probability")
            sp.add_argument("--n", dest="qubits", help="qubit count")
    return parser


def make_cli_config(args: argparse.Namespace) -> CliConfig:
    overrides = parse_overrides(args.overrides)
    if args.subcommand == "bounds":
        for key, val in (("epsilon", args.epsilon), ("delta", args.delta), ("n", args.qubits)):
            if val is not None:
                overrides[key] = val
    if not 0 <= args.seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise ConfigError("workers must be >= 1")
    cfg = CliConfig(
        subcommand=args.subcommand, config_path=args.config, overrides=overrides,
        out_dir=args.out, seed=args.seed, workers=args.workers, svg=args.svg,
    )
    cfg.settings = load_settings(args.config, overrides)
    for key in cfg.settings:
        cfg.value(key)  # fail early on unparsable values
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = make_cli_config(args)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.subcommand](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
