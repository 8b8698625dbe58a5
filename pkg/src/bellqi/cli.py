"""Command-line front end.

Subcommands: ``oracle-check``, ``exact``, ``mc``, ``advantage``, ``sequential``.
Every result file starts with the resolved configuration, the seed, a hash of
the inputs and a column schema, and contains no timestamps, so identical
invocations produce byte-identical files.

Exit codes: 0 success, 1 a check failed, 2 bad command line, 3 parameter out
of its domain, 4 exact-enumeration guard exceeded, 5 unreadable config file.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .channel import (
    ChannelParams,
    EnumerationLimitError,
    classify,
    compare_up_to_phase,
    occupations_up_to,
    phi_tilde,
    phi_tilde_oracle_all,
    rho_abs_ensemble,
    rho_pres_ensemble,
)
from .fock import SparseKet
from .measurement import _exact, pdet_mc, pfa_mc
from .noise import parse_noise
from .protocol import AnalysisParams, effective_eta, figure1_data, pe_block_quantum, pe_sequential, sequential_sim

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_GUARD = 4
EXIT_CONFIG = 5

ORACLE_TOL = 1e-10
CONSERVATION_TOL = 1e-12

DEFAULTS: dict[str, dict[str, Any]] = {
    "oracle-check": {"modes": "1,2,3", "eta": "0.1,0.5,0.9,1.0", "noise": "thermal:0.7", "max_photons": 4,
                     "format": "csv"},
    "exact": {"modes": 2, "eta": 0.5, "noise": "thermal:0.5", "tail_tol": 1e-8, "max_total": 40,
              "symmetric": False, "format": "json"},
    "mc": {"modes": "100,1000,10000,100000", "eta": 0.1, "noise": "thermal:1", "samples": 100_000, "seed": 0,
           "threads": 1, "format": "csv"},
    "advantage": {"pi1": 0.5, "low_points": 101, "high_points": 81, "high_max": 1e4, "format": "csv"},
    "sequential": {"modes": 100_000, "eta": 0.1, "noise": "thermal:1", "samples": 100_000, "trials": 100_000,
                   "n_max": 100, "pi1": 0.5, "eta_tilde": None, "pfa": None, "seed": 0, "threads": 1,
                   "format": "json"},
}


class ConfigError(Exception):
    pass


class CheckFailed(Exception):
    pass


# -- argument handling ------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, seeded: bool = False, threaded: bool = False) -> None:
    p.add_argument("--config", help="flat JSON object of option values; flags override it")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    if seeded:
        p.add_argument("--seed", type=int)
    if threaded:
        p.add_argument("--threads", type=int, help="worker threads for Monte Carlo (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellqi", description="Bell-state quantum illumination simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle-check", help="closed-form conditional states vs beam-splitter oracle")
    p.add_argument("-M", "--modes", help="comma-separated mode counts")
    p.add_argument("--eta", help="comma-separated reflectivities")
    p.add_argument("--noise")
    p.add_argument("--max-photons", type=int, help="largest total background photon number")
    _add_common(p)

    p = sub.add_parser("exact", help="exact false-alarm and detection probabilities (small M)")
    p.add_argument("-M", "--modes", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--noise")
    p.add_argument("--tail-tol", type=float)
    p.add_argument("--max-total", type=int, help="guard on the total-photon cutoff")
    p.add_argument("--symmetric", action="store_true", default=None,
                   help="enumerate one background per mode-permutation orbit")
    _add_common(p)

    p = sub.add_parser("mc", help="Monte Carlo estimates across a sweep of M")
    p.add_argument("-M", "--modes", help="comma-separated mode counts")
    p.add_argument("--eta", type=float)
    p.add_argument("--noise")
    p.add_argument("--samples", type=int)
    _add_common(p, seeded=True, threaded=True)

    p = sub.add_parser("advantage", help="error-exponent advantage curves (low- and high-noise panels)")
    p.add_argument("--pi1", type=float, help="target prior for the sequential column")
    p.add_argument("--low-points", type=int)
    p.add_argument("--high-points", type=int)
    p.add_argument("--high-max", type=float)
    _add_common(p)

    p = sub.add_parser("sequential", help="simulate the stop-at-first-click decision rule")
    p.add_argument("-M", "--modes", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--noise")
    p.add_argument("--samples", type=int, help="Monte Carlo samples for the click probabilities")
    p.add_argument("--trials", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--pi1", type=float)
    p.add_argument("--eta-tilde", type=float, help="override the estimated detection probability")
    p.add_argument("--pfa", type=float, help="override the estimated false-alarm probability")
    _add_common(p, seeded=True, threaded=True)
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict) or any(isinstance(v, (dict, list)) for v in loaded.values()):
            raise ConfigError("config file must be a flat JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _int_list(value) -> list[int]:
    if isinstance(value, int):
        return [value]
    return [int(v) for v in str(value).split(",") if v.strip()]


def _float_list(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


# -- output -----------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def input_hash(command: str, cfg: dict) -> str:
    payload = json.dumps({"command": command, "config": cfg, "version": __version__}, sort_keys=True)
    return "sha256:" + hashlib.sha256(payload.encode()).hexdigest()


def render(command: str, cfg: dict, columns: Sequence[str], rows: list[dict], fmt: str,
           extra: dict | None = None) -> str:
    seed = cfg.get("seed")
    if fmt == "json":
        doc = {
            "command": command,
            "config": cfg,
            "seed": seed,
            "input_hash": input_hash(command, cfg),
            "columns": list(columns),
            "results": rows,
        }
        if extra:
            doc.update(extra)
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# bellqi {__version__} {command}\n")
    buf.write(f"# config: {json.dumps(_jsonable(cfg), sort_keys=True)}\n")
    buf.write(f"# seed: {seed}\n")
    buf.write(f"# input_hash: {input_hash(command, cfg)}\n")
    buf.write(f"# columns: {','.join(columns)}\n")
    if extra:
        for k, v in extra.items():
            buf.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None, suffix: str = "") -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix:
        path = path.with_name(f"{path.stem}_{suffix}{path.suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _occ_str(occ) -> str:
    return ";".join(str(c) for c in occ)


# -- commands ---------------------------------------------------------------

def cmd_oracle_check(cfg: dict) -> tuple[list[str], list[dict], dict]:
    modes = _int_list(cfg["modes"])
    etas = _float_list(cfg["eta"])
    noise = parse_noise(cfg["noise"])
    kmax = int(cfg["max_photons"])
    _require(all(m >= 1 for m in modes), "modes must be >= 1")
    _require(kmax >= 0, "max_photons must be >= 0")
    rows = []
    worst_conservation = 0.0
    for m in modes:
        for eta in etas:
            params = ChannelParams(m, eta, noise)
            for n_b in occupations_up_to(m, kmax):
                oracle = phi_tilde_oracle_all(n_b, params)
                p_nb = noise.joint_pmf(n_b)
                closed_norm = 0.0
                for n_a in _oracle_targets(n_b):
                    closed = phi_tilde(n_a, n_b, params)
                    ref = oracle.get(n_a, SparseKet(num_modes=m))
                    closed_norm += closed.norm2()
                    rows.append({
                        "M": m, "eta": eta, "n_b": _occ_str(n_b), "n_a": _occ_str(n_a),
                        "case": classify(n_a, n_b)[0],
                        "max_dev": compare_up_to_phase(closed, ref),
                        "norm2_closed": closed.norm2(), "norm2_oracle": ref.norm2(),
                    })
                worst_conservation = max(worst_conservation, abs(closed_norm - p_nb))
    columns = ["M", "eta", "n_b", "n_a", "case", "max_dev", "norm2_closed", "norm2_oracle"]
    worst = max(r["max_dev"] for r in rows)
    summary = {"pairs": len(rows), "max_dev": worst, "max_conservation_error": worst_conservation,
               "passed": bool(worst <= ORACLE_TOL and worst_conservation <= CONSERVATION_TOL)}
    return columns, rows, {"summary": summary}


def _oracle_targets(n_b):
    # every n_a with n_a_i <= n_b_i + 2 covers all three branch cases
    return itertools.product(*(range(b + 3) for b in n_b))


def cmd_exact(cfg: dict) -> tuple[list[str], list[dict], dict]:
    params = ChannelParams(int(cfg["modes"]), float(cfg["eta"]), parse_noise(cfg["noise"]))
    kw = dict(max_total=int(cfg["max_total"]), symmetric=bool(cfg["symmetric"]))
    tail_tol = float(cfg["tail_tol"])
    abs_ens = rho_abs_ensemble(params, tail_tol, **kw)
    pres_ens = rho_pres_ensemble(params, tail_tol, **kw)
    pfa, pdet = _exact(abs_ens), _exact(pres_ens)
    m = params.M
    row = {
        "M": m, "eta": params.eta, "noise": params.noise.spec, "mean_pm": params.noise.mean,
        "cutoff": abs_ens.cutoff, "tail_bound": abs_ens.tail_bound,
        "pfa": pfa.value, "pfa_upper": min(pfa.value + abs_ens.tail_bound / m, 1.0), "pfa_bound": 2.0 / m,
        "pdet": pdet.value, "pdet_upper": min(pdet.value + pres_ens.tail_bound, 1.0),
        "trace_abs": abs_ens.trace(), "trace_pres": pres_ens.trace(),
        "eta_tilde_limit": effective_eta(params.eta, params.noise.mean),
    }
    return list(row), [row], {}


def _child_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def cmd_mc(cfg: dict) -> tuple[list[str], list[dict], dict]:
    modes = _int_list(cfg["modes"])
    eta = float(cfg["eta"])
    noise = parse_noise(cfg["noise"])
    samples, threads = int(cfg["samples"]), int(cfg["threads"])
    _require(samples >= 2, "samples must be >= 2")
    _require(threads >= 1, "threads must be >= 1")
    limit = effective_eta(eta, noise.mean)
    rngs = _child_rngs(int(cfg["seed"]), 2 * len(modes))
    rows = []
    for k, m in enumerate(modes):
        params = ChannelParams(m, eta, noise)
        fa = pfa_mc(params, samples, rngs[2 * k], threads=threads)
        det = pdet_mc(params, samples, rngs[2 * k + 1], threads=threads)
        rows.append({
            "M": m, "eta": eta, "mean_pm": noise.mean, "nb_equiv": noise.mean * (1.0 - eta),
            "pfa": fa.value, "pfa_se": fa.std_error, "pfa_bound": 2.0 / m,
            "pdet": det.value, "pdet_se": det.std_error, "eta_tilde_limit": limit,
            "distance": abs(det.value - limit),
        })
    return list(rows[0]), rows, {}


def _advantage_rows(grid, pi1) -> list[dict]:
    return [
        {"nb": pt.nb, "block_db": pt.block_db, "sequential_db": pt.sequential_db, "fundamental_db": pt.fundamental_db}
        for pt in figure1_data(grid, pi1)
    ]


def advantage_grids(cfg: dict) -> dict[str, np.ndarray]:
    low_n, high_n, high_max = int(cfg["low_points"]), int(cfg["high_points"]), float(cfg["high_max"])
    _require(low_n >= 2 and high_n >= 2, "grids need at least two points")
    _require(high_max > 1, "high_max must exceed 1")
    return {"low": np.linspace(0.0, 1.0, low_n), "high": np.logspace(0.0, math.log10(high_max), high_n)}


def cmd_sequential(cfg: dict) -> tuple[list[str], list[dict], dict]:
    params = ChannelParams(int(cfg["modes"]), float(cfg["eta"]), parse_noise(cfg["noise"]))
    samples, threads = int(cfg["samples"]), int(cfg["threads"])
    pi1 = float(cfg["pi1"])
    _require(0 <= pi1 < 1, "pi1 must lie in [0, 1)")
    rngs = _child_rngs(int(cfg["seed"]), 3)
    if cfg["eta_tilde"] is None:
        det = pdet_mc(params, samples, rngs[0], threads=threads)
        eta_tilde, eta_tilde_se = det.value, det.std_error
    else:
        eta_tilde, eta_tilde_se = float(cfg["eta_tilde"]), 0.0
    if cfg["pfa"] is None:
        fa = pfa_mc(params, samples, rngs[1], threads=threads)
        pfa, pfa_se = fa.value, fa.std_error
    else:
        pfa, pfa_se = float(cfg["pfa"]), 0.0
    ap = AnalysisParams.with_prior(params.eta, params.noise.mean * (1.0 - params.eta), pi1,
                                   n_max=int(cfg["n_max"]))
    res = sequential_sim(ap, eta_tilde, pfa, int(cfg["trials"]), rngs[2])
    row = {
        "M": params.M, "eta": params.eta, "mean_pm": params.noise.mean, "nb_equiv": ap.nb,
        "eta_tilde": eta_tilde, "eta_tilde_se": eta_tilde_se, "pfa_single": pfa, "pfa_single_se": pfa_se,
        "n_max": ap.n_max, "pi1": pi1,
        "p_e": res.p_e, "p_e_se": res.p_e_se,
        "miss_rate": res.miss_rate, "miss_rate_se": res.miss_rate_se, "expected_miss": res.expected_miss,
        "false_alarm_rate": res.false_alarm_rate, "false_alarm_rate_se": res.false_alarm_rate_se,
        "expected_false_alarm": res.expected_false_alarm, "false_alarm_union_bound": ap.n_max * 2.0 / params.M,
        "mean_shots": res.mean_shots, "mean_shots_se": res.mean_shots_se,
        "expected_shots": res.expected_shots, "nominal_shots": res.nominal_shots,
        "nominal_shots_deviation": res.nominal_shots - res.expected_shots,
        # closed forms at the same mean photon budget
        "pe_block_closed": pe_block_quantum(replace(ap, n_s=res.expected_shots)),
        "pe_sequential_closed": pe_sequential(replace(ap, n_s=res.expected_shots)),
    }
    return list(row), [row], {}


COMMANDS = {
    "oracle-check": cmd_oracle_check,
    "exact": cmd_exact,
    "mc": cmd_mc,
    "sequential": cmd_sequential,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        fmt = cfg.pop("format")
        out = args.out
        if args.command == "advantage":
            _require(0 <= float(cfg["pi1"]) < 1, "pi1 must lie in [0, 1)")
            grids = advantage_grids(cfg)
            columns = ["nb", "block_db", "sequential_db", "fundamental_db"]
            panels = {name: _advantage_rows(grid, float(cfg["pi1"])) for name, grid in grids.items()}
            if fmt == "json":
                emit(render("advantage", cfg, columns, [], fmt, {"panels": panels}), out)
            else:
                for name, rows in panels.items():
                    emit(render(f"advantage {name}-noise", cfg, columns, rows, fmt), out, suffix=name)
            return EXIT_OK
        columns, rows, extra = COMMANDS[args.command](cfg)
        emit(render(args.command, cfg, columns, rows, fmt, extra or None), out)
        summary = (extra or {}).get("summary")
        if summary is not None:
            print(f"oracle-check: {summary['pairs']} pairs, max deviation {summary['max_dev']:.3e}, "
                  f"max conservation error {summary['max_conservation_error']:.3e}", file=sys.stderr)
            if not summary["passed"]:
                raise CheckFailed("oracle mismatch")
    except CheckFailed as exc:
        print(f"bellqi: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except ConfigError as exc:
        print(f"bellqi: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationLimitError as exc:
        print(f"bellqi: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"bellqi: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
