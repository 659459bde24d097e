"""Command-line front end.

Subcommands drive the Monte Carlo experiments (memory, threshold,
exponent, biased, spam) and the gate-physics layer (gate, lindblad).
Options can be preloaded from a TOML config file (``--config``); flags
given on the command line win. Every run writes a JSON manifest next to
its outputs before any computation starts, recording the fully resolved
configuration, package version, and master seed, so results can be
reproduced bit-exactly.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .noise import BIASED, ERASURE, NoiseConfig

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    """Floats with 6 significant digits; everything else verbatim."""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _print_table(rows: list[dict], file=None) -> None:
    if not rows:
        return
    file = sys.stdout if file is None else file
    cols = list(rows[0].keys())
    widths = {c: max(len(c), *(len(_fmt(r[c])) for r in rows)) for c in cols}
    print("  ".join(c.rjust(widths[c]) for c in cols), file=file)
    for r in rows:
        print("  ".join(_fmt(r[c]).rjust(widths[c]) for c in cols), file=file)


def write_manifest(path: str, args: argparse.Namespace,
                   outputs: list[str]) -> None:
    """Record the resolved run configuration before computing."""
    resolved = {k: v for k, v in vars(args).items()
                if k not in ("func",) and not k.startswith("_")}
    manifest = {
        "format": "erasesim-manifest/1",
        "version": __version__,
        "command": resolved.pop("command"),
        "config": resolved,
        "master_seed": resolved.get("seed"),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)


def _noise_config(args) -> NoiseConfig:
    eta = getattr(args, "eta", None)
    return NoiseConfig(
        p=args.p if getattr(args, "p", None) is not None else 0.0,
        r_e=getattr(args, "re", 0.0),
        p_m=getattr(args, "pm", 0.0),
        mode=getattr(args, "mode", ERASURE),
        eta=math.inf if eta in (None, "inf") else float(eta),
        seed=args.seed,
    )


def _grid(args) -> list[float]:
    if args.p_min <= 0 or args.p_max <= args.p_min:
        raise ValueError("need 0 < p-min < p-max")
    return list(np.linspace(args.p_min, args.p_max, args.points))


def _threshold_payload(est) -> dict:
    return {
        "p_th": est.p_th, "uncertainty": est.uncertainty,
        "d_pair": list(est.d_pair), "window": list(est.window),
        "nu": est.nu, "coefficients": est.coefficients,
    }


# ---------------------------------------------------------------- commands

def cmd_memory(args) -> int:
    from .montecarlo import estimate_logical_rate, write_sweep_csv

    cfg = _noise_config(args)
    write_manifest(args.out + ".manifest.json", args, [args.out])
    est = estimate_logical_rate(cfg, args.distance, args.trials,
                                min_failures=args.min_failures,
                                workers=args.threads)
    write_sweep_csv(args.out, [est])
    _print_table([{"d": est.d, "p": est.p, "R_e": est.r_e,
                   "trials": est.trials, "failures": est.failures,
                   "p_L": est.p_l, "ci_low": est.ci_low,
                   "ci_high": est.ci_high}])
    return 0


def _run_threshold(args, runner) -> int:
    from .montecarlo import write_sweep_csv, write_sweep_json

    csv_path = args.out + ".csv"
    json_path = args.out + ".json"
    write_manifest(args.out + ".manifest.json", args, [csv_path, json_path])
    est = runner()
    write_sweep_csv(csv_path, est.points)
    write_sweep_json(json_path, {"threshold": _threshold_payload(est)})
    print(f"p_th = {_fmt(est.p_th)} +/- {_fmt(est.uncertainty)} "
          f"(d = {est.d_pair}, nu = {_fmt(est.nu)})")
    return 0


def cmd_threshold(args) -> int:
    from .montecarlo import estimate_threshold

    cfg = _noise_config(args)
    return _run_threshold(args, lambda: estimate_threshold(
        cfg, tuple(args.distances), _grid(args), args.trials,
        min_failures=args.min_failures, workers=args.threads,
        rng_seed=args.seed))


def cmd_exponent(args) -> int:
    from .montecarlo import fit_exponent, write_sweep_csv, write_sweep_json

    cfg = _noise_config(args)
    csv_path = args.out + ".csv"
    json_path = args.out + ".json"
    write_manifest(args.out + ".manifest.json", args, [csv_path, json_path])
    fit = fit_exponent(cfg, args.distance, _grid(args), args.p_th,
                       args.trials, min_failures=args.min_failures,
                       workers=args.threads)
    write_sweep_csv(csv_path, fit.points)
    write_sweep_json(json_path, {"exponent": {
        "nu": fit.nu, "stderr": fit.stderr, "d": fit.d, "R_e": fit.r_e,
        "window": list(fit.window)}})
    print(f"nu = {_fmt(fit.nu)} +/- {_fmt(fit.stderr)} "
          f"(d = {fit.d}, R_e = {_fmt(fit.r_e)})")
    return 0


def cmd_biased(args) -> int:
    from .montecarlo import run_biased_comparison

    args.mode = BIASED
    args.re = 0.0
    cfg = _noise_config(args)
    return _run_threshold(args, lambda: run_biased_comparison(
        cfg, tuple(args.distances), _grid(args), args.trials,
        min_failures=args.min_failures, workers=args.threads,
        rng_seed=args.seed))


def cmd_spam(args) -> int:
    from .montecarlo import run_spam_sweep, write_sweep_json

    cfg = _noise_config(args)
    json_path = args.out + ".json"
    write_manifest(args.out + ".manifest.json", args, [json_path])
    pm_values = [v if v == "p" else float(v)
                 for v in args.pm_values.split(",")]
    results = run_spam_sweep(cfg, pm_values, tuple(args.distances),
                             _grid(args), args.trials,
                             min_failures=args.min_failures,
                             workers=args.threads, rng_seed=args.seed)
    write_sweep_json(json_path, {"spam": [
        {"label": label, "threshold": _threshold_payload(est)}
        for label, est in results]})
    _print_table([{"p_m": label, "p_th": est.p_th,
                   "uncertainty": est.uncertainty}
                  for label, est in results])
    return 0


def cmd_gate(args) -> int:
    from .gatephysics import (GatePhysicsConfig, LP_PULSE_AREA,
                              channel_probabilities,
                              trajectory_coefficients)
    from .lindblad import calibrate_pulse, noiseless_trajectories

    fracs = (args.gamma_b, args.gamma_r, args.gamma_q)
    total = sum(fracs)
    if total <= 0 or abs(total - 1.0) > 1e-6:
        raise ValueError("branching fractions must sum to 1")
    json_path = args.out + ".json"
    write_manifest(args.out + ".manifest.json", args, [json_path])
    t_g = args.gamma_tg  # Gamma = 1 units
    omega = LP_PULSE_AREA / t_g
    v_rr = args.v_rr
    pulse = calibrate_pulse(omega, v_rr)
    cfg = GatePhysicsConfig(gamma=1.0, omega=omega, v_rr=v_rr,
                            frac_b=args.gamma_b, frac_r=args.gamma_r,
                            frac_q=args.gamma_q, t_g=pulse.t_g)
    t, psi_r, psi_w, psi_rr = noiseless_trajectories(pulse, v_rr)
    coeffs = trajectory_coefficients(t, psi_r, psi_w, psi_rr,
                                     omega=omega, v_rr=v_rr)
    chans = channel_probabilities(cfg, coeffs)
    payload = {"coefficients": coeffs.as_dict(),
               "channels": chans.as_dict(),
               "gamma_tg": t_g, "v_rr_over_gamma": v_rr}
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2)
    _print_table([{"quantity": k, "value": v}
                  for k, v in chans.as_dict().items()])
    print(f"R_e = {_fmt(chans.r_e)}")
    return 0


def cmd_lindblad(args) -> int:
    import csv as _csv

    from .gatephysics import GatePhysicsConfig, LP_PULSE_AREA
    from .lindblad import (calibrate_pulse, noiseless_trajectories,
                           simulate_gate, sweep_gate_error)

    csv_path = args.out + ".csv"
    write_manifest(args.out + ".manifest.json", args, [csv_path])
    if args.scan:
        points = np.geomspace(args.scan_min, args.scan_max, args.scan_points)
        rows = sweep_gate_error(points, v_rr_over_gamma=args.v_rr)
        with open(csv_path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["gamma_tg", "infidelity", "p_e",
                             "infidelity_conditional", "p_f"])
            for r in rows:
                writer.writerow([_fmt(r[k]) for k in (
                    "gamma_tg", "infidelity", "p_e",
                    "infidelity_conditional", "p_f")])
        _print_table(rows)
        return 0
    t_g = args.gamma_tg
    omega = LP_PULSE_AREA / t_g
    pulse = calibrate_pulse(omega, args.v_rr)
    cfg = GatePhysicsConfig(gamma=1.0, omega=omega, v_rr=args.v_rr,
                            t_g=pulse.t_g)
    out = simulate_gate(pulse, cfg)
    with open(csv_path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["t", "pop_r_from_01", "pop_W_from_11",
                         "pop_rr_from_11"])
        for i in range(out.t.size):
            writer.writerow([_fmt(float(out.t[i])),
                             _fmt(float(abs(out.psi_r[i]) ** 2)),
                             _fmt(float(abs(out.psi_w[i]) ** 2)),
                             _fmt(float(abs(out.psi_rr[i]) ** 2))])
    rows = [{"outcome": k, "probability": v}
            for k, v in out.populations.items()]
    rows.append({"outcome": "1-F", "probability": 1 - out.fidelity})
    rows.append({"outcome": "1-F_cond",
                 "probability": 1 - out.fidelity_conditional})
    _print_table(rows)
    return 0


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--threads", type=int,
                   default=max(1, os.cpu_count() or 1),
                   help="worker threads (results are thread-count "
                        "independent)")
    p.add_argument("--out", default="erasesim-run",
                   help="output path or prefix")
    p.add_argument("--config", default=None,
                   help="TOML file with option defaults (flags win)")


def _add_noise(p: argparse.ArgumentParser) -> None:
    p.add_argument("--re", type=float, default=0.0,
                   help="erasure fraction R_e")
    p.add_argument("--pm", type=float, default=0.0,
                   help="init/measurement error probability")
    p.add_argument("--mode", choices=(ERASURE, BIASED), default=ERASURE)
    p.add_argument("--eta", default=None,
                   help="dephasing bias (biased mode; 'inf' allowed)")
    p.add_argument("--min-failures", type=int, default=0,
                   help="stop a point early after this many failures")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--p-max", type=float, required=True)
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--distances", type=int, nargs=2, default=(5, 7),
                   metavar=("D1", "D2"))
    p.add_argument("--trials", type=int, default=100_000,
                   help="trials per grid point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erasesim",
        description="XZZX surface-code Monte Carlo with erasure "
                    "conversion and the Rydberg gate error model")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("memory", help="logical error rate at one point")
    p.add_argument("-d", "--distance", type=int, required=True)
    p.add_argument("--p", type=float, required=True,
                   help="two-qubit gate error probability")
    p.add_argument("--trials", type=int, default=100_000)
    _add_noise(p)
    _add_common(p)
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("threshold", help="threshold from a d-pair crossing")
    _add_grid(p)
    _add_noise(p)
    _add_common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("exponent", help="sub-threshold exponent fit")
    p.add_argument("-d", "--distance", type=int, required=True)
    p.add_argument("--p-th", type=float, required=True,
                   help="threshold used to define the rescaled window")
    _add_grid(p)
    _add_noise(p)
    _add_common(p)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("biased", help="threshold under biased Pauli noise")
    p.add_argument("--eta", default="inf",
                   help="dephasing bias (number or 'inf')")
    _add_grid(p)
    p.add_argument("--min-failures", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_biased)

    p = sub.add_parser("spam", help="init/measurement error sweep")
    p.add_argument("--pm-values", default="0,0.001,0.005",
                   help="comma list of p_m values; 'p' tracks the gate "
                        "error rate")
    _add_grid(p)
    _add_noise(p)
    _add_common(p)
    p.set_defaults(func=cmd_spam)

    p = sub.add_parser("gate", help="analytic gate error channels")
    p.add_argument("--gamma-tg", type=float, default=2e-3,
                   help="Gamma * t_g")
    p.add_argument("--v-rr", type=float, default=1e6,
                   help="V_rr / Gamma")
    p.add_argument("--gamma-b", type=float, default=0.61)
    p.add_argument("--gamma-r", type=float, default=0.34)
    p.add_argument("--gamma-q", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("lindblad", help="master-equation gate simulation")
    p.add_argument("--gamma-tg", type=float, default=2e-3)
    p.add_argument("--v-rr", type=float, default=1e6)
    p.add_argument("--scan", action="store_true",
                   help="sweep the gate duration instead of one point")
    p.add_argument("--scan-min", type=float, default=1e-3)
    p.add_argument("--scan-max", type=float, default=1e-2)
    p.add_argument("--scan-points", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_lindblad)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser,
                       argv: list[str]) -> list[str]:
    """Fold TOML config values in as defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ValueError("--config requires a file path") from None
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"config parse error in {path}: {exc}") from None
    injected = []
    for key, value in data.items():
        flag = "--" + str(key).replace("_", "-")
        if flag in argv:
            continue  # explicit flag wins
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        elif isinstance(value, list):
            injected.append(flag)
            injected.extend(str(v) for v in value)
        else:
            injected.extend([flag, str(value)])
    # insert after the subcommand so subparser options resolve
    return argv[:idx] + injected + argv[idx:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        sub_idx = next((i for i, a in enumerate(argv)
                        if not a.startswith("-")), None)
        if sub_idx is not None:
            argv = argv[:sub_idx + 1] + _apply_config_file(
                parser, argv[sub_idx + 1:])
        args = parser.parse_args(argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
