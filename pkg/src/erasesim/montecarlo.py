"""Monte Carlo experiments: logical rates, threshold crossings, exponents.

Trials are dispatched in fixed-size chunks whose RNG seeds depend only on
(master seed, point id, chunk index), so failure counts are bit-identical
regardless of how many workers execute the chunks.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .graph import DecodingGraph, _cached_code, build_graph
from .noise import ERASURE, NoiseConfig
from .sampler import TrialTables, build_tables, chunk_seed
from .xzzx import OBSERVABLE
from . import _kernels

SWEEP_FORMAT = "erasesim-sweep/1"
class FitError(RuntimeError):
    """A fit could not produce a usable estimate (e.g. no crossing in
    the scanned window, or zero observed failures)."""


CSV_COLUMNS = ["d", "p", "R_e", "p_m", "eta", "trials", "failures",
               "p_L", "ci_low", "ci_high"]


def wilson_ci(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials
                                   + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class LogicalRateEstimate:
    p: float
    d: int
    r_e: float
    p_m: float
    eta: float | None
    mode: str
    trials: int
    failures: int
    p_l: float
    ci_low: float
    ci_high: float

    def row(self) -> list:
        return [self.d, self.p, self.r_e, self.p_m,
                "" if self.eta is None else self.eta,
                self.trials, self.failures, self.p_l, self.ci_low, self.ci_high]


def _point_id(cfg: NoiseConfig, d: int, rounds: int) -> int:
    key = (d, rounds, cfg.mode, round(cfg.p, 12), round(cfg.r_e, 12),
           round(cfg.p_m, 12), cfg.eta)
    return zlib.crc32(repr(key).encode())


def _estimate(cfg: NoiseConfig, d: int, rounds: int | None) -> tuple[DecodingGraph, TrialTables, int]:
    lattice, schedule = _cached_code(d)
    graph = build_graph(lattice, schedule, cfg, rounds)
    tables = build_tables(d, cfg, schedule)
    return graph, tables, _point_id(cfg, d, graph.rounds)


def estimate_logical_rate(cfg: NoiseConfig, d: int, trials: int,
                          min_failures: int = 0, rounds: int | None = None,
                          chunk_size: int = 32768, workers: int = 1) -> LogicalRateEstimate:
    """Logical failure rate over `trials` decoded trials.

    A trial fails when the decoder's parity differs from the true parity
    on the tracked memory observable (the logical operator whose circuit
    fault distance the gate schedule preserves; the schedule's hook errors
    halve the distance of the other one, which a memory experiment on this
    observable never exposes). With min_failures > 0, `trials` acts as a
    cap and sampling stops once that many failures have accumulated
    (checked at chunk granularity, so counts stay deterministic).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def finish(n, k):
        lo, hi = wilson_ci(k, n)
        return LogicalRateEstimate(
            p=cfg.p, d=d, r_e=cfg.r_e, p_m=cfg.p_m,
            eta=cfg.eta if cfg.mode != ERASURE else None, mode=cfg.mode,
            trials=n, failures=k, p_l=k / n, ci_low=lo, ci_high=hi)

    if cfg.p == 0.0 and cfg.p_m == 0.0:
        return finish(trials, 0)

    graph, tables, point = _estimate(cfg, d, rounds)
    biased = cfg.mode != ERASURE

    def run_one(chunk_idx: int, n: int) -> int:
        _, f = _kernels.run_chunk(
            chunk_seed(cfg.seed, point, chunk_idx), n,
            cfg.p_e, cfg.p_p, cfg.p_m, biased, tables.cum_pay,
            graph.rounds, graph.n_gates, graph.n_anc,
            tables.pay_defs, tables.pay_ndefs, tables.pay_mask,
            graph.n_det, graph.eu, graph.ev, graph.weight, graph.logmask,
            graph.site_edge_ptr, graph.site_edge_ids,
            np.uint8(1 << OBSERVABLE))
        return int(f)

    sizes = []
    left = trials
    while left > 0:
        sizes.append(min(chunk_size, left))
        left -= sizes[-1]

    done = 0
    failures = 0
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # deterministic reduction: chunk order fixed up front
            for i, f in enumerate(pool.map(run_one, range(len(sizes)), sizes)):
                failures += f
                done += sizes[i]
                if min_failures and failures >= min_failures:
                    break
    else:
        for i, n in enumerate(sizes):
            failures += run_one(i, n)
            done += n
            if min_failures and failures >= min_failures:
                break
    return finish(done, failures)


@dataclass
class ThresholdEstimate:
    p_th: float
    uncertainty: float
    d_pair: tuple[int, int]
    window: tuple[float, float]
    nu: float
    coefficients: dict[str, float]
    points: list[LogicalRateEstimate]

    def scaled(self, factor: float) -> "ThresholdEstimate":
        return replace(self, p_th=self.p_th * factor,
                       uncertainty=self.uncertainty * factor,
                       window=(self.window[0] * factor, self.window[1] * factor))


def _fss_fit(ps, ds, pls, sigmas, nu: float) -> tuple[np.ndarray, float]:
    """Least-squares fit of p_L = A + B x + C x², x = (p - p_th) d^(1/nu).

    Returns ((p_th, A, B, C), chi2). A, B, C are solved linearly for each
    candidate p_th; p_th itself by 1-d nonlinear least squares.
    """
    ps = np.asarray(ps)
    ds = np.asarray(ds, float)
    pls = np.asarray(pls)
    sigmas = np.asarray(sigmas)

    def coeffs(p_th):
        x = (ps - p_th) * ds ** (1.0 / nu)
        m = np.column_stack([np.ones_like(x), x, x * x]) / sigmas[:, None]
        c, *_ = np.linalg.lstsq(m, pls / sigmas, rcond=None)
        return c, (m @ c - pls / sigmas)

    def resid(theta):
        return coeffs(theta[0])[1]

    p0 = float(np.median(ps))
    sol = least_squares(resid, x0=[p0], method="lm")
    p_th = float(sol.x[0])
    c, r = coeffs(p_th)
    return np.array([p_th, *c]), float(r @ r)


def estimate_threshold(cfg: NoiseConfig, d_pair: tuple[int, int],
                       p_grid: list[float], trials_per_point: int,
                       nu0: float = 1.0, n_boot: int = 100,
                       min_failures: int = 0, workers: int = 1,
                       rng_seed: int = 0) -> ThresholdEstimate:
    """Threshold from the crossing of p_L(p) curves at two distances,
    using a quadratic finite-size-scaling fit. The scaling exponent
    starts at nu0 and is refined by one fit iteration; uncertainty is a
    parametric bootstrap over the binomial counts."""
    if d_pair[0] == d_pair[1]:
        raise ValueError("d_pair must contain two distinct distances")
    points: list[LogicalRateEstimate] = []
    for d in d_pair:
        for p in p_grid:
            points.append(estimate_logical_rate(
                replace(cfg, p=p), d, trials_per_point,
                min_failures=min_failures, workers=workers))
    ps = [e.p for e in points]
    ds = [e.d for e in points]
    pls = [e.p_l for e in points]
    ns = [e.trials for e in points]
    sigmas = [max(math.sqrt(max(e.p_l * (1 - e.p_l), 1e-12) / e.trials), 1e-9)
              for e in points]

    theta, _ = _fss_fit(ps, ds, pls, sigmas, nu0)
    # one refinement pass: estimate nu from the fitted slopes via a small
    # grid search around nu0, then refit
    best = (math.inf, nu0, theta)
    for nu in np.geomspace(max(0.3, nu0 / 3), nu0 * 3, 25):
        th, chi2 = _fss_fit(ps, ds, pls, sigmas, float(nu))
        if chi2 < best[0]:
            best = (chi2, float(nu), th)
    _, nu, theta = best
    p_th = theta[0]
    if not (min(p_grid) <= p_th <= max(p_grid)):
        raise FitError(
            f"no crossing inside the scanned window: fit gave p_th={p_th:.6g}")

    rng = np.random.default_rng([cfg.seed, rng_seed, 0xB001])
    boot = []
    for _ in range(n_boot):
        kboot = rng.binomial(ns, pls)
        plb = kboot / np.asarray(ns)
        try:
            th, _ = _fss_fit(ps, ds, plb, sigmas, nu)
        except np.linalg.LinAlgError:  # pragma: no cover
            continue
        boot.append(th[0])
    unc = float(np.std(boot)) if len(boot) > 1 else float("nan")
    return ThresholdEstimate(
        p_th=float(p_th), uncertainty=max(unc, 1e-12), d_pair=tuple(d_pair),
        window=(min(p_grid), max(p_grid)), nu=nu,
        coefficients={"A": float(theta[1]), "B": float(theta[2]),
                      "C": float(theta[3])},
        points=points)


@dataclass
class ExponentFit:
    nu: float
    stderr: float
    r_e: float
    d: int
    window: tuple[float, float]  # fit range in p / p_th
    points: list[LogicalRateEstimate]


def fit_exponent(cfg: NoiseConfig, d: int, p_values: list[float], p_th: float,
                 trials_per_point: int, min_failures: int = 0,
                 workers: int = 1) -> ExponentFit:
    """Sub-threshold exponent: slope of log p_L vs log p at fixed d.

    p_values must lie below p_th; the fit window is reported in rescaled
    units p/p_th."""
    if len(p_values) < 4:
        raise ValueError("exponent fit needs at least 4 points")
    if max(p_values) >= p_th:
        raise ValueError("all fit points must lie below the threshold")
    points = [estimate_logical_rate(replace(cfg, p=p), d, trials_per_point,
                                    min_failures=min_failures, workers=workers)
              for p in p_values]
    if any(e.failures == 0 for e in points):
        raise FitError("a p_L estimate is zero; increase trials")
    x = np.log([e.p for e in points])
    y = np.log([e.p_l for e in points])
    # weight by the relative uncertainty of p_L (delta method on log)
    w = np.array([math.sqrt(e.failures) for e in points])
    coef, cov = np.polyfit(x, y, 1, w=w, cov=True)
    return ExponentFit(
        nu=float(coef[0]), stderr=float(math.sqrt(cov[0, 0])), r_e=cfg.r_e,
        d=d, window=(min(p_values) / p_th, max(p_values) / p_th), points=points)


def run_biased_comparison(cfg: NoiseConfig, d_pair: tuple[int, int],
                          p_grid: list[float], trials_per_point: int,
                          **kwargs) -> ThresholdEstimate:
    """Threshold under the biased channel, reported in units of the total
    two-qubit gate infidelity (~2p for the dominant-Z CZ channel)."""
    if cfg.mode == ERASURE:
        raise ValueError("run_biased_comparison requires a biased-mode config")
    est = estimate_threshold(cfg, d_pair, p_grid, trials_per_point, **kwargs)
    return est.scaled(2.0)


def run_spam_sweep(cfg: NoiseConfig, p_m_values: list, d_pair: tuple[int, int],
                   p_grid: list[float], trials_per_point: int,
                   **kwargs) -> list[tuple[str, ThresholdEstimate]]:
    """Thresholds for a list of init/measurement error settings.

    Entries are floats, or the string "p" for p_m tracking the gate error
    rate p point-by-point."""
    out = []
    for pm in p_m_values:
        if pm == "p":
            # p_m tracks p point-by-point via a config proxy
            est = estimate_threshold(
                _TrackingConfigProxy(cfg), d_pair, p_grid,
                trials_per_point, **kwargs)
            out.append(("p_m=p", est))
        else:
            est = estimate_threshold(replace(cfg, p_m=float(pm)), d_pair,
                                     p_grid, trials_per_point, **kwargs)
            out.append((f"p_m={float(pm):g}", est))
    return out


class _TrackingConfigProxy:
    """NoiseConfig stand-in whose p_m always equals p (for p_m = p sweeps).

    dataclasses.replace(proxy, p=...) returns a new proxy, so the sweep
    machinery is unaware of the coupling."""

    def __init__(self, base: NoiseConfig):
        self._base = replace(base, p_m=base.p)

    def __getattr__(self, name):
        if name == "p_m":
            return self._base.p
        return getattr(self._base, name)

    def __dataclass_replace__(self, **changes):  # pragma: no cover
        raise NotImplementedError


def _replace_proxy(proxy, **changes):
    return _TrackingConfigProxy(replace(proxy._base, **changes))


# dataclasses.replace dispatches on __class__ fields; give the proxy a
# compatible hook by monkey-free delegation: replace() works on the inner
# config, so intercept at module level where the proxy is used.
_orig_replace = replace


def replace(obj, **changes):  # noqa: A001 - deliberate local shadowing
    if isinstance(obj, _TrackingConfigProxy):
        return _replace_proxy(obj, **changes)
    return _orig_replace(obj, **changes)


def write_sweep_csv(path: str, estimates: list[LogicalRateEstimate]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for e in estimates:
            writer.writerow(e.row())


def write_sweep_json(path: str, payload: dict) -> None:
    def default(o):
        if dataclasses.is_dataclass(o):
            return dataclasses.asdict(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        raise TypeError(type(o).__name__)

    with open(path, "w") as fh:
        json.dump({"format": SWEEP_FORMAT, **payload}, fh, indent=2,
                  default=default)
        fh.write("\n")
