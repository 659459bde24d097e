"""Master-equation simulation of the two-atom Rydberg CZ gate.

Each atom is a five-level system {|0>, |1>, |r>, |p>, |g>}: the two
qubit states, the Rydberg state, a blackbody-populated Rydberg sink |p>
(detected as an ion, subspace B), and the radiative-decay sink |g>
(detected by ground-state fluorescence, subspace R). The two-atom
Hamiltonian drives |1> <-> |r> on each atom with Rabi frequency Omega
and detuning Delta, with blockade shifts V_rr on |rr>, V_pp on |pp>, and
an exchange coupling V_rp between |rp> and |pr>. Jump channels per atom:
|r> -> |g> at Gamma_R, |r> -> |p> at Gamma_B, and |r> -> |0>, |r> -> |1>
each at Gamma_Q/2. The sinks are absorbing on the gate timescale.

The CZ protocol is a symmetric detuned pulse with a phase slip between
two equal-length segments; ``calibrate_pulse`` optimizes the pulse
parameters at Gamma = 0 and ``simulate_gate`` evolves the full density
matrix to extract detection-outcome populations and (conditional) gate
fidelities.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse

from .gatephysics import GatePhysicsConfig, LP_PULSE_AREA

N_LEVELS = 5  # |0>, |1>, |r>, |p>, |g>
DIM = N_LEVELS * N_LEVELS
L0, L1, LR, LP, LG = range(N_LEVELS)

# Starting point for the pulse optimizer (detuning/Omega, phase slip,
# Omega * segment duration); the optimum of the symmetric CZ protocol.
_PULSE_GUESS = (0.377371, 3.90242, 4.29268)


def _pair(i: int, j: int) -> int:
    return N_LEVELS * i + j


# Two-atom computational basis indices |00>, |01>, |10>, |11>.
COMP = (_pair(L0, L0), _pair(L0, L1), _pair(L1, L0), _pair(L1, L1))
IDX_W = (_pair(L1, LR), _pair(LR, L1))
IDX_0R = _pair(L0, LR)
IDX_RR = _pair(LR, LR)

# Detection class of each single-atom level: Q (computational), R
# (ground-state fluorescence), or B (ion fluorescence; residual |r>
# population is autoionized at readout and counted as B).
_LEVEL_CLASS = ("Q", "Q", "B", "B", "R")
OUTCOME_KEYS = ("QQ", "QR", "QB", "RB", "RR", "BB")


def _outcome_masks() -> dict[str, np.ndarray]:
    masks = {k: np.zeros(DIM, dtype=bool) for k in OUTCOME_KEYS}
    for i in range(N_LEVELS):
        for j in range(N_LEVELS):
            pair = "".join(sorted(_LEVEL_CLASS[i] + _LEVEL_CLASS[j]))
            key = {"QQ": "QQ", "QR": "QR", "BQ": "QB",
                   "BR": "RB", "RR": "RR", "BB": "BB"}[pair]
            masks[key][_pair(i, j)] = True
    return masks


_MASKS = _outcome_masks()


@dataclass(frozen=True)
class PulseSegment:
    duration: float
    omega: complex
    delta: float


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[PulseSegment, ...]

    @property
    def t_g(self) -> float:
        return sum(s.duration for s in self.segments)


def lp_pulse(omega: float, delta_ratio: float, xi: float,
             tau_omega: float) -> PulseSequence:
    """Two equal segments with a phase slip xi between them."""
    tau = tau_omega / omega
    return PulseSequence((
        PulseSegment(tau, omega, delta_ratio * omega),
        PulseSegment(tau, omega * cmath.exp(1j * xi), delta_ratio * omega),
    ))


def hamiltonian(seg: PulseSegment, v_rr: float, v_rp: float,
                v_pp: float) -> np.ndarray:
    """Two-atom Hamiltonian of one pulse segment (dense, 25 x 25)."""
    h1 = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    h1[LR, L1] = seg.omega / 2
    h1[L1, LR] = np.conj(seg.omega) / 2
    h1[LR, LR] = seg.delta
    eye = np.eye(N_LEVELS)
    h = np.kron(h1, eye) + np.kron(eye, h1)
    h[IDX_RR, IDX_RR] += v_rr
    h[_pair(LP, LP), _pair(LP, LP)] += v_pp
    h[_pair(LR, LP), _pair(LP, LR)] += v_rp
    h[_pair(LP, LR), _pair(LR, LP)] += v_rp
    return h


def _labeled_jump_operators(
        cfg: GatePhysicsConfig) -> list[tuple[int, np.ndarray]]:
    """Single-atom decay channels from |r>, embedded in the pair space,
    tagged with the destination level."""
    ops = []
    chans = [(cfg.gamma_r, LG), (cfg.gamma_b, LP),
             (cfg.gamma_q / 2, L0), (cfg.gamma_q / 2, L1)]
    eye = np.eye(N_LEVELS)
    for rate, dest in chans:
        if rate == 0:
            continue
        l1 = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
        l1[dest, LR] = math.sqrt(rate)
        ops.append((dest, np.kron(l1, eye)))
        ops.append((dest, np.kron(eye, l1)))
    return ops


def jump_operators(cfg: GatePhysicsConfig) -> list[np.ndarray]:
    """Decay channels of the two-atom master equation."""
    return [op for _, op in _labeled_jump_operators(cfg)]


def _segment_unitaries(pulse: PulseSequence, v_rr: float, v_rp: float,
                       v_pp: float) -> list[np.ndarray]:
    return [scipy.linalg.expm(-1j * hamiltonian(s, v_rr, v_rp, v_pp)
                              * s.duration) for s in pulse.segments]


def _cz_overlaps(pulse: PulseSequence, v_rr: float,
                 v_rp: float | None = None,
                 v_pp: float | None = None) -> tuple[complex, complex]:
    """Return amplitudes (<01|U|01>, <11|U|11>) of the noiseless gate."""
    v_rp = v_rr if v_rp is None else v_rp
    v_pp = v_rr if v_pp is None else v_pp
    us = _segment_unitaries(pulse, v_rr, v_rp, v_pp)
    u = us[1] @ us[0]
    return u[COMP[1], COMP[1]], u[COMP[3], COMP[3]]


def _phased_cz_fidelity(m00: complex, m01: complex, m10: complex,
                        m11: complex) -> float:
    """Average gate fidelity vs the ideal CZ, maximized over a global
    single-qubit phase theta (applied as diag(1, e^it, e^it, e^2it))."""
    norm = (abs(m00)**2 + abs(m01)**2 + abs(m10)**2 + abs(m11)**2)

    def fid(theta: float) -> float:
        tr = (m00 + (m01 + m10) * cmath.exp(1j * theta)
              - m11 * cmath.exp(2j * theta))
        return (norm + abs(tr) ** 2) / 20.0

    # abs(tr)^2 is a trigonometric polynomial in theta with two
    # harmonics; a coarse scan plus local polish finds the global max.
    grid = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    theta0 = max(grid, key=fid)
    res = scipy.optimize.minimize_scalar(
        lambda th: -fid(th), bracket=(theta0 - 0.2, theta0, theta0 + 0.2))
    return fid(res.x)


def pulse_infidelity(pulse: PulseSequence, v_rr: float) -> float:
    """1 - F of the noiseless pulse against the ideal CZ."""
    a01, a11 = _cz_overlaps(pulse, v_rr)
    return 1.0 - _phased_cz_fidelity(1.0, a01, a01, a11)


def calibrate_pulse(omega: float, v_rr: float,
                    max_infidelity: float = 1e-4) -> PulseSequence:
    """Optimize (Delta/Omega, xi, segment area) of the phase-slip CZ
    pulse at Gamma = 0 for the given blockade strength.

    Raises RuntimeError (with the achieved residual) if the optimizer
    cannot reach ``max_infidelity``.
    """
    if not v_rr / omega >= 10:
        raise ValueError("calibration requires v_rr >> omega (ratio >= 10)")

    def cost(x: np.ndarray) -> float:
        return pulse_infidelity(lp_pulse(omega, x[0], x[1], x[2]), v_rr)

    res = scipy.optimize.minimize(
        cost, _PULSE_GUESS, method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 600})
    if res.fun > max_infidelity:
        raise RuntimeError(
            f"pulse calibration stalled at infidelity {res.fun:.3e}")
    return lp_pulse(omega, *res.x)


def noiseless_trajectories(pulse: PulseSequence, v_rr: float,
                           v_rp: float | None = None,
                           v_pp: float | None = None,
                           n_steps: int = 2048):
    """Sample the Gamma = 0 excitation amplitudes on a uniform grid.

    Returns (t, psi_r, psi_w, psi_rr): the |0r> amplitude starting from
    |01>, and the W-state and |rr> amplitudes starting from |11>.
    """
    v_rp = v_rr if v_rp is None else v_rp
    v_pp = v_rr if v_pp is None else v_pp
    t_g = pulse.t_g
    t = np.linspace(0.0, t_g, n_steps + 1)
    psi01 = np.zeros(DIM, dtype=complex)
    psi01[COMP[1]] = 1.0
    psi11 = np.zeros(DIM, dtype=complex)
    psi11[COMP[3]] = 1.0
    out_r = np.empty(t.size, dtype=complex)
    out_w = np.empty(t.size, dtype=complex)
    out_rr = np.empty(t.size, dtype=complex)

    k = 0
    t0 = 0.0
    for seg in pulse.segments:
        h = hamiltonian(seg, v_rr, v_rp, v_pp)
        evals, evecs = np.linalg.eigh(h)
        c01 = evecs.conj().T @ psi01
        c11 = evecs.conj().T @ psi11
        if seg is pulse.segments[-1]:
            k_end = t.size
        else:
            k_end = int(np.searchsorted(t, t0 + seg.duration, side="left"))
        ts = t[k:k_end] - t0
        phases = np.exp(-1j * np.outer(ts, evals))
        states01 = (phases * c01) @ evecs.T  # (n, DIM)
        states11 = (phases * c11) @ evecs.T
        n = ts.size
        out_r[k:k + n] = states01[:, IDX_0R]
        out_w[k:k + n] = (states11[:, IDX_W[0]]
                          + states11[:, IDX_W[1]]) / math.sqrt(2)
        out_rr[k:k + n] = states11[:, IDX_RR]
        # carry the state across the segment boundary
        phase_end = np.exp(-1j * evals * seg.duration)
        psi01 = evecs @ (phase_end * c01)
        psi11 = evecs @ (phase_end * c11)
        k += n
        t0 += seg.duration
    return t, out_r, out_w, out_rr


def _liouvillian(h: np.ndarray, jumps: list[np.ndarray],
                 recycle: bool = True) -> scipy.sparse.csr_matrix:
    """Vectorized generator d(vec rho)/dt = L vec(rho) (column stacking
    convention vec(ABC) = (C^T kron A) vec(B)).

    With ``recycle=False`` the jump refill terms L rho L^dag are
    dropped (the anti-Hermitian damping stays): the generator of the
    evolution conditioned on observing no quantum jump in any channel.
    """
    eye = np.eye(DIM)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for l in jumps:
        ll = l.conj().T @ l
        if recycle:
            lv += np.kron(l.conj(), l)
        lv -= 0.5 * (np.kron(eye, ll) + np.kron(ll.T, eye))
    return scipy.sparse.csr_matrix(lv)


def _propagators(pulse: PulseSequence, cfg: GatePhysicsConfig,
                 jumps: list[np.ndarray], recycle: bool) -> np.ndarray:
    prop = np.eye(DIM * DIM, dtype=complex)
    for seg in pulse.segments:
        h = hamiltonian(seg, cfg.v_rr, cfg.v_rp, cfg.v_pp)
        lv = _liouvillian(h, jumps, recycle=recycle)
        prop = scipy.linalg.expm((lv * seg.duration).toarray()) @ prop
    return prop


def evolve(pulse: PulseSequence, cfg: GatePhysicsConfig,
           rho0: np.ndarray) -> np.ndarray:
    """Propagate a (25 x 25) density matrix through the full gate.

    Raises RuntimeError if the trace drifts by more than 1e-6.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (DIM, DIM):
        raise ValueError(f"state must be {DIM} x {DIM}")
    tr0 = np.trace(rho0).real
    jumps = jump_operators(cfg)
    vec = rho0.reshape(-1, order="F")
    for seg in pulse.segments:
        h = hamiltonian(seg, cfg.v_rr, cfg.v_rp, cfg.v_pp)
        lv = _liouvillian(h, jumps)
        vec = scipy.sparse.linalg.expm_multiply(lv * seg.duration, vec)
    rho = vec.reshape(DIM, DIM, order="F")
    if abs(np.trace(rho).real - tr0) > 1e-6:
        raise RuntimeError("trace drift exceeded 1e-6")
    return rho


def basis_state(i: int, j: int) -> np.ndarray:
    """Density matrix of the product state |ij> (i, j in {0, 1})."""
    rho = np.zeros((DIM, DIM), dtype=complex)
    idx = _pair((L0, L1)[i], (L0, L1)[j])
    rho[idx, idx] = 1.0
    return rho


def outcome_populations(rho: np.ndarray) -> dict[str, float]:
    """Group the diagonal of rho into the six detection outcomes."""
    diag = np.real(np.diag(rho))
    return {k: float(diag[_MASKS[k]].sum()) for k in OUTCOME_KEYS}


@dataclass(frozen=True)
class GateOutcome:
    """Full characterization of one simulated gate."""

    populations: dict[str, float]  # input-averaged detection outcomes
    fidelity: float  # average gate fidelity F
    fidelity_conditional: float  # F conditioned on no erasure signal
    t: np.ndarray  # noiseless trajectory grid
    psi_r: np.ndarray
    psi_w: np.ndarray
    psi_rr: np.ndarray

    @property
    def p_e(self) -> float:
        return sum(self.populations[k] for k in ("QR", "QB", "RB", "RR"))

    @property
    def p_f(self) -> float:
        return self.populations["BB"]


def simulate_gate(pulse: PulseSequence, cfg: GatePhysicsConfig,
                  n_traj_steps: int = 2048) -> GateOutcome:
    """Run the master equation over the computational basis.

    Detection-outcome populations are averaged with weights 1/4 per
    basis state (so |01> and |10> together carry weight 1/2). The
    average gate fidelity F is computed from the process action on the
    computational subspace against the ideal CZ, with a global
    single-qubit phase optimized out. The conditional fidelity F_e-bar
    restricts the evolution to no-detected-jump trajectories (decays
    back to the qubit subspace are kept; radiative and blackbody jumps
    are not), projects onto the computational subspace at readout, and
    renormalizes by the average no-detection probability.
    """
    labeled = _labeled_jump_operators(cfg)
    jumps = [op for _, op in labeled]
    prop = _propagators(pulse, cfg, jumps, recycle=True)

    # Conditional propagator: undetected (Gamma_Q) jumps recycled, the
    # detected channels enter only through no-jump damping.
    detected = [op for dest, op in labeled if dest in (LP, LG)]
    undetected = [op for dest, op in labeled if dest in (L0, L1)]
    prop_c = np.eye(DIM * DIM, dtype=complex)
    for seg in pulse.segments:
        h = hamiltonian(seg, cfg.v_rr, cfg.v_rp, cfg.v_pp)
        lv = _liouvillian(h, undetected, recycle=True)
        for l in detected:
            ll = l.conj().T @ l
            eye = np.eye(DIM)
            lv -= scipy.sparse.csr_matrix(
                0.5 * (np.kron(eye, ll) + np.kron(ll.T, eye)))
        prop_c = scipy.linalg.expm((lv * seg.duration).toarray()) @ prop_c

    # Process matrices C[i, j] = <i| Lambda(|i><j|) |j> on the
    # computational subspace, for the full and conditional maps.
    c_full = np.zeros((4, 4), dtype=complex)
    c_cond = np.zeros((4, 4), dtype=complex)
    pops = {k: 0.0 for k in OUTCOME_KEYS}
    weights = (0.25, 0.25, 0.25, 0.25)
    no_detect = 0.0
    for i, bi in enumerate(COMP):
        for j, bj in enumerate(COMP):
            vec = np.zeros(DIM * DIM, dtype=complex)
            vec[bj * DIM + bi] = 1.0  # vec(|i><j|), column stacking
            out = prop @ vec
            out_c = prop_c @ vec
            c_full[i, j] = out[bj * DIM + bi]
            c_cond[i, j] = out_c[bj * DIM + bi]
            if i == j:
                rho = out.reshape(DIM, DIM, order="F")
                for k, v in outcome_populations(rho).items():
                    pops[k] += weights[i] * v
                rho_c = out_c.reshape(DIM, DIM, order="F")
                no_detect += weights[i] * float(
                    np.real(np.diag(rho_c))[list(COMP)].sum())
        if abs(sum(outcome_populations(
                (prop @ _basis_vec(bi)).reshape(DIM, DIM, order="F")
                ).values()) - 1.0) > 1e-6:
            raise RuntimeError("trace drift exceeded 1e-6")

    fid = _process_fidelity(c_full)
    fid_c = _process_fidelity(c_cond, norm=no_detect)

    t, psi_r, psi_w, psi_rr = noiseless_trajectories(
        pulse, cfg.v_rr, cfg.v_rp, cfg.v_pp, n_steps=n_traj_steps)
    return GateOutcome(populations=pops, fidelity=fid,
                       fidelity_conditional=fid_c,
                       t=t, psi_r=psi_r, psi_w=psi_w, psi_rr=psi_rr)


def _basis_vec(b: int) -> np.ndarray:
    vec = np.zeros(DIM * DIM, dtype=complex)
    vec[b * DIM + b] = 1.0
    return vec


def _process_fidelity(c: np.ndarray, norm: float = 1.0) -> float:
    """Average gate fidelity from the process matrix C_ij =
    <i|Lambda(|i><j|)|j>, against the ideal CZ with a free global
    single-qubit phase; optionally renormalized by a no-detection
    probability."""
    def fid(theta: float) -> float:
        u = np.array([1.0, cmath.exp(1j * theta), cmath.exp(1j * theta),
                      -cmath.exp(2j * theta)])
        f_e = float(np.real(np.conj(u) @ c @ u)) / 16.0 / norm
        return (4 * f_e + 1) / 5

    grid = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    theta0 = max(grid, key=fid)
    res = scipy.optimize.minimize_scalar(
        lambda th: -fid(th), bracket=(theta0 - 0.2, theta0, theta0 + 0.2))
    return float(fid(res.x))


def sweep_gate_error(gamma_tg_values, v_rr_over_gamma: float = 1e6,
                     frac_b: float = 0.61, frac_r: float = 0.34,
                     frac_q: float = 0.05) -> list[dict[str, float]]:
    """Scan the gate duration at fixed V_rr/Gamma (Gamma = 1 units).

    Returns one row per point: Gamma*t_g, 1-F, p_e, 1-F_e-bar, p_f.
    """
    rows = []
    for gtg in gamma_tg_values:
        t_g = float(gtg)  # Gamma = 1
        omega = LP_PULSE_AREA / t_g
        v_rr = v_rr_over_gamma
        pulse = calibrate_pulse(omega, v_rr)
        cfg = GatePhysicsConfig(gamma=1.0, omega=omega, v_rr=v_rr,
                                frac_b=frac_b, frac_r=frac_r, frac_q=frac_q,
                                t_g=pulse.t_g)
        out = simulate_gate(pulse, cfg)
        rows.append({
            "gamma_tg": t_g,
            "infidelity": 1.0 - out.fidelity,
            "p_e": out.p_e,
            "infidelity_conditional": 1.0 - out.fidelity_conditional,
            "p_f": out.p_f,
        })
    return rows
