"""Analytic error-channel model for the Rydberg CZ gate.

During the gate, decay from the Rydberg state |r> at rate Gamma branches
into blackbody transitions to a nearby Rydberg state (fraction
Gamma_B/Gamma, detected as an ion, subspace B), radiative decay to the
absolute ground state (Gamma_R/Gamma, detected by fluorescence, subspace
R), and decay back to the qubit subspace Q (Gamma_Q/Gamma, undetected).
This module evaluates the resulting probabilities of each two-atom
detection outcome (QR, QB, RB, RR, BB) to first order in Gamma*t_g, from
time-averaged excitation trajectories of the calibrated pulse, along
with the erasure fraction R_e and a handful of detection/cycle budget
formulas.

The coefficients (alpha, beta, re-excitation fractions, ...) are plain
trapezoid integrals of the noiseless excitation amplitudes; see
``lindblad.simulate_gate`` for where those come from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .wigner import sixj, triangle_ok

# Pulse area of the symmetric detuned-pulse-with-phase-slip CZ protocol:
# t_g * Omega for the calibrated gate.
LP_PULSE_AREA = 8.586


@dataclass(frozen=True)
class GatePhysicsConfig:
    """Decay rates and gate parameters, in mutually consistent units."""

    gamma: float  # total Rydberg decay rate (1/time)
    omega: float  # Rabi frequency (rad/time)
    frac_b: float = 0.61  # blackbody branch Gamma_B / Gamma
    frac_r: float = 0.34  # radiative branch Gamma_R / Gamma
    frac_q: float = 0.05  # return-to-qubit branch Gamma_Q / Gamma
    v_rr: float = math.inf  # Rydberg-Rydberg blockade (rad/time)
    v_rp: float | None = None  # cross blockade, defaults to v_rr
    v_pp: float | None = None  # p-p blockade, defaults to v_rr
    t_g: float | None = None  # gate duration, defaults to LP_PULSE_AREA/omega

    def __post_init__(self):
        if self.gamma < 0 or self.omega <= 0:
            raise ValueError("gamma must be >= 0 and omega > 0")
        fracs = (self.frac_b, self.frac_r, self.frac_q)
        if any(f < 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("branching fractions must be >= 0 and sum to 1")
        if self.v_rp is None:
            object.__setattr__(self, "v_rp", self.v_rr)
        if self.v_pp is None:
            object.__setattr__(self, "v_pp", self.v_rr)
        if self.t_g is None:
            object.__setattr__(self, "t_g", LP_PULSE_AREA / self.omega)
        if self.t_g <= 0 or self.v_rr <= 0 or self.v_rp <= 0 or self.v_pp <= 0:
            raise ValueError("t_g and blockade strengths must be positive")

    @property
    def gamma_b(self) -> float:
        return self.frac_b * self.gamma

    @property
    def gamma_r(self) -> float:
        return self.frac_r * self.gamma

    @property
    def gamma_q(self) -> float:
        return self.frac_q * self.gamma


@dataclass(frozen=True)
class TrajectoryCoefficients:
    """Time-averaged populations and re-excitation fractions.

    All entries are dimensionless numbers in [0, 1] computed from the
    noiseless single- and double-excitation trajectories of the gate.
    ``beta_pp_scaled`` and ``s_scaled`` are expressed in units of
    Omega^2/(2 V_rr^2) and Omega^2/(2 V_rp^2) respectively, so the
    trajectory part stays independent of the blockade strength.
    """

    alpha: float  # mean |r> population, initial |01>
    r_01: float  # re-excitation fraction after a decay to |01>
    beta: float  # mean Rydberg population, initial |11>
    r_11: float  # re-excitation fraction after |11> decays to |01>
    r_11p: float  # re-excitation fraction after |11> decays to |11>
    beta_prime: float  # mean |r> population remaining after a first decay
    beta_pp_scaled: float  # mean |rr> population / (Omega^2/(2 V_rr^2))
    s_scaled: float = 1.0  # |1p> -> |rp> excitation / (Omega^2/(2 V_rp^2))

    def as_dict(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "R_01": self.r_01,
            "beta": self.beta,
            "R_11": self.r_11,
            "R'_11": self.r_11p,
            "beta'": self.beta_prime,
            "beta''_scaled": self.beta_pp_scaled,
            "S_scaled": self.s_scaled,
        }


def trajectory_coefficients(
    t: np.ndarray,
    psi_r: np.ndarray,
    psi_w: np.ndarray,
    psi_rr: np.ndarray | None = None,
    omega: float | None = None,
    v_rr: float | None = None,
) -> TrajectoryCoefficients:
    """Integrate the noiseless amplitudes into channel coefficients.

    ``psi_r`` is the |0r> amplitude starting from |01>, ``psi_w`` the
    W-state amplitude starting from |11>, on a common, uniformly dense
    time grid ``t`` spanning [0, t_g]. If ``psi_rr`` is given along with
    ``omega`` and ``v_rr``, the mean doubly-excited population is taken
    from the trajectory; otherwise the perturbative value beta''_scaled
    = beta is used.

    Populations |psi|^2 must be bounded by 1 (normalized amplitudes).
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 3 or t[0] != 0.0:
        raise ValueError("t must be a 1-d grid starting at 0")
    t_g = t[-1]
    pr = np.abs(np.asarray(psi_r)) ** 2
    pw = np.abs(np.asarray(psi_w)) ** 2
    if pr.max() > 1 + 1e-9 or pw.max() > 1 + 1e-9:
        raise ValueError("amplitudes are not normalized")

    # Square moduli are symmetric about the middle of the gate, so
    # |psi(t_g - t)|^2 is just the reversed array on a uniform grid.
    pr_rev = pr[::-1]
    pw_rev = pw[::-1]

    alpha = np.trapezoid(pr, t) / t_g
    beta = np.trapezoid(pw, t) / t_g
    if alpha > 0:
        r_01 = np.trapezoid(pr * pr_rev, t) / (t_g * alpha)
    else:
        r_01 = 0.0
    if beta > 0:
        r_11 = np.trapezoid(pw * pr_rev, t) / (t_g * beta)
        r_11p = np.trapezoid(pw * pw_rev, t) / (t_g * beta)
        # Mean |r> population left after the first decay: the partner
        # qubit is in |1> and is re-driven over the remaining [t, t_g],
        # i.e. the inner integral runs over the tail of the single-atom
        # trajectory.
        tail = np.concatenate(([0.0], np.cumsum(
            0.5 * (pr[1:] + pr[:-1]) * np.diff(t))))
        # (1/t_g) int_t^{t_g} |psi_r(t_g - t')|^2 dt' = tail(t_g - t)/t_g
        inner = tail[::-1] / t_g
        beta_prime = np.trapezoid(pw * inner, t) / (t_g * beta)
    else:
        r_11 = r_11p = beta_prime = 0.0

    beta_pp_scaled = beta
    if psi_rr is not None and omega is not None and v_rr is not None and beta > 0:
        prr = np.abs(np.asarray(psi_rr)) ** 2
        scale = omega**2 / (2 * v_rr**2)
        if scale > 0:
            beta_pp_scaled = np.trapezoid(prr, t) / t_g / scale
    return TrajectoryCoefficients(
        alpha=float(alpha), r_01=float(r_01), beta=float(beta),
        r_11=float(r_11), r_11p=float(r_11p), beta_prime=float(beta_prime),
        beta_pp_scaled=float(beta_pp_scaled),
    )


@dataclass(frozen=True)
class ChannelProbabilities:
    """First-order probabilities of the two-atom detection outcomes."""

    p_qr: float
    p_qb: float
    p_rb: float
    p_rr: float
    p_bb: float
    p_p: float  # undetected Pauli error on the qubits

    @property
    def p_e(self) -> float:
        """Total heralded-erasure probability."""
        return self.p_qr + self.p_qb + self.p_rb + self.p_rr

    @property
    def p_f(self) -> float:
        """Undetectable double-ion (atom loss) probability."""
        return self.p_bb

    @property
    def r_e(self) -> float:
        """Fraction of gate errors converted to erasures."""
        return self.p_e / (self.p_e + self.p_p)

    def as_dict(self) -> dict[str, float]:
        return {
            "P_QR": self.p_qr, "P_QB": self.p_qb, "P_RB": self.p_rb,
            "P_RR": self.p_rr, "P_BB": self.p_bb,
            "p_e": self.p_e, "p_f": self.p_f, "p_p": self.p_p,
            "R_e": self.r_e,
        }


def channel_probabilities(
    cfg: GatePhysicsConfig,
    coeffs: TrajectoryCoefficients,
    p_00: float = 0.25,
    p_01: float = 0.5,
    p_11: float = 0.25,
) -> ChannelProbabilities:
    """Evaluate the detection-outcome probabilities for a given initial
    computational-state distribution (default: uniform basis average,
    where |01> and |10> are grouped).

    The undetected Pauli probability p_p is the fidelity loss of the
    gate conditioned on no erasure signal: decays back to Q that are not
    re-excited, plus the no-jump contribution (p_e/4)^2. A decay to Q
    projects one atom onto a computational state with a phase that is
    incoherent with the surviving no-jump amplitude, so each such event
    removes its full probability from the conditional process fidelity;
    converting process fidelity to average gate fidelity multiplies the
    loss by d/(d+1) = 4/5 for the two-qubit gate.
    """
    if min(p_00, p_01, p_11) < 0 or abs(p_00 + p_01 + p_11 - 1.0) > 1e-9:
        raise ValueError("initial-state probabilities must be a distribution")
    g_r = cfg.gamma_r * cfg.t_g
    g_b = cfg.gamma_b * cfg.t_g
    g_q = cfg.gamma_q * cfg.t_g
    a, b = coeffs.alpha, coeffs.beta
    s = coeffs.s_scaled * cfg.omega**2 / (2 * cfg.v_rp**2)
    beta_pp = coeffs.beta_pp_scaled * cfg.omega**2 / (2 * cfg.v_rr**2)
    re_11 = (coeffs.r_11 + coeffs.r_11p) / 2

    p_qr = p_01 * g_r * a + p_11 * g_r * b * (1 - coeffs.r_11)
    # Decays to |01> that are re-driven to |0r> end as QB as well.
    p_qb = (p_01 * (g_b * a + (g_q / 2) * a * coeffs.r_01)
            + p_11 * (g_b * b * (1 - s) + g_q * b * re_11))
    p_rb = p_11 * g_r * b * coeffs.r_11
    p_rr = p_11 * (cfg.gamma_r * cfg.t_g) ** 2 * b * coeffs.beta_prime
    p_bb = p_11 * (2 * g_b * beta_pp + g_b * b * s)

    # Undetected decays back to Q (Pauli errors); the d/(d+1) factor
    # converts process-fidelity loss to average-gate-fidelity loss.
    stay = (p_01 * (g_q / 2) * a * (1 - coeffs.r_01)  # decay to |01>, not re-excited
            + p_01 * (g_q / 2) * a  # decay to |00>, never re-excited
            + p_11 * g_q * b * (1 - re_11))  # decay to |01> or |11>, staying
    p_e = p_qr + p_qb + p_rb + p_rr
    p_p = 0.8 * stay + no_jump_infidelity(p_e)
    return ChannelProbabilities(
        p_qr=p_qr, p_qb=p_qb, p_rb=p_rb, p_rr=p_rr, p_bb=p_bb, p_p=p_p)


def no_jump_infidelity(p_e: float) -> float:
    """Average gate infidelity from non-Hermitian no-jump back-action
    of the continuous erasure monitoring: approximately (p_e/4)^2."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must be a probability")
    return (p_e / 4) ** 2


@dataclass(frozen=True)
class BranchingInput:
    """Angular momenta for a radiative-decay branching-ratio estimate.

    The initial state has quantum numbers (l_i, s, j_i); each candidate
    final state is (j, l, omega) with omega the transition angular
    frequency. Rates follow omega^3 (2j+1)(2l_i+1) {l l_i 1; j_i j s}^2.
    """

    l_i: float
    s: float
    j_i: float
    finals: tuple[tuple[float, float, float], ...]  # (j, l, omega)

    def __post_init__(self):
        if not self.finals:
            raise ValueError("at least one final state required")
        for j, l, w in self.finals:
            if w <= 0:
                raise ValueError("transition frequencies must be positive")
            # 6-j triads of {l l_i 1; j_i j s}
            if not (triangle_ok(l, self.l_i, 1) and triangle_ok(l, j, self.s)
                    and triangle_ok(self.j_i, self.l_i, self.s)
                    and triangle_ok(self.j_i, j, 1)):
                raise ValueError(
                    f"angular momenta violate triangle rules: {(j, l)}")


def branching_ratios(inp: BranchingInput) -> np.ndarray:
    """Normalized decay fractions into each candidate final state."""
    rates = []
    for j, l, w in inp.finals:
        w6 = sixj(l, inp.l_i, 1, inp.j_i, j, inp.s)
        rates.append(w**3 * (2 * j + 1) * (2 * inp.l_i + 1) * w6**2)
    rates = np.asarray(rates, dtype=float)
    total = rates.sum()
    if total <= 0:
        raise ValueError("all candidate decays are forbidden")
    return rates / total


@dataclass(frozen=True)
class DetectionBudgetConfig:
    """Parameters of the fluorescence erasure-detection budget."""

    linewidth: float  # imaging transition linewidth Gamma_img (rad/s)
    wavelength: float  # imaging wavelength (m)
    mass: float  # atomic mass (kg)
    v_0: float = 0.0  # initial ion velocity from autoionization (m/s)
    e_field: float = 0.0  # stray electric field (V/m)
    charge: float = 1.602176634e-19  # ion charge (C)
    site_spacing: float = 3e-6  # tweezer array pitch (m)

    def __post_init__(self):
        if min(self.linewidth, self.wavelength, self.mass) <= 0:
            raise ValueError("linewidth, wavelength, and mass must be positive")

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def v_recoil(self) -> float:
        return HBAR * self.k / self.mass


def neutral_atom_spread(cfg: DetectionBudgetConfig, t: float) -> float:
    """RMS displacement of a free atom under recoil-diffusion imaging,
    sqrt(hbar^2 k^2 t^3 Gamma / (18 m^2))."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return math.sqrt(HBAR**2 * cfg.k**2 * t**3 * cfg.linewidth
                     / (18 * cfg.mass**2))


def ion_spread(cfg: DetectionBudgetConfig, n_ph: float) -> tuple[float, float]:
    """(ballistic displacement, field-drift displacement) of an ion that
    scatters n_ph photons at rate Gamma/2: 2 v_0 N_ph / Gamma, plus the
    drift (qE/2m)(2 N_ph/Gamma)^2 from a stray field."""
    if n_ph < 0:
        raise ValueError("n_ph must be >= 0")
    ballistic = 2 * cfg.v_0 * n_ph / cfg.linewidth
    drift = (cfg.charge * cfg.e_field / (2 * cfg.mass)) \
        * (2 * n_ph / cfg.linewidth) ** 2
    return ballistic, drift


@dataclass(frozen=True)
class CycleTimeConfig:
    """Timing of one error-correction cycle."""

    t_g: float  # two-qubit gate time
    t_e: float  # erasure-imaging time
    t_r: float = 0.0  # atom replacement time
    t_m: float = 0.0  # ancilla measurement time
    f_p: float = 1.0  # fraction of gates run in parallel

    def __post_init__(self):
        if not 0 < self.f_p <= 1:
            raise ValueError("f_p must be in (0, 1]")
        if min(self.t_g, self.t_e, self.t_r, self.t_m) < 0:
            raise ValueError("times must be >= 0")


def cycle_time(cfg: CycleTimeConfig) -> float:
    """Total duration of one cycle, (t_g + t_e)/f_p + t_r + t_m."""
    return (cfg.t_g + cfg.t_e) / cfg.f_p + cfg.t_r + cfg.t_m


# Spectroscopic data for the Yb 6s7s 3S1 -> 6s6p 3P_J example, as
# (J, L, omega) tuples; frequencies from the NIST level table in
# constants.py.
def yb_3s1_branching_input() -> BranchingInput:
    from .constants import YB_LEVELS_CM, cm_to_angular_frequency

    e_i = YB_LEVELS_CM["6s7s 3S1"]
    finals = tuple(
        (float(j), 1.0, cm_to_angular_frequency(e_i - YB_LEVELS_CM[f"6s6p 3P{j}"]))
        for j in (0, 1, 2)
    )
    return BranchingInput(l_i=0.0, s=1.0, j_i=1.0, finals=finals)
