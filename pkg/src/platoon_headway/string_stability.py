"""Spacing-error propagation magnitude, robust string-stability sweeps and k_a necessity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from platoon_headway.gains import CharacteristicRootError, ControllerGains, ka_upper_bound
from platoon_headway.synthesis import to_effective

PASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FrequencyGrid:
    """Discretisation of the frequency axis and of the delay interval ``(0, tau0]``."""

    omega_min: float = 1e-3
    omega_max: float = 1e3
    omega_points: int = 4000
    spacing: str = "log"
    tau_points: int = 50

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValueError(f"need 0 < omega_min < omega_max, got {self.omega_min}, {self.omega_max}")
        if self.omega_points < 2:
            raise ValueError("omega_points must be at least 2")
        if self.tau_points < 1:
            raise ValueError("tau_points must be at least 1")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")

    def omegas(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.omega_min), math.log10(self.omega_max), self.omega_points)
        return np.linspace(self.omega_min, self.omega_max, self.omega_points)

    def taus(self, tau0: float) -> np.ndarray:
        """``tau_points`` equally spaced delays ending at ``tau0``; zero excluded."""
        return np.linspace(tau0 / self.tau_points, tau0, self.tau_points)


@dataclass
class SweepReport:
    sup_magnitude: float
    argmax_omega: float
    argmax_tau: float
    passed: bool
    margin: float
    tail_limit: float
    tail_ok: bool
    scaled: bool = False
    omegas: np.ndarray | None = field(default=None, repr=False)
    taus: np.ndarray | None = field(default=None, repr=False)
    magnitude: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "sup_magnitude": self.sup_magnitude,
            "argmax_omega": self.argmax_omega,
            "argmax_tau": self.argmax_tau,
            "passed": self.passed,
            "margin": self.margin,
            "tail_limit": self.tail_limit,
            "tail_ok": self.tail_ok,
            "scaled_by_r": self.scaled,
        }


def _magnitude_sq(k_a, k_v, k_p, gamma, omega, tau):
    w2 = omega * omega
    num = k_a**2 * w2 * w2 + (k_v**2 - 2 * k_a * k_p) * w2 + k_p**2
    tw = tau * omega
    den = w2 * w2 + gamma**2 * w2 - 2 * gamma * w2 * omega * np.sin(tw) + k_p**2 - 2 * k_p * w2 * np.cos(tw)
    return num, den


def h_magnitude_sq(g: ControllerGains, omega, tau):
    """``|H(jw; tau)|**2`` from the closed-form quotient.

    For CACC+ gains (``r >= 2``) the returned value is ``|r H_j(jw; tau)|**2``,
    evaluated through the r-scaled gains. ``omega`` and ``tau`` broadcast
    against each other; ``omega == 0`` yields exactly 1.

    Raises
    ------
    CharacteristicRootError
        If the denominator ``|D(jw)|**2`` vanishes at some sample.
    """
    eff = to_effective(g)
    omega_arr = np.asarray(omega, dtype=float)
    tau_arr = np.asarray(tau, dtype=float)
    num, den = _magnitude_sq(eff.k_a, eff.k_v, eff.k_p, eff.gamma, omega_arr, tau_arr)
    num, den = np.broadcast_arrays(num, den)
    zero = omega_arr == 0
    # |D|^2 is a sum of squares; a value at rounding level means a root on the axis
    scale = np.broadcast_to(omega_arr**4 + eff.gamma**2 * omega_arr**2 + eff.k_p**2, den.shape)
    bad = (den <= 1e-14 * scale) & ~np.broadcast_to(zero, den.shape)
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(bad)), den.shape)
        w_b, t_b = np.broadcast_arrays(omega_arr, tau_arr)
        raise CharacteristicRootError(float(w_b[idx]), float(t_b[idx]))
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(np.broadcast_to(zero, den.shape), 1.0, num / den)
    if value.ndim == 0:
        return float(value)
    return value


def sufficient_condition(g: ControllerGains, tau: float | None = None) -> tuple[float, float, bool]:
    """Slack of the two delay-robust sufficient inequalities at ``tau`` (default ``tau0``).

    Returns ``(1 - k_a**2 - 2 gamma tau, gamma**2 - 2 k_p + 2 k_a k_p - k_v**2, holds)``
    on the r-scaled gains. Both slacks decrease with ``tau``, so a pass at
    ``tau0`` covers every delay in ``(0, tau0]``.
    """
    tau = g.tau0 if tau is None else tau
    eff = to_effective(g)
    gamma = eff.gamma
    lhs1 = 1 - eff.k_a**2 - 2 * gamma * tau
    lhs2 = gamma**2 - 2 * eff.k_p + 2 * eff.k_a * eff.k_p - eff.k_v**2
    return lhs1, lhs2, bool(lhs1 >= 0 and lhs2 >= 0)


def robust_sweep(g: ControllerGains, grid: FrequencyGrid | None = None, keep_surface: bool = False) -> SweepReport:
    """Supremum of ``|H|`` (``|rH|`` for CACC+) over the frequency/delay grid.

    The grid covers a finite band only; ``tail_limit`` is the high-frequency
    limit of the magnitude (the effective ``k_a``), which has to stay below
    one for the finite ``omega_max`` to be meaningful.
    """
    grid = grid or FrequencyGrid()
    omegas = grid.omegas()
    taus = grid.taus(g.tau0)
    mag = np.sqrt(h_magnitude_sq(g, omegas[None, :], taus[:, None]))
    it, iw = np.unravel_index(int(np.argmax(mag)), mag.shape)
    sup = float(mag[it, iw])
    tail = to_effective(g).k_a
    report = SweepReport(
        sup_magnitude=sup,
        argmax_omega=float(omegas[iw]),
        argmax_tau=float(taus[it]),
        passed=bool(sup <= 1 + PASS_TOLERANCE),
        margin=1 - sup,
        tail_limit=tail,
        tail_ok=bool(tail < 1),
        scaled=g.r > 1,
    )
    if keep_surface:
        report.omegas, report.taus, report.magnitude = omegas, taus, mag
    return report


def counterexample_k(g: ControllerGains, tau: float) -> int:
    """Smallest non-negative integer above ``(gamma^2 - k_v^2 + 2 k_p) tau / (4 pi gamma) - 1/4``."""
    gamma = g.gamma
    bound = (gamma**2 - g.k_v**2 + 2 * g.k_p) * tau / (4 * math.pi * gamma) - 0.25
    return max(0, math.floor(bound) + 1)


def counterexample_frequency(g: ControllerGains, tau: float) -> float:
    """Frequency at which ``|H| > 1`` once ``k_a`` is raised to 1.

    ``tau * omega`` lands on ``pi/2 + 2 k pi`` so that the delay term of the
    denominator is as small as it gets; ``k`` is taken large enough for the
    denominator to drop below the numerator. ``g.k_a`` is ignored.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    k = counterexample_k(g, tau)
    return math.pi / (2 * tau) + 2 * k * math.pi / tau


def ka_necessity_check(g: ControllerGains) -> bool:
    """True iff ``k_a`` is strictly below 1 (CACC) or ``1/r`` (CACC+)."""
    return bool(g.k_a < ka_upper_bound(g.mode, g.r))
