"""Interlacing certificate for the delayed closed loop ``D(s) = s^2 e^{tau s} + gamma s + k_p``.

With ``theta = tau * omega`` the real and imaginary parts of ``tau^2 D(j omega)``
are ``k_p_bar - theta^2 cos(theta)`` and ``gamma_bar theta - theta^2 sin(theta)``.
Inside the regime ``k_p_bar < 4/27``, ``gamma_bar <= 1/2`` each positive root
sits alone in a known bracket, so the roots are found by bisection and the
interlacing and root-count conditions are checked on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from platoon_headway.gains import ControllerGains
from platoon_headway.synthesis import to_effective

PI = math.pi
KP_BAR_LIMIT = 4.0 / 27.0
GAMMA_BAR_LIMIT = 0.5
BISECTION_WIDTH = 1e-13
RESIDUAL_TOL = 1e-10
CONDITION_B_MARGIN = 1e-15


class BracketError(ArithmeticError):
    """A prescribed root bracket does not show the expected sign change."""

    def __init__(self, part: str, bracket: tuple[float, float], detail: str):
        lo, hi = bracket
        super().__init__(f"{part} bracket ({lo:.6g}, {hi:.6g}): {detail}")
        self.part = part
        self.bracket = bracket


@dataclass(frozen=True)
class QuasiPolyParams:
    gamma_bar: float
    kp_bar: float
    tau: float

    def __post_init__(self):
        if not (self.gamma_bar > 0 and self.kp_bar > 0):
            raise ValueError(f"gamma_bar and kp_bar must be positive, got {self.gamma_bar}, {self.kp_bar}")

    @classmethod
    def from_gains(cls, g: ControllerGains, tau: float | None = None) -> "QuasiPolyParams":
        """Normalise ``g`` at delay ``tau`` (default ``tau0``); CACC+ gains are r-scaled first."""
        tau = g.tau0 if tau is None else tau
        eff = to_effective(g)
        return cls(gamma_bar=tau * eff.gamma, kp_bar=tau * tau * eff.k_p, tau=tau)


@dataclass
class RootList:
    real: list[float]
    imag: list[float]
    window_count: int


@dataclass
class InterlacingReport:
    params: QuasiPolyParams
    roots: RootList | None
    interlaced: bool
    count_check: bool
    condition_b_value: float
    kp_ok: bool
    gamma_ok: bool
    first_pair_margin: float
    stable: bool
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "gamma_bar": self.params.gamma_bar,
            "kp_bar": self.params.kp_bar,
            "tau": self.params.tau,
            "kp_ok": self.kp_ok,
            "gamma_ok": self.gamma_ok,
            "interlaced": self.interlaced,
            "count_check": self.count_check,
            "condition_b_at_zero": self.condition_b_value,
            "first_pair_margin": self.first_pair_margin,
            "stable": self.stable,
            "verdict": self.verdict,
            "real_roots": list(self.roots.real) if self.roots else [],
            "imag_roots": list(self.roots.imag) if self.roots else [],
            "l_max": self.roots.window_count if self.roots else 0,
            "notes": list(self.notes),
        }


def quasipoly_parts(p: QuasiPolyParams, theta):
    """``(D_r, D_i)`` at ``theta``; accepts scalars or arrays."""
    theta = np.asarray(theta, dtype=float)
    t2 = theta * theta
    dr = p.kp_bar - t2 * np.cos(theta)
    di = p.gamma_bar * theta - t2 * np.sin(theta)
    if theta.ndim == 0:
        return float(dr), float(di)
    return dr, di


def bound_checks(p: QuasiPolyParams) -> tuple[bool, bool]:
    return bool(p.kp_bar < KP_BAR_LIMIT), bool(p.gamma_bar <= GAMMA_BAR_LIMIT)


def _reduced_real(p: QuasiPolyParams, theta: float) -> float:
    if theta == 0:
        return math.inf
    return p.kp_bar / (theta * theta) - math.cos(theta)


def _reduced_imag(p: QuasiPolyParams, theta: float) -> float:
    if theta == 0:
        return math.inf
    return p.gamma_bar / theta - math.sin(theta)


# (lo, hi, sign at lo, sign at hi) for the reduced equations
def real_brackets(l_max: int) -> list[tuple[float, float, int, int]]:
    """Brackets holding exactly one positive root of ``D_r`` each, up to ``2 l_max pi + pi/4``."""
    out = [(0.0, PI / 4, 1, -1)]
    for m in range(l_max):
        out.append((PI / 4 + 2 * m * PI, PI / 2 + 2 * m * PI, -1, 1))
        out.append((3 * PI / 2 + 2 * m * PI, 7 * PI / 4 + 2 * m * PI, 1, -1))
    return out


def imag_brackets(l_max: int) -> list[tuple[float, float, int, int]]:
    """Brackets holding exactly one positive root of ``D_i`` each, up to ``2 l_max pi + pi/4``."""
    out = [(0.0, PI / 4, 1, -1)]
    for m in range(l_max):
        out.append((3 * PI / 4 + 2 * m * PI, PI + 2 * m * PI, -1, 1))
        out.append((2 * (m + 1) * PI, PI / 4 + 2 * (m + 1) * PI, 1, -1))
    return out


def _sign(x: float) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


def _solve_bracket(
    part: str,
    reduced: Callable[[float], float],
    full: Callable[[float], float],
    full_prime: Callable[[float], float],
    bracket: tuple[float, float, int, int],
) -> float:
    lo, hi, s_lo, s_hi = bracket
    f_lo, f_hi = reduced(lo), reduced(hi)
    if _sign(f_lo) != s_lo or _sign(f_hi) != s_hi:
        raise BracketError(
            part, (lo, hi), f"expected signs ({s_lo:+d}, {s_hi:+d}), found ({f_lo:.3g}, {f_hi:.3g})"
        )
    a, b = lo, hi
    while b - a > BISECTION_WIDTH:
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        f_mid = reduced(mid)
        if f_mid == 0:
            a = b = mid
            break
        if _sign(f_mid) == s_lo:
            a = mid
        else:
            b = mid
    root = 0.5 * (a + b)
    # one Newton step on the unreduced part, kept only if it helps and stays put
    d = full_prime(root)
    if d != 0:
        cand = root - full(root) / d
        if lo < cand < hi and abs(full(cand)) < abs(full(root)):
            root = cand
    if abs(full(root)) >= RESIDUAL_TOL:
        raise BracketError(part, (lo, hi), f"residual {full(root):.3g} above {RESIDUAL_TOL:g}")
    return root


def find_roots_real(p: QuasiPolyParams, l_max: int = 3) -> list[float]:
    """Sorted positive roots of ``D_r`` up to ``2 l_max pi + pi/4``."""

    def full(t):
        return p.kp_bar - t * t * math.cos(t)

    def full_prime(t):
        return -2 * t * math.cos(t) + t * t * math.sin(t)

    return [
        _solve_bracket("real-part", lambda t: _reduced_real(p, t), full, full_prime, br)
        for br in real_brackets(l_max)
    ]


def find_roots_imag(p: QuasiPolyParams, l_max: int = 3) -> list[float]:
    """Sorted non-negative roots of ``D_i`` up to ``2 l_max pi + pi/4``, starting with 0."""

    def full(t):
        return p.gamma_bar * t - t * t * math.sin(t)

    def full_prime(t):
        return p.gamma_bar - 2 * t * math.sin(t) - t * t * math.cos(t)

    positive = [
        _solve_bracket("imaginary-part", lambda t: _reduced_imag(p, t), full, full_prime, br)
        for br in imag_brackets(l_max)
    ]
    return [0.0] + positive


def interlacing_check(rl: RootList) -> bool:
    """Strict alternation ``0 = i_1 < r_1 < i_2 < r_2 < ...`` over the computed roots."""
    real, imag = rl.real, rl.imag
    if not real or not imag or imag[0] != 0.0:
        return False
    merged = []
    for k in range(max(len(real), len(imag))):
        if k < len(imag):
            merged.append(imag[k])
        if k < len(real):
            merged.append(real[k])
    if len(imag) not in (len(real), len(real) + 1):
        return False
    return all(a < b for a, b in zip(merged, merged[1:]))


def window_counts(rl: RootList, l: int) -> tuple[int, int]:
    """Number of real roots of ``D_r`` and ``D_i`` in ``[-2 l pi + pi/4, 2 l pi + pi/4]``.

    Negative roots are the mirror images of the positive ones. ``l = 0`` is
    read as the symmetric window ``[-pi/4, pi/4]``.
    """
    if l == 0:
        lo, hi = -PI / 4, PI / 4
    else:
        lo, hi = -2 * l * PI + PI / 4, 2 * l * PI + PI / 4

    def count(positive: list[float], has_zero: bool) -> int:
        n = int(has_zero and lo <= 0 <= hi)
        n += sum(1 for t in positive if lo <= t <= hi)
        n += sum(1 for t in positive if lo <= -t <= hi)
        return n

    return count(rl.real, False), count([t for t in rl.imag if t > 0], 0.0 in rl.imag)


def root_count_window(rl: RootList, l: int) -> bool:
    """True iff both parts have exactly ``4 l + 2`` real roots in the ``l``-th window."""
    if l < 1:
        raise ValueError("window index l must be at least 1")
    if l > rl.window_count:
        raise ValueError(f"roots only computed up to l_max={rl.window_count}, asked for l={l}")
    n_real, n_imag = window_counts(rl, l)
    return n_real == 4 * l + 2 and n_imag == 4 * l + 2


def condition_b(g: ControllerGains, tau: float, omega):
    """``D_i'(w) D_r(w) - D_i(w) D_r'(w)`` for ``tau^2 D(jw)``; equals ``tau^4 gamma k_p`` at zero.

    CACC+ gains are r-scaled first.
    """
    eff = to_effective(g)
    gamma, k_p = eff.gamma, eff.k_p
    w = np.asarray(omega, dtype=float)
    tw = tau * w
    value = (
        tau**4 * gamma * k_p
        + tau**5 * w**4
        - tau**3 * w * (2 * tau * k_p + tau**2 * gamma * w**2) * np.sin(tw)
        + tau**4 * w**2 * (gamma - tau * k_p) * np.cos(tw)
    )
    if value.ndim == 0:
        return float(value)
    return value


def first_pair_bound(p: QuasiPolyParams) -> tuple[float, float]:
    """Upper estimate of the first real-part root and lower estimate of the second imaginary-part root."""
    # 1 - sqrt(1 - 2k) written without cancellation for small k
    return math.sqrt(2 * p.kp_bar / (1 + math.sqrt(1 - 2 * p.kp_bar))), math.sqrt(p.gamma_bar)


def certify_internal(g: ControllerGains, tau: float | None = None, l_max: int = 3) -> InterlacingReport:
    """Run the full interlacing certificate for ``g`` at delay ``tau`` (default ``tau0``).

    Verdicts: ``"stable"`` when every check passes; ``"not-certified"`` when
    the parameters leave the regime in which the root brackets are proven
    (no claim either way); ``"unstable"`` when the brackets apply but
    interlacing, counting or condition (B) fails.
    """
    tau = g.tau0 if tau is None else tau
    p = QuasiPolyParams.from_gains(g, tau)
    kp_ok, gamma_ok = bound_checks(p)
    cb = condition_b(g, tau, 0.0)
    notes = ["condition (B) at zero frequency is evaluated from the full expression and equals tau^4 gamma k_p"]
    if not (kp_ok and gamma_ok):
        notes.append(
            f"outside the proven regime (kp_bar={p.kp_bar:.6g} vs 4/27, gamma_bar={p.gamma_bar:.6g} vs 1/2)"
        )
        return InterlacingReport(
            params=p, roots=None, interlaced=False, count_check=False, condition_b_value=cb,
            kp_ok=kp_ok, gamma_ok=gamma_ok, first_pair_margin=math.nan, stable=False,
            verdict="not-certified", notes=notes,
        )
    rl = RootList(real=find_roots_real(p, l_max), imag=find_roots_imag(p, l_max), window_count=l_max)
    interlaced = interlacing_check(rl)
    count_ok = all(root_count_window(rl, l) for l in range(1, l_max + 1)) if l_max >= 1 else True
    stable = interlaced and count_ok and cb > CONDITION_B_MARGIN
    return InterlacingReport(
        params=p, roots=rl, interlaced=interlaced, count_check=count_ok, condition_b_value=cb,
        kp_ok=kp_ok, gamma_ok=gamma_ok, first_pair_margin=p.gamma_bar - first_pair_bound(p)[0] ** 2,
        stable=stable, verdict="stable" if stable else "unstable", notes=notes,
    )


@dataclass
class ConditionBCurve:
    omega: np.ndarray
    value: np.ndarray
    tau: float

    @property
    def min_value(self) -> float:
        return float(np.min(self.value))


def condition_b_curve(g: ControllerGains, tau: float | None = None, omega_max: float = 20.0, n: int = 2001) -> ConditionBCurve:
    """Condition (B) sampled on ``[0, omega_max]`` for plotting."""
    tau = g.tau0 if tau is None else tau
    omega = np.linspace(0.0, omega_max, n)
    return ConditionBCurve(omega=omega, value=condition_b(g, tau, omega), tau=tau)
