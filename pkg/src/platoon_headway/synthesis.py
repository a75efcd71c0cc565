"""Minimum time headways and admissible (k_v, k_p) regions for ACC, CACC and CACC+."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from platoon_headway.gains import ControllerGains, DomainError, EffectiveGains, Mode, check_ka

#: Draw budget for rejection sampling before giving up.
SAMPLE_BUDGET = 1_000_000


def min_headway(mode: Mode | str, k_a: float, r: int = 1, tau0: float = 0.5) -> float:
    """Exclusive lower bound on the time headway for delays up to ``tau0``.

    ACC and CACC: ``2 tau0 / (1 + k_a)``. CACC+ with ``r`` predecessors:
    ``4 tau0 / ((1 + r)(1 + r k_a))``. Any headway strictly above the bound
    admits a non-empty gain region.

    Raises
    ------
    DomainError
        If ``k_a`` is outside the range required by the mode
        (``k_a = 0`` for ACC, ``[0, 1)`` for CACC, ``[0, 1/r)`` for CACC+).
    """
    mode = Mode.parse(mode) if isinstance(mode, str) else mode
    if not tau0 > 0:
        raise DomainError(f"tau0 must be positive, got {tau0}")
    check_ka(mode, k_a, r)
    if mode is Mode.CACC_PLUS:
        return 4.0 * tau0 / ((1 + r) * (1 + r * k_a))
    return 2.0 * tau0 / (1 + k_a)


@dataclass(frozen=True)
class GainRegion:
    """Intersection of an upper and a lower half-plane in the (k_v, k_p) quadrant.

    Members satisfy ``k_v/a1 + k_p/b1 <= rhs`` and ``k_v/a2 + k_p/b2 >= rhs``
    with ``k_v, k_p > 0``.
    """

    a1: float
    b1: float
    a2: float
    b2: float
    rhs: float
    feasible: bool

    def upper_sum(self, k_v, k_p):
        return k_v / self.a1 + k_p / self.b1

    def lower_sum(self, k_v, k_p):
        return k_v / self.a2 + k_p / self.b2


def to_effective(g: ControllerGains) -> EffectiveGains:
    """Scale CACC+ gains so the r-predecessor loop reads as a one-predecessor loop.

    ``k -> r k`` for the three feedback gains and ``h_w -> (1 + r) h_w / 2``;
    the identity when ``r = 1``.
    """
    r = g.r
    if r == 1:
        return EffectiveGains(g.k_a, g.k_v, g.k_p, g.h_w)
    return EffectiveGains(r * g.k_a, r * g.k_v, r * g.k_p, (1 + r) / 2 * g.h_w)


def _coefficients(k_a: float, h_w: float, tau0: float) -> tuple[float, float, float, float]:
    a1 = (1 - k_a**2) / (2 * tau0)
    a2 = (1 - k_a) / h_w
    return a1, a1 / h_w, a2, 2 * a2 / h_w


def gain_region(g: ControllerGains) -> GainRegion:
    """Admissible (k_v, k_p) region for the mode, headway and ``k_a`` of ``g``.

    The current ``k_v`` and ``k_p`` of ``g`` are ignored. For CACC+ the
    coefficients are computed on the r-scaled headway and feed-forward gain
    and the right-hand side becomes ``1/r``.
    """
    g.validate()
    bound = min_headway(g.mode, g.k_a, g.r, g.tau0)
    eff = to_effective(g)
    a1, b1, a2, b2 = _coefficients(eff.k_a, eff.h_w, g.tau0)
    return GainRegion(a1, b1, a2, b2, rhs=1.0 / g.r, feasible=bool(g.h_w > bound))


def region_contains(region: GainRegion, k_v: float, k_p: float) -> bool:
    if not (k_v > 0 and k_p > 0):
        return False
    return bool(region.upper_sum(k_v, k_p) <= region.rhs and region.lower_sum(k_v, k_p) >= region.rhs)


def sample_feasible_gains(region: GainRegion, n: int, seed: int) -> list[tuple[float, float]]:
    """Draw ``n`` members of ``region`` by rejection over ``[0, a1] x [0, max(b1, b2)]``.

    Deterministic for a given ``seed``. Raises :class:`DomainError` for an
    infeasible region and :class:`RuntimeError` if the draw budget runs out.
    """
    if not region.feasible:
        raise DomainError("cannot sample an infeasible gain region (headway at or below its bound)")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    kp_max = max(region.b1, region.b2)
    accepted: list[tuple[float, float]] = []
    drawn = 0
    batch = 4096
    while len(accepted) < n:
        if drawn >= SAMPLE_BUDGET:
            raise RuntimeError(f"rejection sampling found {len(accepted)}/{n} members in {SAMPLE_BUDGET} draws")
        size = min(batch, SAMPLE_BUDGET - drawn)
        k_v = rng.uniform(0.0, region.a1, size)
        k_p = rng.uniform(0.0, kp_max, size)
        drawn += size
        for kv, kp in zip(k_v.tolist(), k_p.tolist()):
            if region_contains(region, kv, kp):
                accepted.append((kv, kp))
                if len(accepted) == n:
                    break
    return accepted
