"""Fixed-step simulation of a platoon with pure input delay (or first-order lag).

States are integrated as deviations from the equilibrium trajectory in which
every vehicle cruises at ``v_init`` with zero spacing error. Absolute
positions are reconstructed afterwards, which keeps equilibrium exact and
makes the spacing, velocity and acceleration traces independent of where the
platoon starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from platoon_headway.gains import ConfigError, ControllerGains

DYNAMICS = ("pure_delay", "first_order_lag")
SPACING_REFERENCES = ("chain", "own")
TOL_AMP = 1e-3


@dataclass(frozen=True)
class LeadProfile:
    """Named lead-vehicle acceleration profile.

    ``paper-sine``: ``amplitude * sin(omega (t - t_start))`` on the open window
    ``(t_start, t_stop)``, zero elsewhere (defaults 0.5 m/s^2, 0.1 pi rad/s, 10 s, 30 s).
    ``constant``: ``value`` from ``t_start`` (default 0) until ``t_stop`` (default never).
    ``piecewise``: ``breakpoints = [[t0, a0], [t1, a1], ...]``, holding ``a_k`` on ``[t_k, t_{k+1})``.
    ``zero``: no perturbation.
    """

    name: str = "paper-sine"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        allowed = {
            "paper-sine": {"amplitude", "omega", "t_start", "t_stop"},
            "constant": {"value", "t_start", "t_stop"},
            "piecewise": {"breakpoints"},
            "zero": set(),
        }
        if self.name not in allowed:
            raise ConfigError(f"unknown lead profile {self.name!r}; expected one of {sorted(allowed)}")
        extra = set(self.params) - allowed[self.name]
        if extra:
            raise ConfigError(f"lead profile {self.name!r} does not take {sorted(extra)}")
        if self.name == "piecewise":
            bps = self.params.get("breakpoints")
            if not bps or any(len(bp) != 2 for bp in bps):
                raise ConfigError("piecewise profile needs breakpoints as a list of [t, a] pairs")
            times = [bp[0] for bp in bps]
            if times != sorted(times):
                raise ConfigError("piecewise breakpoints must be sorted by time")

    def __call__(self, t):
        return lead_profile_eval(self, t)


def lead_profile_eval(profile: LeadProfile, t):
    """Lead acceleration (m/s^2) at time(s) ``t``."""
    t_arr = np.asarray(t, dtype=float)
    p = profile.params
    if profile.name == "paper-sine":
        amp = p.get("amplitude", 0.5)
        omega = p.get("omega", 0.1 * math.pi)
        t0, t1 = p.get("t_start", 10.0), p.get("t_stop", 30.0)
        out = np.where((t_arr > t0) & (t_arr < t1), amp * np.sin(omega * (t_arr - t0)), 0.0)
    elif profile.name == "constant":
        t0, t1 = p.get("t_start", 0.0), p.get("t_stop", math.inf)
        out = np.where((t_arr >= t0) & (t_arr < t1), float(p.get("value", 0.0)), 0.0)
    elif profile.name == "piecewise":
        bps = p["breakpoints"]
        times = np.array([bp[0] for bp in bps], dtype=float)
        values = np.array([0.0] + [bp[1] for bp in bps], dtype=float)
        out = values[np.searchsorted(times, t_arr, side="right")]
    else:
        out = np.zeros_like(t_arr)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PlatoonScenario:
    """A lead vehicle followed by ``len(vehicles)`` controlled vehicles.

    ``vehicles[i - 1]`` holds the gains of follower ``i``; its ``r`` is the
    number of predecessors it listens to. ``spacing_reference`` selects the
    desired distance to the j-th predecessor in the look-ahead terms:
    ``"chain"`` sums the headways of the intervening followers,
    ``"own"`` uses ``j`` times the ego headway. Both coincide when all
    headways are equal.
    """

    vehicles: tuple[ControllerGains, ...]
    d: float = 5.0
    tau: float = 0.5
    v_init: float = 25.0
    lead: LeadProfile = field(default_factory=LeadProfile)
    dt: float = 0.01
    t_end: float = 80.0
    dynamics: str = "pure_delay"
    spacing_reference: str = "chain"
    x0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(self.vehicles))

    @property
    def n_followers(self) -> int:
        return len(self.vehicles)

    @property
    def headways(self) -> np.ndarray:
        """Per-vehicle headways with a zero placeholder for the lead at index 0."""
        return np.array([0.0] + [g.h_w for g in self.vehicles])

    def validate(self) -> None:
        if not self.vehicles:
            raise ConfigError("platoon needs at least one follower")
        for i, g in enumerate(self.vehicles, start=1):
            if g.r > i:
                raise ConfigError(f"r_i <= i violated: vehicle {i} has r = {g.r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not self.tau >= self.dt:
            raise ConfigError(f"tau must be at least dt, got tau = {self.tau}, dt = {self.dt}")
        if self.d < 0:
            raise ConfigError(f"standstill spacing d must be non-negative, got {self.d}")
        if self.dynamics not in DYNAMICS:
            raise ConfigError(f"dynamics must be one of {DYNAMICS}, got {self.dynamics!r}")
        if self.spacing_reference not in SPACING_REFERENCES:
            raise ConfigError(f"spacing_reference must be one of {SPACING_REFERENCES}, got {self.spacing_reference!r}")

    def initial_positions(self) -> np.ndarray:
        """Equilibrium positions: lead at ``x0``, each follower ``d + h_w v_init`` behind."""
        gaps = self.d + self.headways[1:] * self.v_init
        return self.x0 - np.concatenate([[0.0], np.cumsum(gaps)])


def _lookahead_headway(headways: np.ndarray, i: int, j: int, reference: str) -> float:
    if reference == "own":
        return j * headways[i]
    return float(sum(headways[i - m] for m in range(j)))


def control_law(
    i: int,
    x,
    v,
    a,
    gains: ControllerGains,
    d: float,
    headways=None,
    spacing_reference: str = "chain",
) -> float:
    """Commanded acceleration of follower ``i`` from absolute states.

    ``x``, ``v`` and ``a`` are indexed by vehicle with the lead at 0; ``a``
    holds realised accelerations. With ``r = 1`` this is the ACC/CACC law
    ``k_a a_{i-1} - k_v (v_i - v_{i-1}) - k_p delta_i``.
    """
    if headways is None:
        headways = np.full(len(x), gains.h_w)
    u = 0.0
    for j in range(1, gains.r + 1):
        spacing = x[i] - x[i - j] + j * d + _lookahead_headway(headways, i, j, spacing_reference) * v[i]
        u += gains.k_a * a[i - j] - gains.k_v * (v[i] - v[i - j]) - gains.k_p * spacing
    return u


@dataclass
class AmplificationSummary:
    peaks: list[float]
    kind: str
    passed: bool
    ratios: list[float]
    worst_vehicle: int
    tail_ratio: float

    def to_dict(self) -> dict:
        return {
            "peaks": list(self.peaks),
            "verdict_kind": self.kind,
            "passed": self.passed,
            "ratios": list(self.ratios),
            "worst_vehicle": self.worst_vehicle,
            "tail_ratio": self.tail_ratio,
            "tolerance": TOL_AMP,
            "note": "time-domain proxy for string stability",
        }


@dataclass
class SimulationTrace:
    """Sampled states; column 0 of ``x, v, a, u`` is the lead, ``delta[:, i-1]`` is follower ``i``."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    u: np.ndarray
    delta: np.ndarray
    headways: np.ndarray
    d: float
    lookahead: list[int]
    summary: AmplificationSummary | None = None

    @property
    def n_followers(self) -> int:
        return self.delta.shape[1]


def amplification_metrics(trace: SimulationTrace, kind: str | None = None) -> AmplificationSummary:
    """Peak spacing errors and the empirical amplification verdict.

    ``chain`` (one predecessor everywhere): each peak may not exceed the
    previous one by more than ``TOL_AMP`` relative. ``platoon`` (some vehicle
    looks further ahead): no peak behind follower 1 may exceed follower 1's.
    """
    if kind is None:
        kind = "platoon" if max(trace.lookahead) > 1 else "chain"
    peaks = np.max(np.abs(trace.delta), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(peaks[:-1] > 0, peaks[1:] / peaks[:-1], np.where(peaks[1:] > 0, np.inf, 0.0))
    if kind == "chain":
        ok = peaks[1:] <= peaks[:-1] * (1 + TOL_AMP)
        passed = bool(np.all(ok))
        worst = int(np.argmax(ratios)) + 2 if len(ratios) else 1
    elif kind == "platoon":
        passed = bool(len(peaks) < 2 or np.max(peaks[1:]) <= peaks[0] * (1 + TOL_AMP))
        worst = int(np.argmax(peaks[1:])) + 2 if len(peaks) > 1 else 1
    else:
        raise ValueError(f"unknown verdict kind {kind!r}")
    tail = float(peaks[-1] / peaks[0]) if peaks[0] > 0 else (0.0 if peaks[-1] == 0 else math.inf)
    return AmplificationSummary(
        peaks=peaks.tolist(), kind=kind, passed=passed, ratios=ratios.tolist(), worst_vehicle=worst, tail_ratio=tail
    )


def simulate(scenario: PlatoonScenario) -> SimulationTrace:
    """Integrate the platoon from equilibrium with zero control history on ``[-tau, 0]``.

    Each step holds the realised acceleration constant:
    ``v <- v + a dt`` and ``x <- x + v dt + a dt^2 / 2``. Under pure delay the
    realised acceleration is the control issued ``tau`` earlier, read from
    the history by linear interpolation (exact when ``tau / dt`` is an integer).
    """
    scenario.validate()
    n_f = scenario.n_followers
    dt = scenario.dt
    n_steps = int(round(scenario.t_end / dt))
    t = np.arange(n_steps + 1) * dt
    h = scenario.headways
    ref = scenario.spacing_reference

    k_a = np.array([0.0] + [g.k_a for g in scenario.vehicles])
    k_v = np.array([0.0] + [g.k_v for g in scenario.vehicles])
    k_p = np.array([0.0] + [g.k_p for g in scenario.vehicles])
    r = np.array([0] + [g.r for g in scenario.vehicles])
    r_max = int(r.max())

    # per look-ahead j: participating followers, their j-th predecessor,
    # the headway multiplying v_i and the equilibrium offset of the spacing term
    terms = []
    for j in range(1, r_max + 1):
        idx = np.array([i for i in range(1, n_f + 1) if r[i] >= j])
        G = np.array([_lookahead_headway(h, i, j, ref) for i in idx])
        chain = np.array([_lookahead_headway(h, i, j, "chain") for i in idx])
        terms.append((idx, idx - j, G, scenario.v_init * (G - chain)))

    q = scenario.tau / dt
    q_int = int(round(q))
    integer_delay = abs(q - q_int) < 1e-9
    lag_decay = math.exp(-dt / scenario.tau)

    lead_acc = lead_profile_eval(scenario.lead, t)

    p = np.zeros(n_f + 1)
    w = np.zeros(n_f + 1)
    acc = np.zeros(n_f + 1)
    P = np.zeros((n_steps + 1, n_f + 1))
    W = np.zeros_like(P)
    A = np.zeros_like(P)
    U = np.zeros_like(P)

    for n in range(n_steps + 1):
        if scenario.dynamics == "pure_delay":
            if integer_delay:
                m = n - q_int
                acc[1:] = U[m, 1:] if m >= 0 else 0.0
            else:
                s = n - q
                i0 = math.floor(s)
                f = s - i0
                lo = U[i0, 1:] if i0 >= 0 else 0.0
                hi = U[i0 + 1, 1:] if i0 + 1 >= 0 else 0.0
                acc[1:] = (1 - f) * lo + f * hi
        acc[0] = lead_acc[n]

        u = np.zeros(n_f + 1)
        for idx, pred, G, offset in terms:
            u[idx] += (
                k_a[idx] * acc[pred]
                - k_v[idx] * (w[idx] - w[pred])
                - k_p[idx] * (p[idx] - p[pred] + G * w[idx] + offset)
            )
        u[0] = acc[0]

        P[n], W[n], A[n], U[n] = p, w, acc, u

        p = p + w * dt + acc * (0.5 * dt * dt)
        w = w + acc * dt
        if scenario.dynamics == "first_order_lag":
            acc = acc.copy()
            acc[1:] = acc[1:] * lag_decay + (1 - lag_decay) * u[1:]

    x = scenario.initial_positions()[None, :] + scenario.v_init * t[:, None] + P
    delta = P[:, 1:] - P[:, :-1] + h[None, 1:] * W[:, 1:]
    trace = SimulationTrace(
        t=t, x=x, v=scenario.v_init + W, a=A, u=U, delta=delta,
        headways=h, d=scenario.d, lookahead=[int(v) for v in r[1:]],
    )
    trace.summary = amplification_metrics(trace)
    return trace
