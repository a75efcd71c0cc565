"""Controller gain containers and the package's exception types."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DomainError(ValueError):
    """A gain or headway lies outside the range a bound was derived for."""


class ConfigError(ValueError):
    """A scenario or command-line configuration is malformed or inconsistent."""


class CharacteristicRootError(ArithmeticError):
    """The characteristic quasi-polynomial vanishes on the imaginary axis.

    Raised when ``|D(jw)|`` is zero at a sampled frequency, which means the
    closed loop has a root at ``s = jw`` and cannot be internally stable.
    """

    def __init__(self, omega: float, tau: float):
        super().__init__(f"characteristic root on the imaginary axis at omega={omega!r}, tau={tau!r}")
        self.omega = omega
        self.tau = tau


class Mode(str, enum.Enum):
    ACC = "acc"
    CACC = "cacc"
    CACC_PLUS = "cacc+"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        key = text.strip().lower().replace("_", "").replace("-", "")
        aliases = {"acc": cls.ACC, "cacc": cls.CACC, "cacc+": cls.CACC_PLUS, "caccplus": cls.CACC_PLUS}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown controller mode {text!r}; expected acc, cacc or cacc+") from None


def ka_upper_bound(mode: Mode, r: int = 1) -> float:
    """Exclusive upper bound on the acceleration feed-forward gain for ``mode``."""
    if mode is Mode.CACC_PLUS:
        return 1.0 / r
    return 1.0


def check_ka(mode: Mode, k_a: float, r: int = 1) -> None:
    """Raise :class:`DomainError` unless ``k_a`` is admissible for ``mode``."""
    if mode is Mode.ACC:
        if k_a != 0:
            raise DomainError(f"ACC requires k_a = 0, got {k_a}")
        if r != 1:
            raise DomainError(f"ACC uses a single predecessor (r = 1), got r = {r}")
        return
    if mode is Mode.CACC and r != 1:
        raise DomainError(f"CACC uses a single predecessor (r = 1), got r = {r}; use cacc+")
    if mode is Mode.CACC_PLUS and r < 2:
        raise DomainError(f"CACC+ requires r >= 2, got r = {r}")
    bound = ka_upper_bound(mode, r)
    if not 0 <= k_a < bound:
        if mode is Mode.CACC_PLUS:
            raise DomainError(f"CACC+ string stability needs 0 <= k_a < 1/r = {bound:.6g}, got k_a = {k_a}")
        raise DomainError(f"CACC string stability needs 0 <= k_a < 1, got k_a = {k_a}")


@dataclass(frozen=True)
class ControllerGains:
    """Gains of one follower's control law and the delay bound they are designed for.

    ``r = 1`` with ``k_a = 0`` is ACC, ``r = 1`` with ``k_a > 0`` is CACC and
    ``r >= 2`` is CACC+. Construction only enforces sign constraints; the
    mode-specific ``k_a`` range is checked by the synthesis routines, so that
    gains outside it (``k_a = 1`` for instance) can still be analysed.
    """

    k_a: float
    k_v: float
    k_p: float
    h_w: float
    tau0: float
    r: int = 1

    def __post_init__(self):
        for name in ("k_a", "k_v", "k_p", "h_w", "tau0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.k_a < 0:
            raise DomainError(f"k_a must be non-negative, got {self.k_a}")
        for name in ("k_v", "k_p", "h_w", "tau0"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise DomainError(f"r must be a positive integer, got {self.r}")
        object.__setattr__(self, "r", int(self.r))

    @property
    def mode(self) -> Mode:
        if self.r >= 2:
            return Mode.CACC_PLUS
        return Mode.ACC if self.k_a == 0 else Mode.CACC

    @property
    def gamma(self) -> float:
        """Composite velocity gain ``k_v + h_w * k_p``."""
        return self.k_v + self.h_w * self.k_p

    def validate(self) -> None:
        check_ka(self.mode, self.k_a, self.r)

    def replace(self, **changes) -> "ControllerGains":
        fields = {k: getattr(self, k) for k in ("k_a", "k_v", "k_p", "h_w", "tau0", "r")}
        fields.update(changes)
        return ControllerGains(**fields)


@dataclass(frozen=True)
class EffectiveGains:
    """r-scaled gains that reduce a CACC+ loop to the single-predecessor form."""

    k_a: float
    k_v: float
    k_p: float
    h_w: float

    @property
    def gamma(self) -> float:
        return self.k_v + self.h_w * self.k_p
