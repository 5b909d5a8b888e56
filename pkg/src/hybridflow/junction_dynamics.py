"""Flux laws coupling lanes at linear, diverge, and merge junctions.

All fluxes are built from upstream demands d and downstream supplies s:

    linear:   g1 = f2 = gate * min(d1, s2)
    diverge:  g0 = gate * min(d0, s1/xi1, s2/xi2);  f1 = xi1*g0;  f2 = xi2*g0
    merge:    f3 = min(d1 + d2, s3)
              g1 = min(d1, max(s3 - d2, c1/(c1+c2) * s3))
              g2 = f3 - g1

The gate factor is 1/0 for a green/red signal and psi/1 for an occupied/empty
bus stop; a stop slows flow rather than halting it, so 0 < psi < 1.

Merge conservation g1 + g2 == f3 is kept exact in float arithmetic: the
uncongested case returns (d1 + d2, d1, d2) directly, and the congested case
pairs g1 with its complement through a subtraction in [f3/2, f3], which is
exact (Sterbenz), shifting g1 by at most one ulp off the min/max formula.

Functions accept scalars or numpy arrays elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ParamError
from .fundamental_diagram import LinkParams

__all__ = [
    "SignalPhase",
    "StopState",
    "TurnRatios",
    "MergeCapacities",
    "signal_factor",
    "stop_factor",
    "linear_flux",
    "diverge_flux",
    "merge_flux",
    "link_density_rate",
]


class SignalPhase(Enum):
    GREEN = "green"
    RED = "red"


@dataclass(frozen=True)
class StopState:
    """Bus-stop occupancy with its slowdown factor psi in (0, 1)."""

    occupied: bool
    psi: float

    def __post_init__(self) -> None:
        if not 0.0 < self.psi < 1.0:
            raise ParamError(f"psi must lie strictly in (0, 1), got {self.psi!r}")


@dataclass(frozen=True)
class TurnRatios:
    """Split probabilities at a diverge; xi1 + xi2 = 1 so vehicles are conserved."""

    xi1: float
    xi2: float

    def __post_init__(self) -> None:
        if self.xi1 < 0.0 or self.xi2 < 0.0:
            raise ParamError(f"turn ratios must be nonnegative, got ({self.xi1}, {self.xi2})")
        if abs(self.xi1 + self.xi2 - 1.0) > 1e-12:
            raise ParamError(f"turn ratios must sum to 1, got {self.xi1} + {self.xi2}")


@dataclass(frozen=True)
class MergeCapacities:
    """Upstream capacities setting the priority split of a congested merge."""

    c1: float
    c2: float

    def __post_init__(self) -> None:
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ParamError(f"merge capacities must be > 0, got ({self.c1}, {self.c2})")


def signal_factor(phase: SignalPhase) -> float:
    """Flux multiplier of a signal: green passes, red blocks."""
    return 1.0 if phase is SignalPhase.GREEN else 0.0


def stop_factor(stop: StopState) -> float:
    """Flux multiplier of a bus stop: empty passes, occupied slows to psi."""
    return stop.psi if stop.occupied else 1.0


def _check_nonnegative(**values) -> None:
    for name, value in values.items():
        arr = np.asarray(value, dtype=float)
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


def _scalarize(out, *inputs):
    if all(np.isscalar(x) or getattr(x, "ndim", 1) == 0 for x in inputs):
        return tuple(float(o) for o in out) if isinstance(out, tuple) else float(out)
    return out


def linear_flux(d1, s2, gate):
    """Flux through a linear junction: gate * min(demand, supply)."""
    _check_nonnegative(d1=d1, s2=s2)
    g = np.asarray(gate, dtype=float)
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise DomainError(f"gate must lie in [0, 1], got {gate!r}")
    out = g * np.minimum(d1, s2)
    return _scalarize(out, d1, s2, gate)


def diverge_flux(d0, s1, s2, ratios: TurnRatios, gate):
    """Fluxes at a one-to-two diverge.

    Returns (g0, f1, f2) with g0 = gate * min(d0, s1/xi1, s2/xi2) and
    f_i = xi_i * g0. A zero turn ratio removes its arm from the min (that
    branch receives nothing and can never bind).
    """
    _check_nonnegative(d0=d0, s1=s1, s2=s2)
    g = np.asarray(gate, dtype=float)
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise DomainError(f"gate must lie in [0, 1], got {gate!r}")
    arm1 = np.divide(s1, ratios.xi1) if ratios.xi1 > 0.0 else np.full_like(np.asarray(s1, dtype=float), np.inf)
    arm2 = np.divide(s2, ratios.xi2) if ratios.xi2 > 0.0 else np.full_like(np.asarray(s2, dtype=float), np.inf)
    g0 = g * np.minimum(np.asarray(d0, dtype=float), np.minimum(arm1, arm2))
    f1 = ratios.xi1 * g0
    f2 = ratios.xi2 * g0
    return _scalarize((g0, f1, f2), d0, s1, s2, gate)


def merge_flux(d1, d2, s3, caps: MergeCapacities):
    """Fluxes at a two-to-one merge.

    Returns (f3, g1, g2). Lane 1 takes min(d1, max(s3 - d2, c1/(c1+c2)*s3));
    lane 2 takes the remainder, so g1 + g2 == f3 exactly.
    """
    _check_nonnegative(d1=d1, d2=d2, s3=s3)
    d1a = np.asarray(d1, dtype=float)
    d2a = np.asarray(d2, dtype=float)
    s3a = np.asarray(s3, dtype=float)
    total = d1a + d2a
    congested = total > s3a
    f3 = np.where(congested, s3a, total)

    share = caps.c1 / (caps.c1 + caps.c2)
    g1_raw = np.minimum(d1a, np.maximum(s3a - d2a, share * s3a))
    # Exact-sum pairing: whichever subtraction lands in [f3/2, f3] is exact.
    g2_hi = f3 - g1_raw
    g1_fit = np.where(g1_raw >= 0.5 * f3, g1_raw, f3 - g2_hi)
    g2_fit = np.where(g1_raw >= 0.5 * f3, f3 - g1_raw, g2_hi)

    g1 = np.where(congested, g1_fit, d1a)
    g2 = np.where(congested, g2_fit, d2a)
    return _scalarize((f3, g1, g2), d1, d2, s3)


def link_density_rate(f_in, g_out, p: LinkParams):
    """Density rate of change of a section: (inflow - outflow) / length."""
    _check_nonnegative(f_in=f_in, g_out=g_out)
    out = (np.asarray(f_in, dtype=float) - np.asarray(g_out, dtype=float)) / p.link_len
    return _scalarize(out, f_in, g_out)
