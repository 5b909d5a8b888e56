"""Triangular flow-density relation and its demand/supply decomposition.

The flow of a lane depends only on its density k:

    flow(k) = v0 * k                          0 <= k <= k_crit   (free flow)
    flow(k) = (1 - k * veh_len) / t_headway   k_crit < k <= k_jam (congested)

with the derived constants

    k_crit   = 1 / (v0 * t_headway + veh_len)
    k_jam    = 1 / veh_len
    capacity = v0 * k_crit

The capacity definition makes both branches meet at k_crit, so flow is
continuous and demand/supply below agree on their overlapping interval.

demand(k) = flow(min(k, k_crit)) is the flow a lane offers downstream;
supply(k) = flow(max(k, k_crit)) is the flow a lane accepts from upstream.
All functions accept scalars or numpy arrays elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParamError

__all__ = ["LinkParams", "make_params", "flow", "demand", "supply"]

_REL_TOL = 1e-12


@dataclass(frozen=True)
class LinkParams:
    """Per-lane physical constants, all in consistent units."""

    v0: float          # free-flow speed
    t_headway: float   # average time gap between vehicles
    veh_len: float     # average vehicle length
    link_len: float    # section length
    k_crit: float      # critical density, boundary of the two regimes
    k_jam: float       # jam density, flow is zero there
    capacity: float    # peak flow, attained at k_crit

    def __post_init__(self) -> None:
        for name in ("v0", "t_headway", "veh_len", "link_len"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ParamError(f"{name} must be finite and > 0, got {value!r}")
        checks = (
            ("k_crit", self.k_crit, 1.0 / (self.v0 * self.t_headway + self.veh_len)),
            ("k_jam", self.k_jam, 1.0 / self.veh_len),
            ("capacity", self.capacity, self.v0 * self.k_crit),
        )
        for name, got, want in checks:
            if not math.isfinite(got) or abs(got - want) > _REL_TOL * max(abs(want), 1.0):
                raise ParamError(f"{name}={got!r} inconsistent with physical constants (expected {want!r})")
        if not 0.0 < self.k_crit < self.k_jam:
            raise ParamError(f"need 0 < k_crit < k_jam, got k_crit={self.k_crit}, k_jam={self.k_jam}")


def make_params(v0: float, t_headway: float, veh_len: float, link_len: float) -> LinkParams:
    """Build LinkParams from the three physical constants plus section length."""
    for name, value in (("v0", v0), ("t_headway", t_headway), ("veh_len", veh_len), ("link_len", link_len)):
        if not (isinstance(value, (int, float)) and math.isfinite(value)) or value <= 0.0:
            raise ParamError(f"{name} must be finite and > 0, got {value!r}")
    k_crit = 1.0 / (v0 * t_headway + veh_len)
    return LinkParams(
        v0=float(v0),
        t_headway=float(t_headway),
        veh_len=float(veh_len),
        link_len=float(link_len),
        k_crit=k_crit,
        k_jam=1.0 / veh_len,
        capacity=v0 * k_crit,
    )


def _check_density(k, p: LinkParams):
    arr = np.asarray(k, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > p.k_jam) or not np.all(np.isfinite(arr)):
        raise DomainError(f"density must lie in [0, {p.k_jam}], got {k!r}")
    return arr


def _as_input_kind(result: np.ndarray, k):
    if np.isscalar(k) or getattr(k, "ndim", 1) == 0:
        return float(result)
    return result


def flow(k, p: LinkParams):
    """Flow carried at density k; peaks at capacity, zero at 0 and k_jam."""
    arr = _check_density(k, p)
    out = np.where(arr <= p.k_crit, p.v0 * arr, (1.0 - arr * p.veh_len) / p.t_headway)
    return _as_input_kind(out, k)


def demand(k, p: LinkParams):
    """Flow the lane can send downstream: flow(k) free, capacity congested."""
    arr = _check_density(k, p)
    out = np.where(arr <= p.k_crit, p.v0 * arr, p.capacity)
    return _as_input_kind(out, k)


def supply(k, p: LinkParams):
    """Flow the lane can accept from upstream: capacity free, flow(k) congested."""
    arr = _check_density(k, p)
    out = np.where(arr <= p.k_crit, p.capacity, (1.0 - arr * p.veh_len) / p.t_headway)
    return _as_input_kind(out, k)
