"""Bilinear fundamental diagram: flux, demand, supply, and their derivatives.

All functions broadcast over numpy arrays, so the same code serves scalar
street parameters and whole parameter rasters.  The relations are linear in
the density, which makes them unit-agnostic: they apply unchanged to 1d
densities (veh/m) and to 2d density-of-density fields (veh/m^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTINUITY_TOL = 1e-9


@dataclass(frozen=True)
class FdParams:
    """Parameters (v_max, rho_max, gamma) of one bilinear flux curve.

    ``v_max`` and ``rho_max`` may be floats or broadcastable arrays; ``gamma``
    is the critical-to-jam density ratio, a global scalar in (0, 1).
    """

    v_max: np.ndarray | float
    rho_max: np.ndarray | float
    gamma: float = 1.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie strictly between 0 and 1")
        if np.any(np.asarray(self.v_max) <= 0.0):
            raise ValueError("v_max must be positive")
        if np.any(np.asarray(self.rho_max) <= 0.0):
            raise ValueError("rho_max must be positive")
        # derived quantities are cached: the solver evaluates the FD per step
        object.__setattr__(self, "_rho_crit", self.gamma * self.rho_max)
        # v/(1/gamma - 1) == gamma/(1-gamma)*v, written so that gamma = 1/3
        # yields exactly v/2 in floating point
        object.__setattr__(self, "_c_k_abs", self.v_max / (1.0 / self.gamma - 1.0))
        object.__setattr__(self, "_phi_max", self.v_max * self._rho_crit)
        span = np.maximum(self.rho_max - self._rho_crit, 1e-300)
        object.__setattr__(self, "_congested_slope", self._phi_max / span)
        rhs = self.c_k_abs * (self.rho_max - self.rho_crit)
        if not np.allclose(self.phi_max, rhs, rtol=CONTINUITY_TOL, atol=0.0):
            raise ValueError("flux continuity violated: v_max*rho_crit != |c_K|*(rho_max-rho_crit)")

    @property
    def rho_crit(self) -> np.ndarray | float:
        return self._rho_crit

    @property
    def c_k_abs(self) -> np.ndarray | float:
        return self._c_k_abs

    @property
    def phi_max(self) -> np.ndarray | float:
        return self._phi_max


def flux(rho, p: FdParams):
    """Bilinear flux: free-flow v_max*rho up to rho_crit, congested beyond."""
    return np.where(rho <= p.rho_crit, p.v_max * rho, p.c_k_abs * (p.rho_max - rho))


def demand(rho, p: FdParams):
    """Sending capacity: 0 below zero density, v_max*rho, then capped at phi_max."""
    return np.where(rho < 0.0, 0.0, np.minimum(p.v_max * rho, p.phi_max))


def supply(rho, p: FdParams):
    """Receiving capacity: phi_max in free flow, decaying branch, 0 out of range."""
    free = (rho >= 0.0) & (rho <= p.rho_crit)
    congested = (rho > p.rho_crit) & (rho <= p.rho_max)
    return np.where(free, p.phi_max,
                    np.where(congested, p._congested_slope * (p.rho_max - rho), 0.0))


def demand_deriv(rho, p: FdParams):
    return np.where((rho >= 0.0) & (rho <= p.rho_crit), p.v_max, 0.0)


def supply_deriv(rho, p: FdParams):
    return np.where((rho > p.rho_crit) & (rho <= p.rho_max), -p._congested_slope, 0.0)
