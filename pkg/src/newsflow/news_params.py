"""Compile per-intersection NEWS parameters from the street network.

Direction index order is N, E, W, S throughout the package.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .network import StreetNetwork, Street, projection_coeffs, street_trig

logger = logging.getLogger(__name__)

DIRECTIONS = ("N", "E", "W", "S")
EPS_DENOM = 1e-8


@dataclass(frozen=True)
class NewsIntersectionParams:
    """NEWS aggregates of one intersection; all direction arrays are (4,) in NEWS order."""

    intersection_id: str
    cos_bar: np.ndarray
    sin_bar: np.ndarray
    v_max: np.ndarray
    rho_max: np.ndarray
    rho_crit: np.ndarray
    length_scale: float                  # metres, shared by all directions
    alpha: np.ndarray                    # (4, 4), [from, to]
    beta: np.ndarray                     # (4, 4), [from, to]

    def __post_init__(self):
        unit = self.cos_bar**2 + self.sin_bar**2
        if np.any(unit > 1.0 + 1e-9):
            raise ValueError(f"{self.intersection_id}: averaged trig exceeds the unit circle")
        if np.any(self.rho_crit <= 0.0) or np.any(self.rho_crit > self.rho_max + 1e-12):
            raise ValueError(f"{self.intersection_id}: need 0 < rho_crit <= rho_max")
        if np.any(self.v_max <= 0.0) or self.length_scale <= 0.0:
            raise ValueError(f"{self.intersection_id}: speeds and length scale must be positive")
        for name, table in (("alpha", self.alpha), ("beta", self.beta)):
            if np.any(table < -1e-12) or np.any(table > 1.0 + 1e-9):
                raise ValueError(f"{self.intersection_id}: {name} entries outside [0, 1]")


@dataclass(frozen=True)
class NetworkMeans:
    """Network-wide street means, used as inert defaults for unprojected directions."""

    v_max: float
    rho_max: float
    rho_crit: float
    length: float


def network_means(net: StreetNetwork, gamma: float) -> NetworkMeans:
    v = float(np.mean([s.v_max for s in net.streets]))
    rmax = float(np.mean([s.rho_max for s in net.streets]))
    length = float(np.mean([s.length for s in net.streets]))
    return NetworkMeans(v, rmax, gamma * rmax, length)


def supply_ratios(net: StreetNetwork, k: str, gamma: float) -> dict[tuple[str, str], float]:
    """Capacity-weighted feeder fractions beta[(in, out)] from the demand ratios."""
    beta: dict[tuple[str, str], float] = {}
    incoming = net.incoming(k)
    for s_out in net.outgoing(k):
        col = [(s_in, net.turning.alpha(k, s_in.id, s_out.id) * s_in.phi_max(gamma))
               for s_in in incoming]
        denom = sum(w for _, w in col)
        for s_in, w in col:
            beta[(s_in.id, s_out.id)] = w / denom if denom > EPS_DENOM else 0.0
    return beta


def _street_weights(streets: tuple[Street, ...], gamma: float):
    """Projection matrix (4, n), capacities (n,), trig (n, 2) of a street list."""
    if not streets:
        return np.zeros((4, 0)), np.zeros(0), np.zeros((0, 2))
    proj = np.column_stack([projection_coeffs(s.direction) for s in streets])
    phi = np.array([s.phi_max(gamma) for s in streets])
    trig = np.array([street_trig(s.direction) for s in streets])
    return proj, phi, trig


def cardinal_turning(net: StreetNetwork, k: str,
                     beta: dict[tuple[str, str], float],
                     gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate per-street turning ratios to 4x4 cardinal tables (alpha, beta)."""
    incoming = net.incoming(k)
    outgoing = net.outgoing(k)
    p_in, phi_in, _ = _street_weights(incoming, gamma)
    p_out, phi_out, _ = _street_weights(outgoing, gamma)

    a_street = np.array([[net.turning.alpha(k, i.id, j.id) for j in outgoing]
                         for i in incoming])
    b_street = np.array([[beta.get((i.id, j.id), 0.0) for j in outgoing]
                         for i in incoming])

    alpha = np.zeros((4, 4))
    beta_c = np.zeros((4, 4))
    in_mass = p_in * phi_in if len(incoming) else np.zeros((4, 0))
    out_mass = p_out * phi_out if len(outgoing) else np.zeros((4, 0))
    for x in range(4):
        den_in = in_mass[x].sum() if in_mass.size else 0.0
        for y in range(4):
            if den_in > EPS_DENOM and a_street.size:
                num = (p_out[y] * (in_mass[x] @ a_street)).sum()
                alpha[x, y] = num / den_in
            den_out = out_mass[y].sum() if out_mass.size else 0.0
            if den_out > EPS_DENOM and b_street.size:
                num = (p_in[x] @ (b_street * out_mass[y])).sum()
                beta_c[x, y] = num / den_out
    return alpha, beta_c


def cardinal_aggregates(net: StreetNetwork, k: str, gamma: float,
                        means: NetworkMeans):
    """Trig, density, speed, and length aggregates of one intersection.

    Averaged cosines/sines and the length scale are taken over outgoing
    streets; jam and critical densities are projected sums over incoming and
    outgoing streets.  Directions onto which no street projects fall back to
    zero trig and the network-wide means.
    """
    incoming = net.incoming(k)
    outgoing = net.outgoing(k)
    p_in, phi_in, _ = _street_weights(incoming, gamma)
    p_out, phi_out, trig_out = _street_weights(outgoing, gamma)

    rho_in = np.array([s.rho_max for s in incoming])
    rho_out = np.array([s.rho_max for s in outgoing])
    vr_in = np.array([s.v_max * s.rho_crit(gamma) for s in incoming])
    vr_out = np.array([s.v_max * s.rho_crit(gamma) for s in outgoing])

    cos_bar = np.zeros(4)
    sin_bar = np.zeros(4)
    rho_max = p_in @ rho_in + p_out @ rho_out if (incoming or outgoing) else np.zeros(4)
    rho_crit = gamma * rho_max
    v_max = np.zeros(4)

    for x in range(4):
        out_mass = float((p_out[x] * phi_out).sum()) if len(outgoing) else 0.0
        if out_mass > EPS_DENOM:
            w = p_out[x] * phi_out
            cos_bar[x] = (w * trig_out[:, 0]).sum() / out_mass
            sin_bar[x] = (w * trig_out[:, 1]).sum() / out_mass
        if rho_crit[x] > EPS_DENOM:
            num = float((p_in[x] * vr_in).sum()) + float((p_out[x] * vr_out).sum())
            v_max[x] = num / rho_crit[x]
        else:
            logger.info("intersection %s: no streets project onto %s, "
                        "falling back to network means", k, DIRECTIONS[x])
            rho_max[x] = means.rho_max
            rho_crit[x] = means.rho_crit
            v_max[x] = means.v_max

    if outgoing:
        length = float((rho_out * np.array([s.length for s in outgoing])).sum()
                       / rho_out.sum())
    else:
        logger.info("intersection %s: no outgoing street, length scale from network mean", k)
        length = means.length
    return cos_bar, sin_bar, v_max, rho_max, rho_crit, length


def project_io_demand(streets: list[Street], values: np.ndarray) -> np.ndarray:
    """Project per-street nonnegative io series onto the cardinal directions.

    ``values`` has shape (n_streets, ...); the result has shape (4, ...).
    """
    if not streets:
        return np.zeros((4,) + np.asarray(values).shape[1:])
    proj = np.column_stack([projection_coeffs(s.direction) for s in streets])
    return np.tensordot(proj, np.asarray(values, dtype=float), axes=(1, 0))


def compile_intersection(net: StreetNetwork, k: str, gamma: float,
                         means: NetworkMeans | None = None) -> NewsIntersectionParams:
    if means is None:
        means = network_means(net, gamma)
    beta = supply_ratios(net, k, gamma)
    alpha_c, beta_c = cardinal_turning(net, k, beta, gamma)
    cos_bar, sin_bar, v_max, rho_max, rho_crit, length = cardinal_aggregates(
        net, k, gamma, means)
    return NewsIntersectionParams(k, cos_bar, sin_bar, v_max, rho_max, rho_crit,
                                  length, alpha_c, beta_c)


def compile_network(net: StreetNetwork, gamma: float) -> dict[str, NewsIntersectionParams]:
    """Compile NEWS parameters for every intersection of the network."""
    means = network_means(net, gamma)
    return {n.id: compile_intersection(net, n.id, gamma, means)
            for n in net.intersections}
