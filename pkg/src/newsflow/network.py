"""Street network description: types, file loader, and direction geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Jam spacing: one vehicle occupies 6 m of lane.
VEHICLE_LENGTH_M = 6.0
DEFAULT_GAMMA = 1.0 / 3.0

TURNING_ROW_TOL = 1e-9


class NetworkFormatError(ValueError):
    """Raised when a network or schedule file cannot be parsed."""


class ValidationError(ValueError):
    """Raised when parsed input data violates a model invariant."""


@dataclass(frozen=True)
class Intersection:
    id: str
    x: float
    y: float
    is_entry: bool = False
    is_exit: bool = False

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Street:
    """Directed street; a two-way road is modelled as two Street records."""

    id: str
    from_id: str
    to_id: str
    length: float          # metres, as surveyed (may differ from node distance)
    lanes: int
    v_max: float           # m/s
    direction: tuple[float, float]   # to.position - from.position
    phi_max_override: float | None = None

    @property
    def rho_max(self) -> float:
        """Jam density in veh/m: one vehicle per 6 m and lane."""
        return self.lanes / VEHICLE_LENGTH_M

    def rho_crit(self, gamma: float) -> float:
        return gamma * self.rho_max

    def phi_max(self, gamma: float) -> float:
        """Street capacity v_max * rho_crit, unless overridden in the file."""
        if self.phi_max_override is not None:
            return self.phi_max_override
        return self.v_max * self.rho_crit(gamma)


@dataclass(frozen=True)
class TurningTable:
    """Per-intersection demand turning ratios alpha[(in_street, out_street)]."""

    ratios: dict[str, dict[tuple[str, str], float]]

    def at(self, k: str) -> dict[tuple[str, str], float]:
        return self.ratios.get(k, {})

    def alpha(self, k: str, street_in: str, street_out: str) -> float:
        return self.ratios.get(k, {}).get((street_in, street_out), 0.0)


@dataclass(frozen=True)
class StreetNetwork:
    intersections: tuple[Intersection, ...]
    streets: tuple[Street, ...]
    turning: TurningTable
    _by_id: dict[str, Intersection] = field(compare=False, repr=False, default_factory=dict)
    _street_by_id: dict[str, Street] = field(compare=False, repr=False, default_factory=dict)
    _incoming: dict[str, tuple[Street, ...]] = field(compare=False, repr=False, default_factory=dict)
    _outgoing: dict[str, tuple[Street, ...]] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        by_id = {n.id: n for n in self.intersections}
        street_by_id = {s.id: s for s in self.streets}
        incoming: dict[str, list[Street]] = {n.id: [] for n in self.intersections}
        outgoing: dict[str, list[Street]] = {n.id: [] for n in self.intersections}
        for s in self.streets:
            incoming[s.to_id].append(s)
            outgoing[s.from_id].append(s)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_street_by_id", street_by_id)
        object.__setattr__(self, "_incoming", {k: tuple(v) for k, v in incoming.items()})
        object.__setattr__(self, "_outgoing", {k: tuple(v) for k, v in outgoing.items()})

    def intersection(self, k: str) -> Intersection:
        return self._by_id[k]

    def street(self, sid: str) -> Street:
        return self._street_by_id[sid]

    def incoming(self, k: str) -> tuple[Street, ...]:
        return self._incoming[k]

    def outgoing(self, k: str) -> tuple[Street, ...]:
        return self._outgoing[k]

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) over intersection positions."""
        xs = [n.x for n in self.intersections]
        ys = [n.y for n in self.intersections]
        return (min(xs), min(ys), max(xs), max(ys))


def street_trig(direction: tuple[float, float]) -> tuple[float, float]:
    """Cosine and sine of the angle between a direction vector and the x axis."""
    xi, eta = direction
    norm = math.hypot(xi, eta)
    if norm == 0.0:
        raise ValueError("direction vector must be nonzero")
    return xi / norm, eta / norm


def projection_coeffs(direction: tuple[float, float]) -> np.ndarray:
    """Cardinal projection weights (p_N, p_E, p_W, p_S) of a direction vector.

    All four coefficients are returned as nonnegative magnitudes so they form
    a convex weighting: p_N + p_E + p_W + p_S = 1.
    """
    xi, eta = direction
    denom = abs(xi) + abs(eta)
    if denom == 0.0:
        raise ValueError("direction vector must be nonzero")
    p_n = max(eta, 0.0) / denom
    p_e = max(xi, 0.0) / denom
    p_w = -min(xi, 0.0) / denom
    p_s = -min(eta, 0.0) / denom
    return np.array([p_n, p_e, p_w, p_s])


def _tokenize(path: Path) -> list[tuple[int, list[str]]]:
    lines = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            lines.append((lineno, text.split()))
    return lines


def _parse_bool(token: str, where: str) -> bool:
    if token in ("1", "true", "yes"):
        return True
    if token in ("0", "false", "no"):
        return False
    raise NetworkFormatError(f"{where}: expected 0/1 flag, got {token!r}")


def _parse_float(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise NetworkFormatError(f"{where}: expected number, got {token!r}") from exc
    if not math.isfinite(value):
        raise NetworkFormatError(f"{where}: value must be finite, got {token!r}")
    return value


def load_network(path: str | Path) -> StreetNetwork:
    """Load and validate a street network from its text description.

    The file has three section kinds::

        [intersections]          # id x y entry exit
        [streets]                # id from to length lanes vmax [phimax]
        [turning <node-id>]      # in-street out-street alpha

    Comments start with ``#``.  See the README for the full grammar.
    """
    path = Path(path)
    if not path.exists():
        raise NetworkFormatError(f"network file not found: {path}")

    intersections: list[Intersection] = []
    streets: list[tuple[int, list[str]]] = []
    turning_rows: dict[str, list[tuple[int, list[str]]]] = {}
    section: str | None = None
    turning_node: str | None = None

    for lineno, tokens in _tokenize(path):
        where = f"{path.name}:{lineno}"
        if tokens[0].startswith("["):
            header = " ".join(tokens)
            if not header.endswith("]"):
                raise NetworkFormatError(f"{where}: malformed section header {header!r}")
            name = header[1:-1].split()
            if name[0] == "intersections" and len(name) == 1:
                section = "intersections"
            elif name[0] == "streets" and len(name) == 1:
                section = "streets"
            elif name[0] == "turning" and len(name) == 2:
                section = "turning"
                turning_node = name[1]
                turning_rows.setdefault(turning_node, [])
            else:
                raise NetworkFormatError(f"{where}: unknown section {header!r}")
            continue
        if section == "intersections":
            if len(tokens) != 5:
                raise NetworkFormatError(f"{where}: intersection rows need 5 fields")
            intersections.append(Intersection(
                id=tokens[0],
                x=_parse_float(tokens[1], where),
                y=_parse_float(tokens[2], where),
                is_entry=_parse_bool(tokens[3], where),
                is_exit=_parse_bool(tokens[4], where),
            ))
        elif section == "streets":
            if len(tokens) not in (6, 7):
                raise NetworkFormatError(f"{where}: street rows need 6 or 7 fields")
            streets.append((lineno, tokens))
        elif section == "turning":
            if len(tokens) != 3:
                raise NetworkFormatError(f"{where}: turning rows need 3 fields")
            turning_rows[turning_node].append((lineno, tokens))
        else:
            raise NetworkFormatError(f"{where}: data before any section header")

    ids = [n.id for n in intersections]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate intersection ids: {', '.join(dup)}")
    by_id = {n.id: n for n in intersections}

    street_objs: list[Street] = []
    for lineno, tokens in streets:
        where = f"{path.name}:{lineno}"
        sid, from_id, to_id = tokens[0], tokens[1], tokens[2]
        if from_id not in by_id or to_id not in by_id:
            raise ValidationError(f"street {sid!r} references unknown intersection "
                                  f"({from_id!r} -> {to_id!r})")
        length = _parse_float(tokens[3], where)
        lanes = int(_parse_float(tokens[4], where))
        v_max = _parse_float(tokens[5], where)
        override = _parse_float(tokens[6], where) if len(tokens) == 7 else None
        if length <= 0:
            raise ValidationError(f"street {sid!r}: length must be positive")
        if lanes < 1:
            raise ValidationError(f"street {sid!r}: lane count must be >= 1")
        if v_max <= 0:
            raise ValidationError(f"street {sid!r}: v_max must be positive")
        a, b = by_id[from_id], by_id[to_id]
        direction = (b.x - a.x, b.y - a.y)
        if direction == (0.0, 0.0):
            raise ValidationError(f"street {sid!r}: endpoints coincide, direction undefined")
        street_objs.append(Street(sid, from_id, to_id, length, lanes, v_max,
                                  direction, override))

    sids = [s.id for s in street_objs]
    if len(set(sids)) != len(sids):
        dup = sorted({i for i in sids if sids.count(i) > 1})
        raise ValidationError(f"duplicate street ids: {', '.join(dup)}")
    street_by_id = {s.id: s for s in street_objs}

    ratios: dict[str, dict[tuple[str, str], float]] = {}
    for node, rows in turning_rows.items():
        if node not in by_id:
            raise ValidationError(f"turning section references unknown intersection {node!r}")
        table: dict[tuple[str, str], float] = {}
        for lineno, tokens in rows:
            where = f"{path.name}:{lineno}"
            sin, sout = tokens[0], tokens[1]
            alpha = _parse_float(tokens[2], where)
            for sid in (sin, sout):
                if sid not in street_by_id:
                    raise ValidationError(f"{where}: unknown street {sid!r} at {node!r}")
            if street_by_id[sin].to_id != node:
                raise ValidationError(f"{where}: street {sin!r} does not end at {node!r}")
            if street_by_id[sout].from_id != node:
                raise ValidationError(f"{where}: street {sout!r} does not start at {node!r}")
            if not 0.0 <= alpha <= 1.0:
                raise ValidationError(f"{where}: alpha must be in [0, 1]")
            table[(sin, sout)] = alpha
        ratios[node] = table

    net = StreetNetwork(tuple(intersections), tuple(street_objs), TurningTable(ratios))
    _validate(net)
    return net


def _validate(net: StreetNetwork) -> None:
    for node in net.intersections:
        if node.is_entry and not net.outgoing(node.id):
            raise ValidationError(f"entry intersection {node.id!r} has no outgoing street")
        if node.is_exit and not net.incoming(node.id):
            raise ValidationError(f"exit intersection {node.id!r} has no incoming street")
        if net.outgoing(node.id):
            for s_in in net.incoming(node.id):
                row = sum(net.turning.alpha(node.id, s_in.id, s_out.id)
                          for s_out in net.outgoing(node.id))
                if abs(row - 1.0) > TURNING_ROW_TOL:
                    raise ValidationError(
                        f"turning ratios from street {s_in.id!r} at intersection "
                        f"{node.id!r} sum to {row:.12g}, expected 1")


def save_network(net: StreetNetwork, path: str | Path) -> None:
    """Write a network in the same text format accepted by :func:`load_network`."""
    lines = ["[intersections]"]
    for n in net.intersections:
        lines.append(f"{n.id} {n.x!r} {n.y!r} {int(n.is_entry)} {int(n.is_exit)}")
    lines.append("")
    lines.append("[streets]")
    for s in net.streets:
        row = f"{s.id} {s.from_id} {s.to_id} {s.length!r} {s.lanes} {s.v_max!r}"
        if s.phi_max_override is not None:
            row += f" {s.phi_max_override!r}"
        lines.append(row)
    for k, table in net.turning.ratios.items():
        if not table:
            continue
        lines.append("")
        lines.append(f"[turning {k}]")
        for (sin, sout), alpha in table.items():
            lines.append(f"{sin} {sout} {alpha!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
