"""Per-minute inflow demand and outflow supply series per intersection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import NetworkFormatError, StreetNetwork, Street, ValidationError

SECONDS_PER_MINUTE = 60.0


@dataclass(frozen=True)
class DemandSchedule:
    """Nonnegative veh/s series, minute-resolved, keyed by intersection.

    Each intersection maps street ids (or ``None`` for entries without street
    attribution) to a series of length ``minutes``.  Sink series may contain
    ``inf``, meaning the outside world absorbs whatever the cell can send.
    """

    minutes: int
    source: dict[str, dict[str | None, np.ndarray]]
    sink: dict[str, dict[str | None, np.ndarray]]

    def source_series(self, k: str) -> np.ndarray:
        """Summed source series (veh/s) of one intersection."""
        rows = self.source.get(k, {})
        out = np.zeros(max(self.minutes, 1))
        for series in rows.values():
            out = out + series
        return out

    def sink_series(self, k: str) -> np.ndarray:
        rows = self.sink.get(k, {})
        out = np.zeros(max(self.minutes, 1))
        for series in rows.values():
            out = out + series
        return out

    def total_scheduled_source(self) -> float:
        """Total scheduled inflow over the whole horizon, in vehicles."""
        return float(sum(series.sum() for rows in self.source.values()
                         for series in rows.values()) * SECONDS_PER_MINUTE)

    def per_street_series(self, net: StreetNetwork, gamma: float):
        """Attribute every series to concrete streets for cardinal projection.

        Entries without street attribution are split over the outgoing
        (sources) or incoming (sinks) streets proportionally to street
        capacity.  Returns ``{k: (src_streets, src, snk_streets, snk)}`` with
        value arrays of shape (n_streets, minutes).
        """
        minutes = max(self.minutes, 1)
        out: dict[str, tuple[list[Street], np.ndarray, list[Street], np.ndarray]] = {}
        for k in set(self.source) | set(self.sink):
            src_streets, src = self._attribute(net, k, self.source.get(k, {}),
                                               net.outgoing(k), minutes, gamma)
            snk_streets, snk = self._attribute(net, k, self.sink.get(k, {}),
                                               net.incoming(k), minutes, gamma)
            out[k] = (src_streets, src, snk_streets, snk)
        return out

    @staticmethod
    def _attribute(net: StreetNetwork, k: str,
                   rows: dict[str | None, np.ndarray],
                   fallback: tuple[Street, ...], minutes: int, gamma: float):
        streets: list[Street] = []
        values: list[np.ndarray] = []
        for sid, series in rows.items():
            if sid is not None:
                streets.append(net.street(sid))
                values.append(series)
                continue
            if not fallback:
                raise ValidationError(
                    f"schedule at {k!r} has no street to attribute its series to")
            phi = np.array([s.phi_max(gamma) for s in fallback])
            weights = phi / phi.sum()
            for s, w in zip(fallback, weights):
                streets.append(s)
                values.append(series * w)
        if not streets:
            return [], np.zeros((0, minutes))
        return streets, np.vstack(values)


def minute_of(t: float, minutes: int) -> int:
    """Schedule minute for simulation time t, clamped to the last minute."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if minutes < 1:
        return 0
    return min(int(math.floor(t / SECONDS_PER_MINUTE)), minutes - 1)


def load_schedule(path: str | Path, net: StreetNetwork) -> DemandSchedule:
    """Load a demand/supply schedule and validate it against the network.

    Row grammar: ``intersection [street] kind minute value`` with kind ``in``
    (source demand) or ``out`` (sink supply); ``-`` stands for "no street".
    An optional ``units veh/h`` or ``units veh/s`` line selects the input
    unit (default veh/s); ``minutes M`` pads the horizon.  ``inf`` is allowed
    as a sink value and means an unbounded outside world.
    """
    path = Path(path)
    if not path.exists():
        raise NetworkFormatError(f"schedule file not found: {path}")

    scale = 1.0
    declared_minutes = 0
    entries: list[tuple[str, str | None, str, int, float]] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        where = f"{path.name}:{lineno}"
        if tokens[0] == "units":
            if len(tokens) != 2 or tokens[1] not in ("veh/s", "veh/h"):
                raise NetworkFormatError(f"{where}: units must be veh/s or veh/h")
            scale = 1.0 / 3600.0 if tokens[1] == "veh/h" else 1.0
            continue
        if tokens[0] == "minutes":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise NetworkFormatError(f"{where}: minutes needs an integer")
            declared_minutes = int(tokens[1])
            continue
        if len(tokens) == 4:
            k, sid, kind, m_tok, v_tok = tokens[0], None, tokens[1], tokens[2], tokens[3]
        elif len(tokens) == 5:
            k, sid, kind, m_tok, v_tok = tokens[0], tokens[1], tokens[2], tokens[3], tokens[4]
            if sid == "-":
                sid = None
        else:
            raise NetworkFormatError(f"{where}: rows need 4 or 5 fields")
        if kind not in ("in", "out"):
            raise NetworkFormatError(f"{where}: kind must be 'in' or 'out'")
        try:
            minute = int(m_tok)
            value = float(v_tok)
        except ValueError as exc:
            raise NetworkFormatError(f"{where}: bad minute or value") from exc
        if minute < 0:
            raise ValidationError(f"{where}: minute must be nonnegative")
        if math.isnan(value) or value < 0:
            raise ValidationError(f"{where}: values must be nonnegative, got {v_tok}")
        if math.isinf(value) and kind == "in":
            raise ValidationError(f"{where}: source demand must be finite")
        entries.append((k, sid, kind, minute, value))

    minutes = max(declared_minutes, max((e[3] for e in entries), default=-1) + 1, 1)
    source: dict[str, dict[str | None, np.ndarray]] = {}
    sink: dict[str, dict[str | None, np.ndarray]] = {}
    for k, sid, kind, minute, value in entries:
        if k not in {n.id for n in net.intersections}:
            raise ValidationError(f"schedule references unknown intersection {k!r}")
        node = net.intersection(k)
        if kind == "in" and not node.is_entry:
            raise ValidationError(f"intersection {k!r} is not flagged as an entry")
        if kind == "out" and not node.is_exit:
            raise ValidationError(f"intersection {k!r} is not flagged as an exit")
        if sid is not None:
            if sid not in {s.id for s in net.streets}:
                raise ValidationError(f"schedule references unknown street {sid!r}")
            street = net.street(sid)
            attached = street.from_id if kind == "in" else street.to_id
            if attached != k:
                raise ValidationError(
                    f"street {sid!r} is not {'outgoing from' if kind == 'in' else 'incoming to'} {k!r}")
        target = source if kind == "in" else sink
        series = target.setdefault(k, {}).setdefault(sid, np.zeros(minutes))
        series[minute] += value * (scale if math.isfinite(value) else 1.0)
    return DemandSchedule(minutes, source, sink)
