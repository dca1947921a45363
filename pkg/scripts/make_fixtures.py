#!/usr/bin/env python3
"""Generate the bundled fixture networks and schedules under fixtures/.

Two scenarios are produced:

* town: a 5x4 arterial lattice with a dense short-block core (drives io
  subcycling on coarse grids), four entries, and five exit corridors.  Each
  corridor is an off-ramp ending in a terminal exit intersection with a
  generous outside capacity; a detached continuation road a little further
  out keeps the interpolated direction field pointing outward, so traffic
  that is never absorbed drifts on towards the absorbing rim over the course
  of hours.
* budget: a tiny one-way diamond used for mass-budget checks on a heavily
  padded grid.
"""

from __future__ import annotations

import math
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

V_MAX = 13.0           # m/s everywhere in the town
STRAIGHT_SHARE = 0.5   # of each turning row when a straight option exists
EXIT_SHARE = 0.15      # share of each row routed onto an off-ramp
RAMP_LEN = 140.0       # lattice node -> terminal exit intersection
GAP_LEN = 300.0        # exit intersection -> detached continuation road
CONT_LEN = 160.0       # geometric extent of the continuation road
# Surveyed lengths of the corridor roads (they wind on beyond the modelled
# extent); keeps the interpolated length-scale field flat near the rim.
RAMP_ROAD_LEN = 450.0
CONT_ROAD_LEN = 500.0


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    return dx / n, dy / n


def build_town():
    cols = [0.0, 550.0, 1100.0, 1650.0, 2200.0]
    rows = [0.0, 450.0, 900.0, 1350.0]
    entries = {"A1", "A2", "C3", "C0"}
    # off-ramp corridors: feeder lattice node -> outward unit direction
    corridors = {"A0": (-1.0, 0.0), "B0": (0.0, -1.0), "D3": (0.0, 1.0),
                 "E1": (1.0, 0.0), "E2": (1.0, 0.0)}

    nodes: dict[str, tuple[float, float]] = {}
    for ci, x in enumerate(cols):
        for ri, y in enumerate(rows):
            nodes[f"{'ABCDE'[ci]}{ri}"] = (x, y)
    # Dense short-block core (an old town) between the central arterials:
    # a 3x3 two-way mini-grid with 90 m blocks.
    for mi in range(3):
        for mj in range(3):
            nodes[f"K{mi}{mj}"] = (1200.0 + 90.0 * mi, 580.0 + 90.0 * mj)
    exits = set()
    for k, (ux, uy) in corridors.items():
        x, y = nodes[k]
        nodes[f"X{k}"] = (x + ux * RAMP_LEN, y + uy * RAMP_LEN)
        nodes[f"Y{k}"] = (x + ux * (RAMP_LEN + GAP_LEN), y + uy * (RAMP_LEN + GAP_LEN))
        nodes[f"Y{k}x"] = (x + ux * (RAMP_LEN + GAP_LEN + CONT_LEN),
                           y + uy * (RAMP_LEN + GAP_LEN + CONT_LEN))
        exits.add(f"X{k}")

    streets: list[tuple[str, str, str, float, int]] = []   # id, from, to, length, lanes

    def add_street(a: str, b: str, lanes: int = 1, road_len: float | None = None):
        ax, ay = nodes[a]
        bx, by = nodes[b]
        length = road_len if road_len is not None else math.hypot(bx - ax, by - ay)
        streets.append((f"{a}_{b}", a, b, length, lanes))

    def add_two_way(a: str, b: str, lanes: int = 1):
        add_street(a, b, lanes)
        add_street(b, a, lanes)

    for ri in range(len(rows)):
        for ci in range(len(cols) - 1):
            # the second row is a two-lane avenue
            add_two_way(f"{'ABCDE'[ci]}{ri}", f"{'ABCDE'[ci + 1]}{ri}",
                        lanes=2 if ri == 1 else 1)
    for ci in range(len(cols)):
        for ri in range(len(rows) - 1):
            add_two_way(f"{'ABCDE'[ci]}{ri}", f"{'ABCDE'[ci]}{ri + 1}")
    for mi in range(3):
        for mj in range(2):
            add_two_way(f"K{mi}{mj}", f"K{mi}{mj + 1}")
            add_two_way(f"K{mj}{mi}", f"K{mj + 1}{mi}")
    add_street("C1", "K00")   # feeder into the old-town core
    add_street("K22", "D2")   # drain out of it
    for k in corridors:
        add_street(k, f"X{k}", road_len=RAMP_ROAD_LEN)        # winding off-ramp
        add_street(f"Y{k}", f"Y{k}x", road_len=CONT_ROAD_LEN)  # continuation road

    incoming: dict[str, list[tuple]] = {k: [] for k in nodes}
    outgoing: dict[str, list[tuple]] = {k: [] for k in nodes}
    for s in streets:
        outgoing[s[1]].append(s)
        incoming[s[2]].append(s)

    turning: dict[str, list[tuple[str, str, float]]] = {}
    for k in nodes:
        rows_k = []
        for s_in in incoming[k]:
            options = outgoing[k]
            if not options:
                continue
            din = _unit(nodes[s_in[2]][0] - nodes[s_in[1]][0],
                        nodes[s_in[2]][1] - nodes[s_in[1]][1])
            ramps = [s for s in options if s[2].startswith("X")]
            regular = [s for s in options if not s[2].startswith("X")]
            shares: dict[str, float] = {}
            budget = 1.0
            if regular:
                for s in ramps:
                    shares[s[0]] = EXIT_SHARE
                    budget -= EXIT_SHARE
                pool = [s for s in regular if s[2] != s_in[1]] or regular
            else:
                pool = ramps
            straight = [s for s in pool
                        if din[0] * _unit(nodes[s[2]][0] - nodes[s[1]][0],
                                          nodes[s[2]][1] - nodes[s[1]][1])[0]
                        + din[1] * _unit(nodes[s[2]][0] - nodes[s[1]][0],
                                         nodes[s[2]][1] - nodes[s[1]][1])[1] > 0.9]
            if straight and len(pool) > 1:
                shares[straight[0][0]] = STRAIGHT_SHARE * budget
                rest = [s for s in pool if s[0] != straight[0][0]]
                for s in rest:
                    shares[s[0]] = (1.0 - STRAIGHT_SHARE) * budget / len(rest)
            else:
                for s in pool:
                    shares[s[0]] = budget / len(pool)
            for sid, share in shares.items():
                rows_k.append((s_in[0], sid, share))
        if rows_k:
            turning[k] = rows_k

    lines = ["# synthetic town: arterial lattice, short-block core, off-ramp exits",
             "[intersections]"]
    for k, (x, y) in nodes.items():
        lines.append(f"{k} {x:g} {y:g} {int(k in entries)} {int(k in exits)}")
    lines.append("")
    lines.append("[streets]")
    for sid, a, b, length, lanes in streets:
        lines.append(f"{sid} {a} {b} {length:.6f} {lanes} {V_MAX:g}")
    for k, rows_k in turning.items():
        lines.append("")
        lines.append(f"[turning {k}]")
        for s_in, s_out, share in rows_k:
            lines.append(f"{s_in} {s_out} {share!r}")
    (FIXTURES / "town.net").write_text("\n".join(lines) + "\n", encoding="utf-8")

    def trapezoid(m: int) -> float:
        # night-traffic floor of 0.02 veh/s under a morning-peak trapezoid
        # that ramps up from minute 30 to minute 150
        peak = 0.25 * min(max(m - 30, 0) / 120.0, 1.0, max(0.0, (360.0 - m) / 120.0))
        return max(peak, 0.02)

    sched = ["# six-hour morning peak, per-minute demand in veh/s", "units veh/s",
             "minutes 360"]
    for k in sorted(entries):
        for m in range(360):
            sched.append(f"{k} in {m} {trapezoid(m):.6f}")
    # terminal exits absorb whatever arrives, up to a generous outside capacity
    for k in sorted(exits):
        for m in range(360):
            sched.append(f"{k} out {m} 1.0")
    (FIXTURES / "town.sched").write_text("\n".join(sched) + "\n", encoding="utf-8")

    # Sources-only variant: a two-hour injection window with no exit
    # capacity.  The ramp starts late so that comparisons taken at the end
    # of the first hour see interior plumes only.
    sched2 = ["# two-hour injection, no sinks (boundary-absorption scenario)",
              "units veh/s", "minutes 121"]
    for k in sorted(entries):
        for m in range(120):
            value = 0.25 * min(max(m - 48, 0) / 30.0, 1.0,
                               max(0.0, (120.0 - m) / 12.0))
            if value > 0.0:
                sched2.append(f"{k} in {m} {value:.6f}")
    (FIXTURES / "town_sources_only.sched").write_text("\n".join(sched2) + "\n",
                                                      encoding="utf-8")


def build_budget():
    nodes = {"N0": (150.0, 0.0), "N1": (300.0, 150.0),
             "N2": (150.0, 300.0), "N3": (0.0, 150.0)}
    ring = [("N0", "N1"), ("N1", "N2"), ("N2", "N3"), ("N3", "N0")]
    lines = ["# one-way diamond for interior mass-budget checks", "[intersections]"]
    for k, (x, y) in nodes.items():
        is_entry = k in ("N0", "N2")
        lines.append(f"{k} {x:g} {y:g} {int(is_entry)} {int(not is_entry)}")
    lines.append("")
    lines.append("[streets]")
    for a, b in ring:
        ax, ay = nodes[a]
        bx, by = nodes[b]
        lines.append(f"{a}_{b} {a} {b} {math.hypot(bx - ax, by - ay):.6f} 1 8.0")
    for a, b in ring:
        lines.append("")
        lines.append(f"[turning {b}]")
        nxt = {"N1": "N2", "N2": "N3", "N3": "N0", "N0": "N1"}[b]
        lines.append(f"{a}_{b} {b}_{nxt} 1.0")
    (FIXTURES / "budget.net").write_text("\n".join(lines) + "\n", encoding="utf-8")

    sched = ["# one-hour constant interior demand", "units veh/s", "minutes 60"]
    for m in range(60):
        sched.append(f"N0 in {m} 0.2")
        sched.append(f"N2 in {m} 0.2")
        sched.append(f"N1 out {m} 0.15")
        sched.append(f"N3 out {m} 0.15")
    (FIXTURES / "budget.sched").write_text("\n".join(sched) + "\n", encoding="utf-8")


def main():
    FIXTURES.mkdir(exist_ok=True)
    build_town()
    build_budget()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
