"""Whitney-type cover of the complement of K and its partition of unity.

Cells are pairs (level k, net index j). The weight of a cell is

    psi = pos(eps_{k+1} - g),
    g   = max(pos(eps_k - dK), pos(dK - eps_{k-1}), pos(d(x, c_j) - min_l d(x, c_l)) / 2),

a computable 1-Lipschitz stand-in for the distance to the complement of the
cell. ``psi`` equals ``eps_{k+1}`` on the exact Voronoi-annulus piece of the
cell and vanishes unless ``eps_{k+1} < dK < 5 eps_{k+1}``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from holonet.flat_sets import FlatSetDescriptor, n_of_eps, project_onto
from holonet.nets import NetLevel, build_net

ON_SET_TOL = 1e-12


class OnSetError(ValueError):
    """The query lies (numerically) on K; callers must take the identity branch."""


def eps_of(k: int) -> float:
    return math.ldexp(1.0, -k)


def pos(t: float) -> float:
    return t if t > 0.0 else 0.0


@dataclass(frozen=True, eq=False)
class Cell:
    level: int
    index: int
    net: NetLevel = field(repr=False)

    @property
    def center(self) -> np.ndarray:
        return self.net.center(self.index)


def cell(K: FlatSetDescriptor, k: int, j: int) -> Cell:
    net = build_net(K, k)
    if not 0 <= j < len(net):
        raise IndexError(f"net level {k} has {len(net)} points, no index {j}")
    return Cell(k, j, net)


@dataclass
class PartitionEntry:
    cell: Cell
    psi: float
    phi: float


@dataclass
class PartitionEval:
    query: np.ndarray
    dist_to_K: float
    entries: list[PartitionEntry]

    @property
    def psi_sum(self) -> float:
        return math.fsum(e.psi for e in self.entries)

    def combination(self) -> np.ndarray:
        out = np.zeros_like(self.query)
        for e in self.entries:
            out += e.phi * e.cell.center
        return out


def active_levels(dK: float) -> list[int]:
    """Levels k with eps_{k+1} < dK < 5 eps_{k+1} (at most three)."""
    if not dK > 0:
        return []
    top = int(math.floor(-math.log2(dK)))
    out = []
    for j in range(top - 3, top + 5):
        e = eps_of(j)
        if e < dK < 5.0 * e:
            out.append(j - 1)
    return out


def _level_penalty(k: int, dK: float) -> float:
    return max(pos(eps_of(k) - dK), pos(dK - eps_of(k - 1)))


def _voronoi_min(net: NetLevel, x) -> float:
    # exact recomputation so that ties agree with ``NetLevel.distances``
    _, dq = net.nearest(x)
    _, d = net.within(x, dq * (1 + 1e-12) + 1e-300)
    return float(d.min()) if len(d) else dq


def g_hat(cell: Cell, x, dK: float) -> float:
    x = np.asarray(x, dtype=float)
    dmin = _voronoi_min(cell.net, x)
    dj = float(cell.net.distances(x, [cell.index])[0])
    return max(_level_penalty(cell.level, dK), pos(dj - dmin) / 2.0)


def psi(cell: Cell, x, dK: float) -> float:
    return pos(eps_of(cell.level + 1) - g_hat(cell, x, dK))


def _level_entries(K, k, x, dK):
    lvl = _level_penalty(k, dK)
    e1 = eps_of(k + 1)
    if lvl >= e1:
        return []
    net = build_net(K, k)
    dmin = _voronoi_min(net, x)
    # psi > 0 needs d(x, c_j) < dmin + 2 eps_{k+1}
    idx, d = net.within(x, dmin + 2.0 * e1)
    out = []
    for j, dj in zip(idx.tolist(), d.tolist()):
        g = max(lvl, pos(dj - dmin) / 2.0)
        w = pos(e1 - g)
        if w > 0.0:
            out.append((Cell(k, j, net), w))
    return out


def partition_at(K: FlatSetDescriptor, x, dK: float | None = None) -> PartitionEval:
    x = np.asarray(x, dtype=float)
    dK = project_onto(K, x)[1] if dK is None else float(dK)
    if dK <= ON_SET_TOL:
        raise OnSetError("query is on K; use the identity branch")
    raw = []
    for k in active_levels(dK):
        raw.extend(_level_entries(K, k, x, dK))
    total = math.fsum(w for _, w in raw)
    entries = [PartitionEntry(c, w, w / total) for c, w in raw]
    return PartitionEval(x, dK, entries)


def multiplicity(K: FlatSetDescriptor, x) -> int:
    return len(partition_at(K, x).entries)


def cell_membership_exact(cell: Cell, x, dK: float) -> bool:
    """Is x in the Voronoi-annulus piece of the cell (ties go to the lower index)?"""
    x = np.asarray(x, dtype=float)
    k = cell.level
    if not eps_of(k) <= dK < eps_of(k - 1):
        return False
    _, dq = cell.net.nearest(x)
    idx, d = cell.net.within(x, dq * (1 + 1e-12) + 1e-300)
    best = d.min()
    winner = int(idx[np.flatnonzero(d == best)[0]])
    return winner == cell.index


def multiplicity_bound(K: FlatSetDescriptor, dK: float) -> float:
    """5 * 20**n(dK/10): the cover multiplicity bound."""
    return 5.0 * 20.0 ** n_of_eps(K.profile, dK / 10.0)


def write_partition_trace(path, evals):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["query_id", "level", "cell_index", "psi", "phi", "center_dist"])
        for qid, ev in enumerate(evals):
            for e in ev.entries:
                cd = float(np.linalg.norm(ev.query - e.cell.center))
                w.writerow([qid, e.cell.level, e.cell.index, repr(e.psi), repr(e.phi), repr(cd)])
