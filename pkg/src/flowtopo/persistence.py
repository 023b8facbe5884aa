"""Persistent homology of point clouds and Wasserstein distances between diagrams.

The Vietoris-Rips filtration connects points at distance <= eps and fills in
cliques; the barcode comes from the standard GF(2) column reduction of the
boundary matrix in filtration order.  Diagram distance is a minimal-cost
matching (Hungarian assignment) with L-infinity ground metric and diagonal
projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .flows import fmt

DIAGRAM_HEADER = "dim,birth,death"


@dataclass(frozen=True)
class Filtration:
    """Simplices with birth values, sorted by (birth, dimension, vertex order).

    The sort guarantees faces precede cofaces whenever births are valid;
    barcode() verifies the face-birth condition itself.
    """

    simplices: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_simplices(cls, pairs: Iterable[tuple[Sequence[int], float]]) -> "Filtration":
        canon = []
        for verts, birth in pairs:
            v = tuple(sorted(verts))
            if len(set(v)) != len(v):
                raise ValueError(f"simplex {verts} has repeated vertices")
            canon.append((v, float(birth)))
        canon.sort(key=lambda p: (p[1], len(p[0]), p[0]))
        return cls(tuple(canon))

    def __len__(self) -> int:
        return len(self.simplices)


def vietoris_rips(points, max_eps: float, max_dim: int) -> Filtration:
    """Rips filtration of a point cloud under Euclidean distance.

    Vertices are born at 0; an edge is born at its length (kept if <= max_eps);
    a higher simplex is born at the largest pairwise distance among its
    vertices.  Simplices up to dimension max_dim + 1 are generated so that
    deaths in dimension max_dim are correct.
    """
    if max_eps <= 0:
        raise ValueError("max_eps must be > 0")
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size == 0:
        raise ValueError("point cloud must be nonempty")
    if pts.ndim != 2:
        raise ValueError("points must share a common dimension")
    n = len(pts)
    if n == 0:
        raise ValueError("point cloud must be nonempty")
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))

    # neighbors with larger index, used to extend cliques without duplicates
    upper: list[list[int]] = [
        [j for j in range(i + 1, n) if dist[i, j] <= max_eps] for i in range(n)
    ]
    simplices: list[tuple[tuple[int, ...], float]] = [((i,), 0.0) for i in range(n)]
    max_card = max_dim + 2

    def expand(simplex: tuple[int, ...], birth: float, candidates: list[int]) -> None:
        for idx, v in enumerate(candidates):
            b = max(birth, max(dist[u, v] for u in simplex))
            tau = simplex + (v,)
            simplices.append((tau, b))
            if len(tau) < max_card:
                nxt = [w for w in candidates[idx + 1:] if dist[v, w] <= max_eps]
                expand(tau, b, nxt)

    for i in range(n):
        expand((i,), 0.0, upper[i])
    return Filtration.from_simplices(simplices)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Per-dimension multisets of (birth, death) bars; death may be math.inf.

    Zero-persistence bars are never stored.
    """

    bars: dict[int, tuple[tuple[float, float], ...]]

    def in_dim(self, k: int) -> tuple[tuple[float, float], ...]:
        return self.bars.get(k, ())

    def dims(self) -> list[int]:
        return sorted(self.bars)

    def infinite_count(self, k: int) -> int:
        return sum(1 for _, d in self.in_dim(k) if math.isinf(d))

    def truncate(self, cap: float) -> "PersistenceDiagram":
        """Replace infinite deaths with cap, discarding bars that collapse."""
        out: dict[int, tuple[tuple[float, float], ...]] = {}
        for k, bars in self.bars.items():
            kept = []
            for b, d in bars:
                if math.isinf(d):
                    d = cap
                if d > b:
                    kept.append((b, d))
            if kept:
                out[k] = tuple(sorted(kept))
        return PersistenceDiagram(out)

    def restrict(self, max_dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram({k: v for k, v in self.bars.items() if k <= max_dim})


def barcode(filtration: Filtration) -> PersistenceDiagram:
    """Persistence diagram via left-to-right boundary column reduction.

    Columns are bit-packed over row indices in filtration order; each column
    is XOR-reduced against earlier columns sharing its lowest set row.  A
    pairing (i, j) gives the bar [birth_i, birth_j) in dimension dim(i);
    unpaired creators give [birth, inf).
    """
    simps = filtration.simplices
    index: dict[tuple[int, ...], int] = {}
    for pos, (verts, birth) in enumerate(simps):
        index[verts] = pos

    columns: list[int] = []
    for pos, (verts, birth) in enumerate(simps):
        mask = 0
        if len(verts) > 1:
            for i in range(len(verts)):
                face = verts[:i] + verts[i + 1:]
                fpos = index.get(face)
                if fpos is None:
                    raise ValueError(f"filtration is missing face {face} of {verts}")
                if simps[fpos][1] > birth:
                    raise ValueError(
                        f"face {face} born at {simps[fpos][1]} after coface "
                        f"{verts} at {birth}")
                mask |= 1 << fpos
        columns.append(mask)

    low_owner: dict[int, int] = {}
    killed: set[int] = set()
    bars: dict[int, list[tuple[float, float]]] = {}
    for j, col in enumerate(columns):
        while col:
            low = col.bit_length() - 1
            owner = low_owner.get(low)
            if owner is None:
                break
            col ^= columns[owner]
        columns[j] = col
        if col:
            low = col.bit_length() - 1
            low_owner[low] = j
            killed.add(low)
            birth = simps[low][1]
            death = simps[j][1]
            if death > birth:
                k = len(simps[low][0]) - 1
                bars.setdefault(k, []).append((birth, death))
    for pos, (verts, birth) in enumerate(simps):
        if columns[pos] == 0 and pos not in killed:
            k = len(verts) - 1
            bars.setdefault(k, []).append((birth, math.inf))
    return PersistenceDiagram({k: tuple(sorted(v)) for k, v in sorted(bars.items())})


def wasserstein(a: PersistenceDiagram, b: PersistenceDiagram, dim: int,
                p: float = 1.0) -> float:
    """p-Wasserstein distance between the dim-dimensional parts of two diagrams.

    Cost of matching two bars is their L-infinity distance; any bar may
    instead be matched to the diagonal at cost persistence/2.  Costs are
    raised to the p-th power, the Hungarian assignment is solved on the
    (n+m) x (n+m) matrix with diagonal surrogates, and the total is taken to
    the 1/p power.  Infinite bars are rejected; truncate them first.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    bars_a = a.in_dim(dim)
    bars_b = b.in_dim(dim)
    for name, bars in (("first", bars_a), ("second", bars_b)):
        if any(math.isinf(d) for _, d in bars):
            raise ValueError(
                f"{name} diagram has an infinite bar in dimension {dim}; "
                "truncate deaths (PersistenceDiagram.truncate) before distancing")
    n, m = len(bars_a), len(bars_b)
    if n == 0 and m == 0:
        return 0.0

    size = n + m
    cost = np.zeros((size, size))
    for i, (bi, di) in enumerate(bars_a):
        for j, (bj, dj) in enumerate(bars_b):
            cost[i, j] = max(abs(bi - bj), abs(di - dj)) ** p
    diag_a = [((d - b) / 2.0) ** p for b, d in bars_a]
    diag_b = [((d - b) / 2.0) ** p for b, d in bars_b]
    # each point may pair only with its own diagonal surrogate; surrogate
    # pairs with each other at zero cost, so a too-large filler is safe
    big = max([c for row in cost[:n, :m] for c in row] + diag_a + diag_b, default=0.0) + 1.0
    cost[:n, m:] = big
    for i in range(n):
        cost[i, m + i] = diag_a[i]
    cost[n:, :m] = big
    for j in range(m):
        cost[n + j, j] = diag_b[j]
    rows, cols = linear_sum_assignment(cost)
    total = math.fsum(cost[r, c] for r, c in zip(rows, cols))
    return total ** (1.0 / p)


def diagram_to_csv(diagram: PersistenceDiagram) -> str:
    """CSV rows `dim,birth,death` (`inf` for infinite deaths), sorted."""
    lines = [DIAGRAM_HEADER]
    for k in diagram.dims():
        for birth, death in sorted(diagram.in_dim(k)):
            d = "inf" if math.isinf(death) else fmt(death)
            lines.append(f"{k},{fmt(birth)},{d}")
    return "\n".join(lines) + "\n"


def diagram_from_csv(lines: Iterable[str]) -> PersistenceDiagram:
    it = iter(lines)
    header = next(it, None)
    if header is None or header.rstrip("\r\n") != DIAGRAM_HEADER:
        raise ValueError(f"bad diagram header, expected {DIAGRAM_HEADER!r}")
    bars: dict[int, list[tuple[float, float]]] = {}
    for line in it:
        line = line.rstrip("\r\n")
        if not line:
            continue
        k_s, b_s, d_s = line.split(",")
        death = math.inf if d_s == "inf" else float(d_s)
        bars.setdefault(int(k_s), []).append((float(b_s), death))
    return PersistenceDiagram({k: tuple(sorted(v)) for k, v in sorted(bars.items())})
