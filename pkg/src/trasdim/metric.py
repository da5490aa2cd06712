"""Finite infinity-pseudometric spaces and scale-r-components.

Distances are kept exactly as given (ints, Fractions, floats or ``math.inf``);
all threshold comparisons are done on the stored values, never with an epsilon.
Balls are open: ``y`` lies in ``B(x, r)`` iff ``d(x, y) < r``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

INF = math.inf

__all__ = [
    "INF",
    "MetricError",
    "MetricSpace",
    "SubspacePartition",
    "from_matrix",
    "from_graph",
    "path",
    "grid",
    "disjoint_union",
    "random_space",
    "build",
    "scale_components",
    "ball_chain_components",
    "is_zero_dim",
    "is_r_disjoint",
    "mesh",
    "diameter",
    "set_distance",
]


class MetricError(ValueError):
    pass


def _exact(v) -> Fraction:
    return Fraction(v)


def _le_exact(a, b, c) -> bool:
    """a <= b + c with infinity absorbing and no rounding."""
    if b == INF or c == INF:
        return True
    if a == INF:
        return False
    return _exact(a) <= _exact(b) + _exact(c)


_FINITE_CAP = 1 << 60


def _scaled_integers(dist) -> Optional[np.ndarray]:
    """Entries times the common denominator as int64 (INF -> 2**61), or None if not exactly possible."""
    denominators = set()
    for row in dist:
        for v in row:
            if isinstance(v, Fraction):
                denominators.add(v.denominator)
            elif not (isinstance(v, int) or v == INF):
                return None
    L = math.lcm(*denominators) if denominators else 1
    out = np.empty((len(dist), len(dist)), dtype=np.int64)
    for i, row in enumerate(dist):
        for j, v in enumerate(row):
            if v == INF:
                out[i, j] = 2 * _FINITE_CAP
            else:
                k = int(v * L)
                if k >= _FINITE_CAP:
                    return None
                out[i, j] = k
    return out


class MetricSpace:
    """A finite set of labelled points with an infinity-pseudometric.

    The triangle inequality, symmetry and the zero diagonal are verified on
    construction.
    """

    def __init__(self, labels: Sequence[Hashable], dist: Sequence[Sequence[Real]], kind: str = "matrix", spec: Optional[dict] = None):
        self.labels = list(labels)
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise MetricError("point labels must be distinct")
        rows = [list(r) for r in dist]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise MetricError(f"distance matrix must be {n}x{n}")
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, Real):
                    raise MetricError(f"d({self.labels[i]!r}, {self.labels[j]!r}) = {v!r} is not a number")
                if v != v:
                    raise MetricError("NaN distance")
                if v < 0:
                    raise MetricError(f"negative distance d({self.labels[i]!r}, {self.labels[j]!r}) = {v}")
            if row[i] != 0:
                raise MetricError(f"d({self.labels[i]!r}, itself) = {row[i]} is not 0")
        for i, j in itertools.combinations(range(n), 2):
            if rows[i][j] != rows[j][i]:
                raise MetricError(f"asymmetric distance between {self.labels[i]!r} and {self.labels[j]!r}")
        self.dist = rows
        self.kind = kind
        self.spec = spec
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._check_triangle()

    def _check_triangle(self):
        n = len(self.labels)
        if n < 3:
            return
        scaled = _scaled_integers(self.dist)
        if scaled is not None:
            # exact in int64: INF maps above every finite sum
            for y in range(n):
                bad = scaled > scaled[:, y : y + 1] + scaled[y : y + 1, :]
                if bad.any():
                    x, z = (int(v) for v in np.argwhere(bad)[0])
                    self._triangle_error(x, y, z)
            return
        arr = np.array([[float(v) for v in row] for row in self.dist])
        # float screen, widened for rounding; every flagged triple is re-checked exactly
        slack = 1e-9
        for y in range(n):
            s = arr[:, y : y + 1] + arr[y : y + 1, :]
            with np.errstate(invalid="ignore"):
                bad = arr > s - slack * np.abs(s)
            if not bad.any():
                continue
            for x, z in zip(*np.nonzero(bad)):
                if not _le_exact(self.dist[x][z], self.dist[x][y], self.dist[y][z]):
                    self._triangle_error(x, y, z)

    def _triangle_error(self, x: int, y: int, z: int):
        lab = self.labels
        raise MetricError(
            f"triangle inequality fails: d({lab[x]!r},{lab[z]!r}) = {self.dist[x][z]} > "
            f"d({lab[x]!r},{lab[y]!r}) + d({lab[y]!r},{lab[z]!r})"
        )

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"MetricSpace(kind={self.kind!r}, points={len(self)})"

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise MetricError(f"no point labelled {label!r}") from None

    def d(self, i: int, j: int):
        return self.dist[i][j]

    def diameter(self) -> Real:
        return diameter(self, range(len(self)))

    def to_json(self) -> dict:
        if self.spec is not None:
            return self.spec
        return {
            "kind": "matrix",
            "labels": [_json_label(l) for l in self.labels],
            "matrix": [[_json_value(v) for v in row] for row in self.dist],
        }


def _json_label(label):
    return list(label) if isinstance(label, tuple) else label


def _json_value(v):
    if v == INF:
        return "INF"
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return v


def _parse_value(v):
    if isinstance(v, str):
        if v.strip().upper() in ("INF", "INFINITY"):
            return INF
        try:
            f = Fraction(v)
        except ValueError:
            raise MetricError(f"cannot read distance {v!r}") from None
        return f.numerator if f.denominator == 1 else f
    return v


def from_matrix(matrix: Sequence[Sequence], labels: Optional[Sequence] = None) -> MetricSpace:
    """Explicit matrix; entries may be numbers, "INF", or rational strings like "3/2"."""
    rows = [[_parse_value(v) for v in row] for row in matrix]
    if labels is None:
        labels = list(range(len(rows)))
    return MetricSpace(labels, rows, kind="matrix")


def from_graph(n: int, edges: Iterable[Sequence], labels: Optional[Sequence] = None) -> MetricSpace:
    """Shortest-path metric of an undirected weighted graph on vertices 0..n-1.

    Edges are ``(u, v)`` (weight 1) or ``(u, v, w)``; unreachable pairs get INF.
    """
    adj: list[list[tuple[int, Real]]] = [[] for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = _parse_value(e[2]) if len(e) > 2 else 1
        if w < 0:
            raise MetricError(f"negative edge weight on {u}-{v}")
        if not (0 <= u < n and 0 <= v < n):
            raise MetricError(f"edge {u}-{v} outside vertices 0..{n - 1}")
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist = [[INF] * n for _ in range(n)]
    for s in range(n):
        row = dist[s]
        row[s] = 0
        heap = [(0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > row[u]:
                continue
            for v, w in adj[u]:
                nd = du + w
                if nd < row[v]:
                    row[v] = nd
                    heapq.heappush(heap, (nd, v))
    return MetricSpace(labels if labels is not None else list(range(n)), dist, kind="graph")


def path(n: int) -> MetricSpace:
    """The integer path {0..n} with d(i, j) = |i - j|."""
    sp = MetricSpace(list(range(n + 1)), [[abs(i - j) for j in range(n + 1)] for i in range(n + 1)], kind="grid")
    sp.spec = {"kind": "grid", "size": n, "dim": 1, "norm": "l1"}
    return sp


def grid(size: int, dim: int = 2, norm: str = "linf") -> MetricSpace:
    """The grid [0..size]^dim under the l1 or l-infinity norm, points in lexicographic order."""
    if norm not in ("l1", "linf"):
        raise MetricError(f"unknown norm {norm!r}")
    pts = list(itertools.product(range(size + 1), repeat=dim))
    P = np.array(pts, dtype=np.int64).reshape(len(pts), dim)
    diff = np.abs(P[:, None, :] - P[None, :, :])
    D = diff.sum(axis=2) if norm == "l1" else diff.max(axis=2)
    labels = [p[0] if dim == 1 else p for p in pts]
    sp = MetricSpace(labels, D.tolist(), kind="grid", spec={"kind": "grid", "size": size, "dim": dim, "norm": norm})
    sp.grid_shape = (size + 1,) * dim
    return sp


def disjoint_union(*spaces: MetricSpace) -> MetricSpace:
    """Disjoint union with all cross distances INF; labels become (part, label)."""
    labels = []
    offsets = []
    for k, sp in enumerate(spaces):
        offsets.append(len(labels))
        labels.extend((k, lab) for lab in sp.labels)
    n = len(labels)
    dist = [[INF] * n for _ in range(n)]
    for sp, off in zip(spaces, offsets):
        for i, row in enumerate(sp.dist):
            dist[off + i][off : off + len(sp)] = row
    spec = {"kind": "disjoint_union", "parts": [sp.to_json() for sp in spaces]}
    return MetricSpace(labels, dist, kind="disjoint_union", spec=spec)


def random_space(n: int, seed: int = 0, denominator: int = 4, max_numerator: int = 40,
                 edge_prob: float = 0.5, zero_prob: float = 0.05) -> MetricSpace:
    """Random rational metric: random weights k/denominator repaired by shortest-path closure.

    Each pair gets an edge with probability ``edge_prob`` (weight 0 with
    probability ``zero_prob``); pairs left unconnected end up at INF.
    """
    rng = np.random.default_rng(seed)
    big = np.iinfo(np.int64).max // 4
    W = np.full((n, n), big, dtype=np.int64)
    np.fill_diagonal(W, 0)
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < edge_prob:
            w = 0 if rng.random() < zero_prob else int(rng.integers(1, max_numerator + 1))
            W[i, j] = W[j, i] = w
    for k in range(n):
        W = np.minimum(W, W[:, k : k + 1] + W[k : k + 1, :])
    dist = [[INF if W[i, j] >= big else Fraction(int(W[i, j]), denominator) for j in range(n)] for i in range(n)]
    spec = {"kind": "random", "n": n, "seed": seed, "denominator": denominator,
            "max_numerator": max_numerator, "edge_prob": edge_prob, "zero_prob": zero_prob}
    return MetricSpace(list(range(n)), dist, kind="random", spec=spec)


def build(doc: dict) -> MetricSpace:
    """Build a space from its JSON document (see the README for the formats)."""
    kind = doc.get("kind")
    if kind == "matrix":
        labels = doc.get("labels")
        if labels is not None:
            labels = [tuple(l) if isinstance(l, list) else l for l in labels]
        sp = from_matrix(doc["matrix"], labels)
    elif kind == "graph":
        sp = from_graph(int(doc["n"]), doc.get("edges", []))
    elif kind == "path":
        sp = path(int(doc["size"]))
    elif kind == "grid":
        size, dim = int(doc["size"]), int(doc.get("dim", 2))
        norm = doc.get("norm", "linf")
        sp = path(size) if dim == 1 else grid(size, dim, norm)
    elif kind == "disjoint_union":
        sp = disjoint_union(*(build(part) for part in doc["parts"]))
    elif kind == "random":
        keys = ("denominator", "max_numerator", "edge_prob", "zero_prob")
        sp = random_space(int(doc["n"]), int(doc.get("seed", 0)), **{k: doc[k] for k in keys if k in doc})
    else:
        raise MetricError(f"unknown space kind {kind!r}")
    sp.spec = doc
    return sp


def diameter(X: MetricSpace, points: Iterable[int]) -> Real:
    pts = list(points)
    best = 0
    for i, j in itertools.combinations(pts, 2):
        v = X.dist[i][j]
        if v > best:
            best = v
    return best


def set_distance(X: MetricSpace, A: Iterable[int], B: Iterable[int]) -> Real:
    A, B = list(A), list(B)
    return min((X.dist[a][b] for a in A for b in B), default=INF)


@dataclass(frozen=True)
class SubspacePartition:
    blocks: tuple[tuple[int, ...], ...]
    diameters: tuple[Real, ...]

    @property
    def mesh(self) -> Real:
        return max(self.diameters, default=0)

    def to_json(self, X: Optional[MetricSpace] = None) -> list[dict]:
        out = []
        for block, diam in zip(self.blocks, self.diameters):
            pts = [_json_label(X.labels[i]) for i in block] if X is not None else list(block)
            out.append({"points": pts, "diameter": _json_value(diam)})
        return out


def _partition(X: MetricSpace, groups: Iterable[Iterable[int]]) -> SubspacePartition:
    blocks = sorted(tuple(sorted(g)) for g in groups)
    return SubspacePartition(tuple(blocks), tuple(diameter(X, b) for b in blocks))


def scale_components(X: MetricSpace, Y: Optional[Iterable[int]], r: Real) -> SubspacePartition:
    """Scale-r-components of the subspace Y: components of the graph d(x, y) < r on Y."""
    if not r > 0:
        raise MetricError("scale must be positive")
    pts = sorted(set(range(len(X)) if Y is None else Y))
    parent = {p: p for p in pts}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in itertools.combinations(pts, 2):
        if X.dist[i][j] < r:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for p in pts:
        groups.setdefault(find(p), []).append(p)
    return _partition(X, groups.values())


def ball_chain_components(X: MetricSpace, Y: Optional[Iterable[int]], r: Real) -> SubspacePartition:
    """Scale-r-components computed literally: x ~ y when some z in Y lies in both open r-balls.

    The chain relation is closed transitively with boolean matrix squaring.
    Used as an independent check of ``scale_components``.
    """
    if not r > 0:
        raise MetricError("scale must be positive")
    pts = sorted(set(range(len(X)) if Y is None else Y))
    if not pts:
        return SubspacePartition((), ())
    ball = np.array([[X.dist[a][b] < r for b in pts] for a in pts], dtype=bool)
    meet = (ball.astype(np.int64) @ ball.T.astype(np.int64)) > 0
    reach = meet | np.eye(len(pts), dtype=bool)
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if (nxt == reach).all():
            break
        reach = nxt
    seen = set()
    groups = []
    for a in range(len(pts)):
        if a in seen:
            continue
        members = [pts[b] for b in np.nonzero(reach[a])[0]]
        seen.update(int(b) for b in np.nonzero(reach[a])[0])
        groups.append(members)
    return _partition(X, groups)


def is_zero_dim(X: MetricSpace, Y: Optional[Iterable[int]], r: Real, B: Real) -> bool:
    """Every scale-r-component of Y has diameter at most B."""
    if B < 0:
        raise MetricError("bound must be non-negative")
    return scale_components(X, Y, r).mesh <= B


def _check_blocks(blocks) -> list[list[int]]:
    blocks = [list(b) for b in blocks]
    seen: set = set()
    for b in blocks:
        if seen.intersection(b):
            raise MetricError("blocks overlap")
        seen.update(b)
    return blocks


def is_r_disjoint(X: MetricSpace, blocks: Iterable[Iterable[int]], r: Real) -> bool:
    """dist(A, B) >= r for every two distinct blocks."""
    blocks = _check_blocks(blocks)
    return all(set_distance(X, A, B) >= r for A, B in itertools.combinations(blocks, 2))


def mesh(X: MetricSpace, blocks: Iterable[Iterable[int]]) -> Real:
    blocks = _check_blocks(blocks)
    return max((diameter(X, b) for b in blocks), default=0)
