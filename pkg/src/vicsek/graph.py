"""Level-m graph approximations of the Vicsek set and their Neumann Laplacians."""

from __future__ import annotations

import csv
import functools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .words import Address, project

BUILD_LEVEL_CAP = 9
DEFAULT_DENSE_LEVEL_CAP = 4
_MAX_DENSE_LEVEL_CAP = 6
MULTIPLICITY_RTOL = 1e-8

# corners q1..q4 and the offsets 2*p_i (in units of the parent cell) for F_1..F_5
_Q = np.array([[0, 1], [1, 1], [1, 0], [0, 0]], dtype=np.int64)
_TWO_P = np.array([[0, 2], [2, 2], [2, 0], [0, 0], [1, 1]], dtype=np.int64)
_K4_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class LevelCapError(RuntimeError):
    """Requested level exceeds a configured resource cap."""


class LevelMismatchError(ValueError):
    pass


def dense_level_cap() -> int:
    """Level cap for dense eigensolves; ``VICSEK_LEVEL_CAP`` overrides it."""
    raw = os.environ.get("VICSEK_LEVEL_CAP")
    if raw is None:
        return DEFAULT_DENSE_LEVEL_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise LevelCapError(f"VICSEK_LEVEL_CAP must be an integer, got {raw!r}")
    if not 0 <= cap <= _MAX_DENSE_LEVEL_CAP:
        raise LevelCapError(f"VICSEK_LEVEL_CAP must lie in [0, {_MAX_DENSE_LEVEL_CAP}]")
    return cap


@dataclass(frozen=True, eq=False)
class LevelGraph:
    """Vertices, cells and edges of Gamma_m.

    Coordinates are exact: vertex ``v`` sits at ``coords[v] / 3**level``.
    ``cells[k]`` holds the vertex ids of ``F_w(q_1..q_4)`` for the k-th word
    of length ``level`` in lexicographic order.
    """

    level: int
    coords: np.ndarray
    cells: np.ndarray
    edges: np.ndarray
    degrees: np.ndarray
    _index: dict = field(repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def scale(self) -> int:
        return 3 ** self.level

    @property
    def boundary_ids(self) -> np.ndarray:
        # q_i = F_{[i]^m}(q_i); the word [i]^m has lexicographic index (i-1)(5^m-1)/4
        n = len(self.cells)
        return np.array([self.cells[i * (n - 1) // 4, i] for i in range(4)], dtype=np.int64)

    def point(self, v: int) -> tuple[Fraction, Fraction]:
        x, y = self.coords[v]
        return Fraction(int(x), self.scale), Fraction(int(y), self.scale)

    def vertex_id(self, pt) -> int:
        """Vertex id of an exact point; KeyError if the point is not in V_m."""
        x, y = (Fraction(c) * self.scale for c in pt)
        if x.denominator != 1 or y.denominator != 1:
            raise KeyError(pt)
        return self._index[(int(x), int(y))]

    def address_id(self, addr: Address) -> int:
        if addr.level > self.level:
            raise LevelMismatchError(f"address level {addr.level} > graph level {self.level}")
        return self.vertex_id(project(addr))

    def adjacency(self) -> sp.csr_matrix:
        n = self.n_vertices
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


@dataclass
class EigenfunctionField:
    level: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __add__(self, other):
        _check_same_level(self, other)
        return EigenfunctionField(self.level, self.values + other.values)

    def __mul__(self, c):
        return EigenfunctionField(self.level, c * self.values)

    __rmul__ = __mul__


def _check_same_level(u, v):
    if u.level != v.level:
        raise LevelMismatchError(f"level {u.level} != level {v.level}")


def cell_coordinates(m: int) -> np.ndarray:
    """Integer corner coordinates (units 3**-m) of every m-cell, shape (5**m, 4, 2)."""
    pts = _Q[None, :, :].copy()
    for k in range(m):
        step = 3 ** k
        pts = np.concatenate([pts + step * _TWO_P[i] for i in range(5)], axis=0)
    return pts


@functools.lru_cache(maxsize=16)
def build_graph(m: int) -> LevelGraph:
    if m < 0:
        raise ValueError("level must be non-negative")
    if m > BUILD_LEVEL_CAP:
        raise LevelCapError(f"level {m} exceeds build cap {BUILD_LEVEL_CAP}")
    pts = cell_coordinates(m).reshape(-1, 2)
    keys = pts[:, 0] * (3 ** m + 1) + pts[:, 1]
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    # renumber by order of first appearance in the (cell, corner) traversal
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    ids = rank[inverse.ravel()]
    coords = pts[first[order]]
    cells = ids.reshape(-1, 4)

    pairs = np.concatenate([cells[:, [a, b]] for a, b in _K4_PAIRS], axis=0)
    pairs.sort(axis=1)
    edges = np.unique(pairs, axis=0)
    degrees = np.bincount(edges.ravel(), minlength=len(coords))
    index = {(int(x), int(y)): v for v, (x, y) in enumerate(coords)}
    for a in (coords, cells, edges, degrees):
        a.setflags(write=False)
    return LevelGraph(m, coords, cells, edges, degrees, index)


def neumann_laplacian(g: LevelGraph, sparse: bool = False):
    """Matrix of -Delta_m: 1 on the diagonal, -1/deg(x) for each neighbour y of x."""
    A = g.adjacency()
    L = sp.identity(g.n_vertices, format="csr") - sp.diags(1.0 / g.degrees) @ A
    if sparse:
        return L.tocsr()
    return L.toarray()


def apply_laplacian(g: LevelGraph, u) -> np.ndarray:
    """Matrix-free (-Delta_m) u."""
    u = np.asarray(u, dtype=float)
    e = g.edges
    s = np.bincount(e[:, 0], weights=u[e[:, 1]], minlength=g.n_vertices)
    s += np.bincount(e[:, 1], weights=u[e[:, 0]], minlength=g.n_vertices)
    return u - s / g.degrees


def graph_energy(g: LevelGraph, u: EigenfunctionField, renormalized: bool = False) -> float:
    """E_m(u), the sum of squared differences over edges.

    The renormalized energy is ``3**m * E_m``: this is the scaling under which
    harmonic extension leaves the energy unchanged.
    """
    if u.level != g.level:
        raise LevelMismatchError(f"field level {u.level} != graph level {g.level}")
    e = g.edges
    E = float(np.sum((u.values[e[:, 0]] - u.values[e[:, 1]]) ** 2))
    return E * 3 ** g.level if renormalized else E


@dataclass
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray  # orthonormal eigenvectors of the symmetrized matrix
    groups: list  # [(eigenvalue, multiplicity)]

    def multiplicity(self, value: float, tol: float = 1e-8) -> int:
        return int(np.sum(np.abs(self.values - value) <= tol * max(1.0, abs(value))))


def group_eigenvalues(values, rtol: float = MULTIPLICITY_RTOL):
    groups = []
    for v in np.sort(values):
        if groups and abs(v - groups[-1][-1]) <= rtol * max(1.0, abs(v)):
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def dense_eigensolve(L, degrees) -> Spectrum:
    """Eigen-decomposition of ``L = I - D^{-1}A`` through its symmetric form.

    ``D^{1/2} L D^{-1/2}`` is symmetric with the same spectrum; eigenvectors
    of ``L`` are ``D^{-1/2}`` times the returned ``vectors``.
    """
    L = np.asarray(L.toarray() if sp.issparse(L) else L, dtype=float)
    n = L.shape[0]
    cap = 3 * 5 ** dense_level_cap() + 1
    if n > cap:
        raise LevelCapError(f"dimension {n} exceeds dense eigensolve cap {cap}")
    d = np.sqrt(np.asarray(degrees, dtype=float))
    S = d[:, None] * L / d[None, :]
    S = 0.5 * (S + S.T)
    values, vectors = np.linalg.eigh(S)
    return Spectrum(values, vectors, group_eigenvalues(values))


def graph_spectrum(m: int) -> Spectrum:
    g = build_graph(m)
    if m > dense_level_cap():
        raise LevelCapError(f"level {m} exceeds dense level cap {dense_level_cap()}")
    return dense_eigensolve(neumann_laplacian(g), g.degrees)


def _reduced(num: int, den: int):
    k = math.gcd(num, den)
    return num // k, den // k


def vertex_rows(g: LevelGraph, values: Optional[np.ndarray] = None):
    boundary = set(int(v) for v in g.boundary_ids)
    for v in range(g.n_vertices):
        xn, xd = _reduced(int(g.coords[v, 0]), g.scale)
        yn, yd = _reduced(int(g.coords[v, 1]), g.scale)
        row = [v, xn, xd, yn, yd, int(g.degrees[v]), int(v in boundary)]
        if values is not None:
            row.append(repr(float(values[v])))
        yield row


VERTEX_HEADER = ["id", "x_num", "x_den", "y_num", "y_den", "degree", "is_boundary"]


def write_vertices_csv(g: LevelGraph, fh, values=None):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(VERTEX_HEADER + (["value"] if values is not None else []))
    w.writerows(vertex_rows(g, values))


def write_edges_csv(g: LevelGraph, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["source", "target"])
    w.writerows(g.edges.tolist())
