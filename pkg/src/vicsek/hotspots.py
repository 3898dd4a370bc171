"""The partition of unity f, g, h, k and the hot-spots checks built on it.

Two independent evaluators of f are provided. ``quad_from_eigenbasis`` reads
the matrix-extended eigenfunctions u1, u2, u3 at the projected point of an
address; ``f_recursive`` / ``recursive_tables`` only use the one-letter
recursion on words. Their agreement is checked in ``equivalence_check``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .decimation import LambdaTable, extend_basis_cells, scatter_cells
from .graph import build_graph
from .reports import MAX_WITNESSES, PropertyResult, Report
from .words import ALPHABET, Address, Word, rotate1, rotate2

TOL = 1e-12

# rows f, g, h, k in terms of (u1, u2, u3); each adds 1/4
QUAD_MATRIX = np.array([
    [0.75, -0.25, -0.25],
    [-0.25, 0.75, -0.25],
    [-0.25, -0.25, 0.75],
    [-0.25, -0.25, -0.25],
])
_NAMES = ("f", "g", "h", "k")


@dataclass(frozen=True)
class PartitionQuad:
    f: float
    g: float
    h: float
    k: float

    @property
    def total(self) -> float:
        return self.f + self.g + self.h + self.k

    def as_tuple(self):
        return (self.f, self.g, self.h, self.k)


@dataclass(frozen=True)
class EigenCombination:
    c1: float
    c2: float
    c3: float

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=float)

    @property
    def boundary_values(self):
        return (self.c1, self.c2, self.c3, -self.c1 - self.c2 - self.c3)

    @property
    def scale(self) -> float:
        return max(abs(c) for c in (self.c1, self.c2, self.c3))


# -- eigenbasis evaluator ----------------------------------------------------

class ExtendedBasis:
    """u1, u2, u3 extended by decimation up to ``depth``.

    ``cells[m]`` has shape (5**m, 4, 3): values at F_w(q_j) for the words w of
    length m in lexicographic order.
    """

    def __init__(self, depth: int, lambdas: Optional[LambdaTable] = None):
        self.depth = depth
        self.lambdas = lambdas or LambdaTable.build(max(depth, 1))
        self.cells = extend_basis_cells(depth, self.lambdas)
        self._vertex = {}

    def vertex_values(self, m: int) -> np.ndarray:
        if m not in self._vertex:
            self._vertex[m] = scatter_cells(build_graph(m), self.cells[m])
        return self._vertex[m]

    def quads(self, m: int) -> np.ndarray:
        """f, g, h, k at every (word, corner) of length m: shape (5**m, 4, 4)."""
        return self.cells[m] @ QUAD_MATRIX.T + 0.25


@lru_cache(maxsize=4)
def extended_basis(depth: int) -> ExtendedBasis:
    return ExtendedBasis(depth)


def quad_from_eigenbasis(addr: Address, basis: ExtendedBasis) -> PartitionQuad:
    m = addr.level
    if m > basis.depth:
        raise ValueError(f"address level {m} exceeds extended depth {basis.depth}")
    v = build_graph(m).address_id(addr)
    u = basis.vertex_values(m)[v]
    return PartitionQuad(*(QUAD_MATRIX @ u + 0.25))


# -- recursive evaluator -----------------------------------------------------

def _rule(letter: int, corner: int, coef):
    """Weights over the parent corners and constant for f(w·letter, corner).

    Plain Python arithmetic, so Fraction coefficients give exact values.
    """
    if letter <= 4 and corner == letter:
        return [int(k == letter) for k in range(1, 5)], 0
    if letter == 5 or corner == (letter + 1) % 4 + 1:
        pos = corner if letter == 5 else letter
        big, small = coef.beta, coef.delta
    else:
        pos = letter
        big, small = coef.alpha, coef.chi
    return [big if k == pos else small for k in range(1, 5)], (1 - big - 3 * small) / 4


def f_exact(addr: Address, lambdas, which: str = "f"):
    """The one-letter recursion in the arithmetic of ``lambdas`` (e.g. Fractions)."""
    from .decimation import coefficients
    vals = [int(k == _NAMES.index(which)) for k in range(4)]
    for m, x in enumerate(addr.word, start=1):
        coef = coefficients(lambdas[m])
        vals = [sum(w * v for w, v in zip(weights, vals)) + const
                for weights, const in (_rule(x, i, coef) for i in range(1, 5))]
    return vals[addr.corner - 1]


@lru_cache(maxsize=64)
def _letter_maps(lam: float):
    from .decimation import coefficients
    coef = coefficients(lam)
    T = np.zeros((5, 4, 4))
    c = np.zeros((5, 4))
    for x in ALPHABET:
        for i in range(1, 5):
            T[x - 1, i - 1], c[x - 1, i - 1] = _rule(x, i, coef)
    return T, c


def _base(which: str) -> np.ndarray:
    return np.eye(4)[_NAMES.index(which)]


def f_recursive(addr: Address, lambdas: LambdaTable, which: str = "f") -> float:
    """Value of f (or g, h, k) at an address by the one-letter recursion."""
    vals = _base(which)
    for m, x in enumerate(addr.word, start=1):
        if m >= len(lambdas):
            raise ValueError(f"lambda table too short for level {m}")
        T, c = _letter_maps(float(lambdas[m]))
        vals = T[x - 1] @ vals + c[x - 1]
    return float(vals[addr.corner - 1])


def recursive_tables(depth: int, lambdas: Optional[LambdaTable] = None):
    """Recursion tables, one per length m <= depth, each (5**m, 4, 4).

    Axis 1 is the corner, axis 2 selects f, g, h, k.
    """
    lambdas = lambdas or LambdaTable.build(max(depth, 1))
    tables = [np.eye(4)[None, :, :]]
    for m in range(1, depth + 1):
        T, c = _letter_maps(float(lambdas[m]))
        prev = tables[-1]
        nxt = np.einsum("xij,njf->nxif", T, prev) + c[None, :, :, None]
        tables.append(nxt.reshape(-1, 4, 4))
    return tables


# -- closed forms ------------------------------------------------------------

def closed_form_1m(m: int, lambdas: LambdaTable):
    if m < 1:
        raise ValueError("m must be >= 1")
    lam = float(lambdas[m])
    return (1.0, 1.0, 1.0 - 2.25 * lam, 1.0)


def closed_form_2m(m: int, lambdas: LambdaTable):
    if m < 1:
        raise ValueError("m must be >= 1")
    return (0.0, 0.0, 0.0, 0.75 * float(lambdas[m]))


def closed_form_5m(m: int, lambdas: LambdaTable):
    """f([5]^m, 1..4); the product formulas also reproduce m = 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    prod = 1.0
    for k in range(1, m + 1):
        prod /= 1.0 - 2.0 * float(lambdas[k])
    top = 0.25 + 0.25 * prod / 3 ** (m - 1)
    rest = 0.25 - 0.25 * prod / 3 ** m
    return (top, rest, rest, rest)


# -- sweeps ------------------------------------------------------------------

def word_digits(m: int) -> np.ndarray:
    """Letters of all length-m words in lexicographic order, shape (5**m, m)."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int8)
    idx = np.arange(5 ** m)
    return np.stack([(idx // 5 ** (m - 1 - k)) % 5 + 1 for k in range(m)], axis=1).astype(np.int8)


def word_index(digits: np.ndarray) -> np.ndarray:
    m = digits.shape[1]
    weights = 5 ** np.arange(m - 1, -1, -1)
    return (digits.astype(np.int64) - 1) @ weights


def _address(m: int, idx: int, corner0: int) -> Address:
    letters = word_digits(m)[idx] if m <= 7 else _digits_of(m, idx)
    return Address(Word(letters), corner0 + 1)


def _digits_of(m, idx):
    return [(idx // 5 ** (m - 1 - k)) % 5 + 1 for k in range(m)]


def _addr_key(addr: Address):
    return (tuple(addr.word), addr.corner)


def _collect(mask_by_level, value_by_level, limit=MAX_WITNESSES):
    """Witness addresses where mask holds, in lexicographic address order."""
    found = []
    count = 0
    for m, mask in enumerate(mask_by_level):
        hits = np.argwhere(mask)
        count += len(hits)
        for n, j in hits[:limit]:
            found.append((Address(Word(_digits_of(m, int(n))), int(j) + 1), float(value_by_level[m][n, j])))
    found.sort(key=lambda t: _addr_key(t[0]))
    return count, [{"address": str(a), "value": v} for a, v in found[:limit]]


def partition_check(depth: int, basis: Optional[ExtendedBasis] = None, tol: float = TOL) -> Report:
    """f+g+h+k = 1 and 0 <= f,g,h,k <= 1 at every address of length <= depth."""
    basis = basis or ExtendedBasis(depth)
    rep = Report("partition", {"depth": depth, "tol": tol})
    sum_err = []
    low = []
    high = []
    worst = 0.0
    lo_v, hi_v = np.inf, -np.inf
    for m in range(depth + 1):
        Q = basis.quads(m)
        err = np.abs(Q.sum(axis=2) - 1.0)
        worst = max(worst, float(err.max()))
        sum_err.append((err, err >= tol))
        lo_v = min(lo_v, float(Q.min()))
        hi_v = max(hi_v, float(Q.max()))
        low.append((Q.min(axis=2), Q.min(axis=2) < -tol))
        high.append((Q.max(axis=2), Q.max(axis=2) > 1 + tol))
    n, w = _collect([b for _, b in sum_err], [e for e, _ in sum_err])
    rep.add(PropertyResult("partition_of_unity", n == 0, w, {"max_abs_error": worst},
                           f"{n} violations"))
    n1, w1 = _collect([b for _, b in low], [v for v, _ in low])
    n2, w2 = _collect([b for _, b in high], [v for v, _ in high])
    rep.add(PropertyResult("bounds_0_1", n1 + n2 == 0, w1 + w2, {"min": lo_v, "max": hi_v},
                           f"{n1} below 0, {n2} above 1"))
    return rep


def _extreme(tables_f, which, first_letter=None, tol=TOL):
    """Extreme of f over lengths >= 1 (or all, if first_letter is None) with witnesses."""
    fn = np.max if which == "max" else np.min
    levels = range(len(tables_f)) if first_letter is None else range(1, len(tables_f))
    best = None
    for m in levels:
        F = tables_f[m] if first_letter is None else _block(tables_f[m], m, first_letter)
        v = float(fn(F))
        if best is None or (v > best if which == "max" else v < best):
            best = v
    masks, vals = [], []
    for m in range(len(tables_f)):
        if m not in levels:
            masks.append(np.zeros_like(tables_f[m], dtype=bool))
            vals.append(tables_f[m])
            continue
        F = tables_f[m]
        mask = np.abs(F - best) <= tol
        if first_letter is not None:
            keep = np.zeros(len(F), dtype=bool)
            keep[_block_slice(m, first_letter)] = True
            mask &= keep[:, None]
        masks.append(mask)
        vals.append(F)
    n, w = _collect(masks, vals)
    return best, n, w


def _block_slice(m, first_letter):
    size = 5 ** (m - 1)
    return slice((first_letter - 1) * size, first_letter * size)


def _block(F, m, first_letter):
    return F[_block_slice(m, first_letter)]


def sweep_bounds(depth: int, first_letters: Iterable[int] = ALPHABET,
                 lambdas: Optional[LambdaTable] = None, tol: float = TOL) -> Report:
    """Global and per-first-letter extremes of f over all addresses to ``depth``.

    Global: min f = 0 and max f = 1. Per first letter i: the extremes of
    f(i w, j) over all w are already attained on the word of length one.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    tables = [t[:, :, 0] for t in recursive_tables(depth, lambdas)]
    rep = Report("sweep", {"depth": depth, "first_letters": sorted(first_letters), "tol": tol})
    for which, target in (("max", 1.0), ("min", 0.0)):
        best, n, w = _extreme(tables, which)
        rep.add(PropertyResult(f"global_{which}", abs(best - target) <= tol, w,
                               {which: best, "ties": n}, f"expected {target}"))
    if depth >= 1:
        for i in sorted(first_letters):
            row = tables[1][i - 1]
            for which in ("max", "min"):
                expect = float(row.max() if which == "max" else row.min())
                best, n, w = _extreme(tables, which, first_letter=i)
                ok = abs(best - expect) <= tol
                rep.add(PropertyResult(f"prefix_{i}_{which}", ok, w,
                                       {which: best, f"{which}_at_length_1": expect, "ties": n}))
    return rep


def hotspots_check(c: EigenCombination, level: int, basis: Optional[ExtendedBasis] = None,
                   rel_tol: float = TOL) -> PropertyResult:
    """Every value of u = c1 u1 + c2 u2 + c3 u3 on V_level lies between its V_0 extremes."""
    basis = basis or extended_basis(level)
    u = basis.vertex_values(level) @ c.coefficients
    bvals = c.boundary_values
    lo, hi = min(bvals), max(bvals)
    eps = rel_tol * c.scale
    bad = np.flatnonzero((u < lo - eps) | (u > hi + eps))
    g = build_graph(level)
    witnesses = [{"vertex": int(v), "point": [str(p) for p in g.point(int(v))], "value": float(u[v])}
                 for v in bad[:MAX_WITNESSES]]
    extremes = {
        "boundary_min": lo, "boundary_max": hi,
        "min": float(u.min()), "max": float(u.max()),
        "argmin_boundary": [i + 1 for i, b in enumerate(bvals) if b == lo],
        "argmax_boundary": [i + 1 for i, b in enumerate(bvals) if b == hi],
    }
    return PropertyResult(f"hotspots c=({c.c1:.6g},{c.c2:.6g},{c.c3:.6g})", len(bad) == 0,
                          witnesses, extremes, f"{len(bad)} vertices outside [{lo}, {hi}]")


def random_hotspots(trials: int, level: int, seed: int) -> Report:
    rng = np.random.default_rng(seed)
    basis = extended_basis(level)
    rep = Report("hotspots", {"trials": trials, "level": level}, seed)
    for c in rng.uniform(-1.0, 1.0, size=(trials, 3)):
        rep.add(hotspots_check(EigenCombination(*map(float, c)), level, basis))
    return rep


def _rotated_index(m, perm):
    digits = word_digits(m)
    return word_index(perm[digits]) if m else np.zeros(1, dtype=np.int64)


_R1 = np.array([0, 1, 4, 3, 2, 5])  # index by letter; 0 unused
_R2 = np.array([0, 2, 3, 4, 1, 5])
_R2_INV = np.array([0, 4, 1, 2, 3, 5])


def symmetry_check(depth: int, lambdas: Optional[LambdaTable] = None, tol: float = TOL) -> Report:
    """Rotation identities of f and the basis-change relations with u1, u2, u3."""
    lambdas = lambdas or LambdaTable.build(max(depth, 1))
    tables = recursive_tables(depth, lambdas)
    basis = ExtendedBasis(depth, lambdas)
    rep = Report("symmetry", {"depth": depth, "tol": tol})

    # f(w, i) = f(R1 w, R1 i)
    errs = []
    for m in range(depth + 1):
        F = tables[m][:, :, 0]
        G = F[_rotated_index(m, _R1)][:, _R1[1:5] - 1]
        errs.append(np.abs(F - G))
    _add_equality(rep, "f_R1_invariance", errs, tol)

    # f(2w, i) = f(3 R2(w), R2(i))
    errs = []
    for m in range(1, depth + 1):
        F = tables[m][:, :, 0]
        sub = word_digits(m - 1)
        two = word_index(np.concatenate([np.full((len(sub), 1), 2, np.int8), sub], axis=1))
        three = word_index(np.concatenate([np.full((len(sub), 1), 3, np.int8), _R2[sub]], axis=1))
        errs.append(np.abs(F[two] - F[three][:, _R2[1:5] - 1]))
    _add_equality(rep, "f_R2_transport", [np.zeros((1, 4))] + errs, tol)

    # g, h, k are f transported by R2^-1, R2^-2, R2^-3
    for s, name in ((1, "g"), (2, "h"), (3, "k")):
        errs = []
        for m in range(depth + 1):
            F = tables[m][:, :, 0]
            idx = np.arange(5 ** m)
            corners = np.arange(1, 5)
            for _ in range(s):
                idx = _apply_perm_index(m, idx, _R2_INV)
                corners = _R2_INV[corners]
            errs.append(np.abs(tables[m][:, :, _NAMES.index(name)] - F[idx][:, corners - 1]))
        _add_equality(rep, f"{name}_is_rotated_f", errs, tol)

    # f-k = u1, g-k = u2, h-k = u3 (recursion against the matrix extension)
    for n, name in enumerate(("f", "g", "h")):
        errs = [np.abs(tables[m][:, :, n] - tables[m][:, :, 3] - basis.cells[m][:, :, n])
                for m in range(depth + 1)]
        _add_equality(rep, f"{name}_minus_k_is_u{n + 1}", errs, tol)

    # Kronecker values on the empty word
    base = tables[0][0]
    rep.add(PropertyResult("empty_word_kronecker", bool(np.allclose(base, np.eye(4), atol=tol, rtol=0)),
                           extremes={"values": base.tolist()}))
    return rep


def _apply_perm_index(m, idx, perm):
    if m == 0:
        return idx
    digits = word_digits(m)[idx]
    return word_index(perm[digits])


def _add_equality(rep, name, errs, tol):
    masks = [e > tol for e in errs]
    n, w = _collect(masks, errs)
    worst = max(float(e.max()) for e in errs)
    rep.add(PropertyResult(name, n == 0, w, {"max_abs_error": worst}, f"{n} violations"))


def three_equal_corners_check(depth: int = 4, lambdas: Optional[LambdaTable] = None, tol: float = TOL) -> Report:
    """When three of f(w,1..4) agree, the children obey the induced equalities."""
    lambdas = lambdas or LambdaTable.build(depth + 1)
    tables = [t[:, :, 0] for t in recursive_tables(depth + 1, lambdas)]
    cases = {
        (1, 2, 3): ([(1, 2), (1, 4), (2, 1), (2, 3), (3, 2), (3, 4)], [(1, 3), (2, 4), (3, 1)]),
        (1, 2, 4): ([(1, 2), (1, 4), (2, 1), (2, 3), (4, 1), (4, 3)], [(1, 3), (2, 4), (4, 2)]),
        (2, 3, 4): ([(2, 1), (2, 3), (3, 2), (3, 4), (4, 1), (4, 3)], [(2, 4), (3, 1), (4, 2)]),
    }
    rep = Report("three_equal_corners", {"depth": depth, "tol": tol})
    for trio, groups in cases.items():
        checked = 0
        bad = []
        for m in range(depth + 1):
            F = tables[m]
            sel = np.flatnonzero(np.ptp(F[:, [t - 1 for t in trio]], axis=1) <= tol)
            checked += len(sel)
            child = tables[m + 1]
            for grp in groups:
                vals = np.stack([child[5 * sel + x - 1, j - 1] for x, j in grp], axis=1)
                spread = np.ptp(vals, axis=1) if len(sel) else np.zeros(0)
                for n in sel[spread > tol][:MAX_WITNESSES]:
                    bad.append({"word": "".join(map(str, _digits_of(m, int(n)))) or "∅", "group": grp})
        rep.add(PropertyResult(f"three_equal_corners_{''.join(map(str, trio))}", not bad, bad[:MAX_WITNESSES],
                               {"words_checked": checked}))
    return rep


def equivalence_check(depth: int, lambdas: Optional[LambdaTable] = None, tol: float = TOL) -> Report:
    """Recursion tables against f, g, h, k read from the matrix-extended basis."""
    lambdas = lambdas or LambdaTable.build(max(depth, 1))
    tables = recursive_tables(depth, lambdas)
    basis = ExtendedBasis(depth, lambdas)
    rep = Report("equivalence", {"depth": depth, "tol": tol})
    errs = [np.abs(tables[m] - basis.quads(m)).max(axis=2) for m in range(depth + 1)]
    _add_equality(rep, "recursion_matches_extension", errs, tol)
    return rep


def closed_form_check(max_m: int = 12, lambdas: Optional[LambdaTable] = None, tol: float = TOL) -> Report:
    lambdas = lambdas or LambdaTable.build(max_m)
    rep = Report("closed_forms", {"max_m": max_m, "tol": tol})
    forms = {1: closed_form_1m, 2: closed_form_2m, 5: closed_form_5m}
    for letter, form in forms.items():
        worst = 0.0
        bad = []
        for m in range(1, max_m + 1):
            expect = form(m, lambdas)
            got = [f_recursive(Address(Word([letter] * m), j), lambdas) for j in range(1, 5)]
            err = max(abs(a - b) for a, b in zip(expect, got))
            worst = max(worst, err)
            if err > tol:
                bad.append({"m": m, "closed_form": expect, "recursion": got})
        rep.add(PropertyResult(f"closed_form_{letter}m", not bad, bad, {"max_abs_error": worst}))
    seq5 = [closed_form_5m(m, lambdas) for m in range(1, max_m + 1)]
    mono = all(seq5[k + 1][0] < seq5[k][0] and seq5[k + 1][1] > seq5[k][1] for k in range(len(seq5) - 1))
    bracket = all(s[1] < 0.25 < s[0] for s in seq5)
    rep.add(PropertyResult("closed_form_5m_monotone_bracket", mono and bracket,
                           extremes={"first": seq5[0], "last": seq5[-1]}))
    return rep
