"""Spectral decimation for the Neumann Laplacian on VS_2.

Covers the decimation polynomial R and its branch inverses, the lambda_m
sequence and its renormalized limit, the extension coefficients, level-to-level
eigenfunction extension and the decimation description of the spectrum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from .graph import EigenfunctionField, LevelGraph, build_graph
from .words import IDENTIFICATIONS

RENORMALIZATION = 15
HIGH_DPS = 64
MAX_LEVELS = 64
SURD_BALL = 1e-14


class ForbiddenEigenvalueError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class InsufficientLevelCapError(ConvergenceError):
    pass


class ExtensionResidualError(RuntimeError):
    pass


# -- polynomials -------------------------------------------------------------

def f2(lam):
    return 18 * lam * lam - 21 * lam + 4


def g2(lam):
    return 6 * lam - 3


def h2(lam):
    return 6 * lam - 5


def R(lam):
    """Decimation map R(x) = 36x^3 - 48x^2 + 15x (Horner form)."""
    return ((36 * lam - 48) * lam + 15) * lam


def R_prime(lam):
    return (108 * lam - 96) * lam + 15


def cubic(lam):
    """4 - 29x + 60x^2 - 36x^3, the denominator of gamma (up to the factor 3)."""
    return ((-36 * lam + 60) * lam - 29) * lam + 4


def _rounding_scale(lam):
    a = abs(lam)
    return ((36 * a + 48) * a + 15) * a


def forbidden_values(precision: str = "double"):
    """The five forbidden eigenvalues 0, 1/2, 4/3, (7 -+ sqrt 17)/12."""
    if precision == "high":
        with mpmath.workdps(HIGH_DPS):
            s = mpmath.sqrt(17)
            return [mpmath.mpf(0), mpmath.mpf(1) / 2, mpmath.mpf(4) / 3, (7 - s) / 12, (7 + s) / 12]
    s = math.sqrt(17)
    return [0.0, 0.5, 4 / 3, (7 - s) / 12, (7 + s) / 12]


def forbidden_match(lam) -> Optional[str]:
    """Name of the forbidden value ``lam`` hits, or None.

    Rational members are compared exactly; the two surds within a 1e-14 ball.
    """
    exact = {Fraction(0): "0", Fraction(1, 2): "1/2", Fraction(4, 3): "4/3"}
    if isinstance(lam, (int, Fraction)):
        hit = exact.get(Fraction(lam))
        if hit:
            return hit
        # a rational is never a root of the irreducible f2
        return None
    try:
        x = float(lam)
    except TypeError:
        # symbolic input (used by the exact identity checks)
        return None
    for v, name in ((0.0, "0"), (0.5, "1/2"), (4 / 3, "4/3")):
        if x == v:
            return name
    s = math.sqrt(17)
    for v, name in (((7 - s) / 12, "(7-sqrt17)/12"), ((7 + s) / 12, "(7+sqrt17)/12")):
        if abs(x - v) < SURD_BALL:
            return name
    return None


# -- extension coefficients --------------------------------------------------

@dataclass(frozen=True)
class ExtensionCoefficients:
    lam: object
    a: object
    b: object
    c: object
    d: object
    gamma: object

    @property
    def alpha(self):
        return self.gamma * self.a

    @property
    def beta(self):
        return self.gamma * self.b

    @property
    def chi(self):
        return self.gamma * self.c

    @property
    def delta(self):
        return self.gamma * self.d


def coefficients(lam) -> ExtensionCoefficients:
    """Entries of the local extension matrix at ``lam``.

    Works for float, Fraction and mpmath numbers; raises on forbidden values
    where the matrix is singular (gamma has a pole at 1/2 and the roots of f2).
    """
    if isinstance(lam, int):
        lam = Fraction(lam)
    hit = forbidden_match(lam)
    if hit in ("1/2", "(7-sqrt17)/12", "(7+sqrt17)/12"):
        raise ForbiddenEigenvalueError(f"lambda={lam} is the forbidden eigenvalue {hit}")
    den = 3 * cubic(lam)
    if den == 0:
        raise ForbiddenEigenvalueError(f"lambda={lam} is a root of 4-29x+60x^2-36x^3")
    one = lam ** 0
    a = 9 - 42 * lam + 36 * lam * lam
    b = 6 * (1 - 4 * lam + 3 * lam * lam)
    d = 2 - 3 * lam
    return ExtensionCoefficients(lam, a, b, one, d, one / den)


# columns of the 12-column extension matrix: vertex F_i(q_j), j != i ascending
COLUMN_VERTICES = [(i, j) for i in (1, 2, 3, 4) for j in (1, 2, 3, 4) if j != i]
MATRIX_ROWS = (
    "a b a c c d d c c c d c",
    "c d c a a b d c c c d c",
    "c d c c c d b a a c d c",
    "c d c c c d d c c a b a",
)


def extension_matrix(coef: ExtensionCoefficients) -> np.ndarray:
    """The 12x4 matrix mapping corner values of a cell to its 12 new vertices."""
    vals = {"a": coef.a, "b": coef.b, "c": coef.c, "d": coef.d}
    M = np.array([[float(vals[s]) for s in row.split()] for row in MATRIX_ROWS])
    return float(coef.gamma) * M.T


def child_weights(coef: ExtensionCoefficients) -> np.ndarray:
    """Weights W[i, j, :] with u(F_w F_i q_j) = W[i, j] . u(F_w q_1..q_4).

    Child cells i = 0..4 (F_1..F_5), corners j = 0..3. Corner i of child i is
    the parent corner itself; F_5 corners reuse the columns of the vertices
    they coincide with.
    """
    M = extension_matrix(coef)
    col = {v: k for k, v in enumerate(COLUMN_VERTICES)}
    W = np.zeros((5, 4, 4))
    for i in range(1, 6):
        for j in range(1, 5):
            if i == j:
                W[i - 1, j - 1, j - 1] = 1.0
                continue
            key = IDENTIFICATIONS[j] if i == 5 else (i, j)
            W[i - 1, j - 1] = M[col[key]]
    return W


def extend_cells(U: np.ndarray, lam_next) -> np.ndarray:
    """Extend corner values per cell, shape (5**m, 4, ...) -> (5**(m+1), 4, ...)."""
    W = child_weights(coefficients(lam_next))
    out = np.einsum("ijk,nk...->nij...", W, U)
    return out.reshape((U.shape[0] * 5, 4) + U.shape[2:])


def cell_values(g: LevelGraph, u: EigenfunctionField) -> np.ndarray:
    return u.values[g.cells]


def scatter_cells(g: LevelGraph, U: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vertex values from per-cell corner values, checking shared vertices agree."""
    ids = g.cells.ravel()
    vals = U.reshape((-1,) + U.shape[2:])
    out = np.zeros((g.n_vertices,) + U.shape[2:])
    out[ids] = vals
    spread = np.max(np.abs(out[ids] - vals)) if len(ids) else 0.0
    if spread > tol * max(1.0, float(np.max(np.abs(vals)))):
        raise ExtensionResidualError(f"shared vertices disagree by {spread:.3e}")
    return out


def extend_eigenfunction(u: EigenfunctionField, lam_next, check: bool = True,
                         lam_current=None, tol: float = 1e-10) -> EigenfunctionField:
    """Extend a level-m eigenfunction to level m+1 with eigenvalue ``lam_next``.

    With ``check`` the level-(m+1) eigen-equation residual is verified, which
    catches a wrong column-to-vertex convention.
    """
    g0 = build_graph(u.level)
    g1 = build_graph(u.level + 1)
    U1 = extend_cells(cell_values(g0, u), lam_next)
    v = EigenfunctionField(u.level + 1, scatter_cells(g1, U1))
    if check:
        res = eigen_residual(g1, v.values, lam_next)
        scale = max(1.0, float(np.max(np.abs(v.values))))
        if res > tol * scale:
            raise ExtensionResidualError(f"eigen-equation residual {res:.3e} after extension")
    return v


def eigen_residual(g: LevelGraph, values, lam) -> float:
    from .graph import apply_laplacian
    return float(np.max(np.abs(apply_laplacian(g, values) - float(lam) * np.asarray(values))))


# -- branch inverses ---------------------------------------------------------

class _Ctx:
    def __init__(self, precision):
        if precision not in ("double", "high"):
            raise ValueError(f"unknown precision mode {precision!r}")
        self.precision = precision
        if precision == "high":
            self.dps = HIGH_DPS
            self.num = mpmath.mpf
            self.sqrt = mpmath.sqrt
            self.eps = mpmath.mpf(10) ** (-HIGH_DPS)
            self.tiny = 0
        else:
            self.num = float
            self.sqrt = math.sqrt
            self.eps = np.finfo(float).eps
            # below the smallest normal double relative accuracy is lost
            self.tiny = np.finfo(float).tiny

    def __enter__(self):
        if self.precision == "high":
            self._wd = mpmath.workdps(HIGH_DPS + 10)
            self._wd.__enter__()
        return self

    def __exit__(self, *exc):
        if self.precision == "high":
            self._wd.__exit__(*exc)


def critical_points(precision: str = "double"):
    """(8 -+ sqrt 19)/18, where R' vanishes."""
    with _Ctx(precision) as c:
        s = c.sqrt(c.num(19))
        return (8 - s) / 18, (8 + s) / 18


def branch_interval(branch: int, precision: str = "double"):
    c1, c2 = critical_points(precision)
    one = mpmath.mpf(1) if precision == "high" else 1.0
    zero = one * 0
    return {1: (zero, c1), 2: (c1, c2), 3: (c2, one)}[branch]


def branch_range(branch: int, precision: str = "double"):
    lo, hi = branch_interval(branch, precision)
    with _Ctx(precision):
        a, b = R(lo), R(hi)
    return (min(a, b), max(a, b))


def branch_inverse(branch: int, y, precision: str = "double"):
    """Preimage of ``y`` under R on the given monotone branch.

    Bracketed Newton with bisection fallback. Converged when the residual
    reaches the rounding floor of evaluating R, i.e.
    ``|R(x)-y| <= 2 eps max(|y|, |36x^3|+|48x^2|+|15x|)``; this is relative
    for small y, which the renormalized limit 15^m lambda_m needs.
    """
    if branch not in (1, 2, 3):
        raise ValueError(f"branch must be 1, 2 or 3, got {branch}")
    with _Ctx(precision) as ctx:
        y = ctx.num(y) if not isinstance(y, Fraction) else ctx.num(y.numerator) / y.denominator
        lo, hi = branch_interval(branch, precision)
        increasing = branch != 2
        r_lo, r_hi = R(lo), R(hi)
        ymin, ymax = (r_lo, r_hi) if increasing else (r_hi, r_lo)
        slack = 8 * ctx.eps * max(1, abs(y))
        if not (ymin - slack <= y <= ymax + slack):
            raise ValueError(f"y={y} outside the range [{ymin}, {ymax}] of branch {branch}")
        if y == r_lo:
            return lo
        if y == r_hi:
            return hi
        if branch == 1 and abs(y) < ctx.tiny:
            # R(x) = 15x to every representable digit here
            return y / RENORMALIZATION
        x = y / RENORMALIZATION if branch == 1 else (lo + hi) / 2
        if not lo < x < hi:
            x = (lo + hi) / 2
        for _ in range(400):
            r = R(x) - y
            if abs(r) <= max(2 * ctx.eps * max(abs(y), _rounding_scale(x)), ctx.tiny):
                return x
            if (r > 0) == increasing:
                hi = x
            else:
                lo = x
            dr = R_prime(x)
            x_new = x - r / dr if dr != 0 else None
            if x_new is None or not lo < x_new < hi:
                x_new = (lo + hi) / 2
            if hi - lo <= max(2 * ctx.eps * abs(x_new), ctx.tiny):
                return x_new
            x = x_new
    raise ConvergenceError(f"branch {branch} inverse of {y} did not converge")


def phi(word: Sequence[int], x, precision: str = "double"):
    """phi_{w_n} o ... o phi_{w_1}(x): apply the branches in word order."""
    for b in word:
        x = branch_inverse(b, x, precision)
    return x


# -- lambda_m sequence -------------------------------------------------------

@dataclass
class SpectralSequence:
    precision: str
    branch: int
    lambdas: list
    estimates: list = field(default_factory=list)
    converged: bool = False

    @property
    def deltas(self):
        e = self.estimates
        return [None] + [e[k] - e[k - 1] for k in range(1, len(e))]

    @property
    def limit(self):
        return self.estimates[-1]

    def table(self):
        return list(zip(range(len(self.lambdas)), self.lambdas, self.estimates, self.deltas))


def _start(precision):
    if precision == "high":
        with mpmath.workdps(HIGH_DPS + 10):
            return mpmath.mpf(4) / 3
    return 4 / 3


def _renormalize(lam, m, precision):
    if precision == "high":
        with mpmath.workdps(HIGH_DPS + 10):
            return mpmath.mpf(RENORMALIZATION) ** m * lam
    return RENORMALIZATION ** m * lam


def lambda_sequence(M: int, precision: str = "double") -> SpectralSequence:
    """lambda_0 = 4/3 and lambda_m = phi_1(lambda_{m-1}) for m = 1..M."""
    if M < 1:
        raise ValueError("M must be at least 1")
    lam = _start(precision)
    seq = SpectralSequence(precision, 1, [lam], [_renormalize(lam, 0, precision)])
    for m in range(1, M + 1):
        lam = branch_inverse(1, lam, precision)
        seq.lambdas.append(lam)
        seq.estimates.append(_renormalize(lam, m, precision))
    return seq


def lambda2(precision: str = "double", max_levels: int = MAX_LEVELS) -> SpectralSequence:
    """Iterate phi_1 from 4/3 until 15^m lambda_m settles to working precision."""
    with _Ctx(precision) as ctx:
        unit = ctx.eps
    lam = _start(precision)
    seq = SpectralSequence(precision, 1, [lam], [_renormalize(lam, 0, precision)])
    for m in range(1, max_levels + 1):
        lam = branch_inverse(1, lam, precision)
        seq.lambdas.append(lam)
        seq.estimates.append(_renormalize(lam, m, precision))
        if abs(seq.estimates[-1] - seq.estimates[-2]) < 10 * unit * abs(seq.estimates[-1]):
            seq.converged = True
            return seq
    raise ConvergenceError(f"15^m lambda_m not converged after {max_levels} levels")


@dataclass
class LambdaTable:
    """lambda_0..lambda_M with cached extension coefficients (double precision)."""

    lambdas: list

    @classmethod
    def build(cls, M: int):
        return cls(lambda_sequence(max(M, 1), "double").lambdas)

    def __getitem__(self, m):
        return self.lambdas[m]

    def __len__(self):
        return len(self.lambdas)

    def coefficients(self, m) -> ExtensionCoefficients:
        return _coef_cache(self.lambdas[m])


_coef_memo: dict = {}


def _coef_cache(lam):
    c = _coef_memo.get(lam)
    if c is None:
        c = _coef_memo[lam] = coefficients(lam)
    return c


# -- basis extension ---------------------------------------------------------

BASIS_V0 = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -1.0, -1.0]])


def extend_basis_cells(level: int, lambdas: Optional[LambdaTable] = None):
    """Per-level cell corner values of u1, u2, u3: list of arrays (5**m, 4, 3)."""
    lambdas = lambdas or LambdaTable.build(level)
    U = [BASIS_V0[None, :, :].copy()]
    for m in range(level):
        U.append(extend_cells(U[-1], lambdas[m + 1]))
    return U


def extend_basis(level: int, lambdas: Optional[LambdaTable] = None) -> np.ndarray:
    """Vertex values (n_vertices, 3) of u1, u2, u3 on V_level."""
    U = extend_basis_cells(level, lambdas)
    return scatter_cells(build_graph(level), U[-1])


# -- spectrum ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumWord:
    series: str  # "0" or "4/3"
    birth_level: int
    prefix: tuple  # finite prefix; the tail is all 1s

    def __post_init__(self):
        if self.series not in ("0", "4/3"):
            raise ValueError("series must be '0' or '4/3'")
        p = tuple(self.prefix)
        if any(x not in (1, 2, 3) for x in p):
            raise ValueError("letters must be in {1,2,3}")
        if self.series == "0":
            non1 = [x for x in p if x != 1]
            if non1 and non1[0] != 3:
                raise ValueError("0-series: first letter other than 1 must be 3")
            if self.birth_level != 0:
                raise ValueError("0-series words carry no birth level")
        elif p and p[0] != 1:
            raise ValueError("4/3-series: first letter must be 1")

    @property
    def multiplicity(self) -> int:
        return 1 if self.series == "0" else 2 * 5 ** self.birth_level + 1

    def __str__(self):
        w = "".join(map(str, self.prefix)) + "1…"
        return f"{self.series}-series k={self.birth_level} {w}" if self.series == "4/3" else f"0-series {w}"


def finite_level_spectrum(m: int, precision: str = "double"):
    """Eigenvalues of -Delta_m predicted by decimation, with multiplicities.

    Returns sorted (value, multiplicity, SpectrumWord) using length-m words
    (length m-k for 4/3-series values born on level k).
    """
    out = []
    for w in itertools.product((1, 2, 3), repeat=m):
        try:
            sw = SpectrumWord("0", 0, w)
        except ValueError:
            continue
        out.append((phi(w, 0.0 if precision == "double" else mpmath.mpf(0), precision), 1, sw))
    for k in range(m + 1):
        for w in itertools.product((1, 2, 3), repeat=m - k):
            try:
                sw = SpectrumWord("4/3", k, w)
            except ValueError:
                continue
            out.append((phi(w, _start(precision), precision), sw.multiplicity, sw))
    out.sort(key=lambda t: float(t[0]))
    return out


def limit_value(word: SpectrumWord, level_cap: int = MAX_LEVELS, precision: str = "double"):
    """lim 15^(n+k) phi-composite, following the all-1 tail to convergence."""
    with _Ctx(precision) as ctx:
        unit = ctx.eps
        x = ctx.num(0) if word.series == "0" else _start(precision)
    x = phi(word.prefix, x, precision)
    n = len(word.prefix) + word.birth_level
    est = _renormalize(x, n, precision)
    if x == 0:
        return est
    for t in range(level_cap - len(word.prefix)):
        x = branch_inverse(1, x, precision)
        n += 1
        new = _renormalize(x, n, precision)
        if abs(new - est) < 10 * unit * abs(new):
            return new
        est = new
    raise InsufficientLevelCapError(
        f"{word}: renormalized value not converged within level cap {level_cap}")


def enumerate_spectrum(count: int, level_cap: int = MAX_LEVELS, precision: str = "double",
                       rtol: float = 1e-10):
    """The lowest ``count`` distinct Neumann eigenvalues of the fractal Laplacian.

    Each entry is (eigenvalue, multiplicity, SpectrumWord). A word whose last
    non-1 letter sits at position n, born on level k, has value at least
    15^(n+k) (8-sqrt19)/18, which bounds the search.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    c1 = float(critical_points()[0])
    budget = 15.0
    seen = {}
    while True:
        for word in _words_below(budget, c1):
            if word not in seen:
                seen[word] = limit_value(word, level_cap, precision)
        merged = []
        for word, val in sorted(seen.items(), key=lambda kv: (float(kv[1]), str(kv[0]))):
            if merged and abs(float(val) - float(merged[-1][0])) <= rtol * max(1.0, abs(float(val))):
                merged[-1][1] += word.multiplicity
                continue
            merged.append([val, word.multiplicity, word])
        below = [tuple(e) for e in merged if float(e[0]) <= budget]
        if len(below) >= count:
            return below[:count]
        budget *= RENORMALIZATION


def _words_below(budget: float, c1: float):
    yield SpectrumWord("0", 0, ())
    k = 0
    while 2.5 * 15 ** k <= budget:
        yield SpectrumWord("4/3", k, ())
        k += 1
    n = 1
    while 15 ** n * c1 <= budget:
        for w in itertools.product((1, 2, 3), repeat=n):
            if w[-1] == 1:
                continue
            try:
                yield SpectrumWord("0", 0, w)
            except ValueError:
                pass
            k = 0
            while 15 ** (n + k) * c1 <= budget:
                try:
                    yield SpectrumWord("4/3", k, w)
                except ValueError:
                    break
                k += 1
        n += 1
