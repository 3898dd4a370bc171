"""Identities and inequalities satisfied by the extension coefficients.

Equalities are checked twice: exactly, by clearing denominators of sympy
rational functions built from the same code the extension uses, and
numerically on a grid. Inequalities are grid checks with extra points near
the open endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy

from . import decimation as dec
from .reports import MAX_WITNESSES, PropertyResult, Report

GRID_TOL = 1e-12
ENDPOINT_GAP = 1e-8
LAMBDA1 = 1 / 6


@dataclass
class IdentityCase:
    """``left(lam) == right(lam)`` (kind "identity") or ``left(lam) > 0`` ("positive").

    ``domain`` is a closed-open description (lo, hi, include_lo, include_hi).
    """

    name: str
    left: Callable
    right: Callable = None
    kind: str = "identity"
    domain: tuple = (0.0, LAMBDA1, False, True)


def _c(lam):
    return dec.coefficients(lam)


EQUALITIES = [
    IdentityCase("R_factorization", lambda x: dec.R(x), lambda x: 3 * x * (1 - 2 * x) * (5 - 6 * x)),
    IdentityCase("3R_minus_4", lambda x: 3 * dec.R(x) - 4, lambda x: (6 * x - 1) * dec.f2(x)),
    IdentityCase("gamma_equals_chi", lambda x: _c(x).gamma, lambda x: _c(x).chi),
    IdentityCase("gamma_factored", lambda x: _c(x).gamma, lambda x: 1 / (3 * (1 - 2 * x) * dec.f2(x))),
    IdentityCase("one_plus_3alpha_minus_3chi", lambda x: 1 + 3 * _c(x).alpha - 3 * _c(x).chi,
                 lambda x: (2 * x - 3) / (2 * x - 1)),
    IdentityCase("one_plus_3beta_minus_3delta", lambda x: 1 + 3 * _c(x).beta - 3 * _c(x).delta,
                 lambda x: (2 * x - 2) / (2 * x - 1)),
    IdentityCase("one_minus_beta_minus_3delta", lambda x: 1 - _c(x).beta - 3 * _c(x).delta,
                 lambda x: 18 * (x - 1) * dec.R(x) / (3 * (1 - 2 * x) * dec.f2(x) * (5 - 6 * x))),
    IdentityCase("one_minus_alpha_minus_3chi", lambda x: 1 - _c(x).alpha - 3 * _c(x).chi,
                 lambda x: -3 * dec.R(x) / (3 * (1 - 2 * x) * dec.f2(x))),
    IdentityCase("beta_minus_delta", lambda x: _c(x).beta - _c(x).delta, lambda x: 1 / (3 - 6 * x)),
    IdentityCase("alpha_minus_1", lambda x: _c(x).alpha - 1, lambda x: 3 * (dec.R(x) - 1) * _c(x).chi),
]

# the seven equalities required to pass as exact identities
CORE_EQUALITIES = ("R_factorization", "3R_minus_4", "gamma_equals_chi", "one_plus_3alpha_minus_3chi",
                   "one_plus_3beta_minus_3delta", "beta_minus_delta", "alpha_minus_1")


def _chi_quadratic(x):
    return _c(x).chi * (1 - 3.75 * x + 2.25 * x * x)


def inequality_cases(lambda2_value: float):
    """Inequality families; the alpha/beta bounds live on (0, lambda_2)."""
    lo_open = (0.0, lambda2_value, False, False)
    sixth_open = (0.0, LAMBDA1, False, False)
    sixth = (0.0, LAMBDA1, False, True)
    return [
        IdentityCase("alpha_positive", lambda x: _c(x).alpha, kind="positive", domain=lo_open),
        IdentityCase("alpha_below_1", lambda x: 1 - _c(x).alpha, kind="positive", domain=lo_open),
        IdentityCase("beta_positive", lambda x: _c(x).beta, kind="positive", domain=lo_open),
        IdentityCase("beta_below_1", lambda x: 1 - _c(x).beta, kind="positive", domain=lo_open),
        IdentityCase("delta_positive", lambda x: _c(x).delta, kind="positive", domain=sixth_open),
        IdentityCase("delta_below_1", lambda x: 1 - _c(x).delta, kind="positive", domain=sixth_open),
        IdentityCase("one_minus_alpha_minus_3chi_negative", lambda x: _c(x).alpha + 3 * _c(x).chi - 1,
                     kind="positive", domain=sixth),
        IdentityCase("one_minus_beta_minus_3delta_negative", lambda x: _c(x).beta + 3 * _c(x).delta - 1,
                     kind="positive", domain=sixth),
        IdentityCase("beta_above_delta", lambda x: _c(x).beta - _c(x).delta, kind="positive", domain=sixth_open),
        IdentityCase("alpha_above_chi", lambda x: _c(x).alpha - _c(x).chi, kind="positive", domain=sixth_open),
        IdentityCase("chi_quadratic_above_0.08", lambda x: _chi_quadratic(x) - 0.08, kind="positive", domain=sixth),
        IdentityCase("chi_quadratic_below_0.22", lambda x: 0.22 - _chi_quadratic(x), kind="positive", domain=sixth),
    ]


def grid(domain, grid_size: int, gap: float = ENDPOINT_GAP) -> np.ndarray:
    """Uniform grid on the domain plus one-sided points ``gap`` inside each end."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    lo, hi, inc_lo, inc_hi = domain
    pts = np.linspace(lo, hi, grid_size)
    if not inc_lo:
        pts = pts[1:]
    if not inc_hi:
        pts = pts[:-1]
    extra = [lo + gap, hi - gap, lo + 10 * gap, hi - 10 * gap]
    return np.unique(np.concatenate([pts, extra]))


def exact_residual(case: IdentityCase):
    """Numerator of left - right as a sympy polynomial after clearing denominators."""
    x = sympy.Symbol("lam")
    diff = sympy.together(sympy.nsimplify(case.left(x)) - sympy.nsimplify(case.right(x)))
    num, _ = sympy.fraction(sympy.cancel(diff))
    return sympy.Poly(sympy.expand(num), x)


def check_identity(case: IdentityCase, grid_size: int = 10_000, tol: float = GRID_TOL) -> Report:
    rep = Report("identity", {"case": case.name, "grid_size": grid_size, "tol": tol})
    if case.kind == "identity":
        poly = exact_residual(case)
        coeffs = [str(c) for c in poly.all_coeffs()]
        rep.add(PropertyResult(f"{case.name}:exact", poly.is_zero, [] if poly.is_zero else [{"numerator": str(poly.as_expr())}],
                               {"numerator_coefficients": coeffs}))
        pts = grid(case.domain, grid_size)
        res = np.array([float(case.left(x)) - float(case.right(x)) for x in pts])
        scale = np.maximum(1.0, np.abs([float(case.right(x)) for x in pts]))
        bad = np.flatnonzero(np.abs(res) > tol * scale)
        rep.add(PropertyResult(f"{case.name}:grid", len(bad) == 0,
                               [{"lambda": pts[i], "residual": res[i]} for i in bad[:MAX_WITNESSES]],
                               {"max_abs_residual": float(np.max(np.abs(res)))}))
    else:
        pts = grid(case.domain, grid_size)
        vals = np.array([float(case.left(x)) for x in pts])
        bad = np.flatnonzero(vals <= 0)
        rep.add(PropertyResult(case.name, len(bad) == 0,
                               [{"lambda": pts[i], "margin": vals[i]} for i in bad[:MAX_WITNESSES]],
                               {"min_margin": float(vals.min()), "argmin_lambda": float(pts[vals.argmin()]),
                                "domain": list(case.domain[:2])}))
    return rep


def check_equalities(grid_size: int = 10_000) -> Report:
    rep = Report("identities.equalities", {"grid_size": grid_size})
    for case in EQUALITIES:
        rep.extend(check_identity(case, grid_size))
    return rep


def check_inequalities(grid_size: int = 10_000) -> Report:
    lam2 = float(dec.phi([1], LAMBDA1))
    rep = Report("identities.inequalities", {"grid_size": grid_size, "lambda_2": lam2})
    for case in inequality_cases(lam2):
        rep.extend(check_identity(case, grid_size))
    pts = grid((0.0, LAMBDA1, False, True), grid_size)
    q = np.array([_chi_quadratic(x) for x in pts])
    rep.add(PropertyResult("chi_quadratic_range", bool(q.min() > 0.08 and q.max() < 0.22),
                           extremes={"min": float(q.min()), "max": float(q.max())}))
    return rep


def identities_report(grid_size: int = 10_000) -> Report:
    rep = Report("identities", {"grid_size": grid_size})
    rep.extend(check_equalities(grid_size))
    rep.extend(check_inequalities(grid_size))
    return rep
