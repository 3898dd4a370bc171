"""Property suites run by ``vicsek verify``."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from . import decimation as dec
from . import hotspots, identities
from .graph import (EigenfunctionField, apply_laplacian, build_graph, dense_level_cap,
                    graph_spectrum, neumann_laplacian)
from .reports import PropertyResult, Report

SUITES = ("hotspots", "identities", "symmetry", "decimation")
DEFAULT_SEED = 0x5C2
RESIDUAL_TOL = 1e-10


def _lambda1_checks(rep: Report):
    lam1 = dec.branch_inverse(1, 4 / 3)
    rep.add(PropertyResult("lambda1_is_one_sixth", abs(lam1 - 1 / 6) <= 1e-14,
                           extremes={"lambda1": lam1, "error": abs(lam1 - 1 / 6)}))
    exact = dec.R(Fraction(1, 6))
    rep.add(PropertyResult("R_one_sixth_exact", exact == Fraction(4, 3), extremes={"R(1/6)": str(exact)}))


def _residual_checks(rep: Report, levels: int):
    lambdas = dec.LambdaTable.build(max(levels, 1))
    dense_upto = min(3, dense_level_cap())
    u = EigenfunctionField(0, dec.BASIS_V0.copy())
    worst = {}
    witnesses = []
    for m in range(1, levels + 1):
        try:
            u = dec.extend_eigenfunction(u, lambdas[m], check=False)
        except dec.ExtensionResidualError as exc:
            witnesses.append({"level": m, "error": str(exc)})
            break
        g = build_graph(m)
        lam = float(lambdas[m])
        if m <= dense_upto:
            res = np.abs(neumann_laplacian(g) @ u.values - lam * u.values)
        else:
            res = np.abs(np.stack([apply_laplacian(g, u.values[:, j]) for j in range(3)], axis=1)
                         - lam * u.values)
        worst[m] = float(res.max())
        if worst[m] >= RESIDUAL_TOL:
            v, j = np.unravel_index(int(res.argmax()), res.shape)
            witnesses.append({"level": m, "vertex": int(v), "basis": f"u{j + 1}", "residual": worst[m]})
    rep.add(PropertyResult("eigen_equation_residual", not witnesses, witnesses,
                           {"max_residual_by_level": worst}, f"dense for m <= {dense_upto}, matrix-free above"))


def _spectrum_checks(rep: Report):
    s0 = graph_spectrum(0)
    expect0 = np.array([0.0, 4 / 3, 4 / 3, 4 / 3])
    err0 = float(np.max(np.abs(np.sort(s0.values) - expect0)))
    rep.add(PropertyResult("level0_spectrum", err0 <= 1e-12, extremes={"values": s0.values, "error": err0}))
    s1 = graph_spectrum(1)
    mult = s1.multiplicity(1 / 6, 1e-8)
    rep.add(PropertyResult("level1_one_sixth_multiplicity", mult >= 3, extremes={"multiplicity": mult}))

    for m in range(1, min(3, dense_level_cap()) + 1):
        predicted = np.sort(np.concatenate(
            [np.full(mult, float(v)) for v, mult, _ in dec.finite_level_spectrum(m)]))
        dense = np.sort(graph_spectrum(m).values)
        ok = len(predicted) == len(dense)
        err = float(np.max(np.abs(predicted - dense))) if ok else float("inf")
        rep.add(PropertyResult(f"decimation_spectrum_level{m}", ok and err < 1e-8,
                               extremes={"count_predicted": len(predicted), "count_dense": len(dense),
                                         "max_abs_error": err}))


def _lambda2_checks(rep: Report):
    lo = dec.lambda2("double")
    hi = dec.lambda2("high")
    rel = abs(float(lo.limit) - float(hi.limit)) / float(hi.limit)
    rep.add(PropertyResult("lambda2_double_matches_high", rel <= 1e-12,
                           extremes={"double": float(lo.limit), "high": mpmath.nstr(hi.limit, dec.HIGH_DPS), "relative_difference": rel,
                                     "levels_double": len(lo.lambdas) - 1}))


def decimation_report(levels: int = 5) -> Report:
    rep = Report("decimation", {"levels": levels})
    _lambda1_checks(rep)
    _residual_checks(rep, levels)
    _spectrum_checks(rep)
    _lambda2_checks(rep)
    return rep


def hotspots_report(depth: int = 8, level: int = 6, trials: int = 100, seed: int = DEFAULT_SEED) -> Report:
    rep = Report("hotspots", {"depth": depth, "level": level, "trials": trials}, seed)
    lambdas = dec.LambdaTable.build(max(depth, level, 12) + 1)
    basis = hotspots.ExtendedBasis(depth, lambdas)
    rep.extend(hotspots.partition_check(depth, basis))
    rep.extend(hotspots.equivalence_check(depth, lambdas))
    rep.extend(hotspots.sweep_bounds(depth, lambdas=lambdas))
    rep.extend(hotspots.closed_form_check(12, lambdas))
    rep.extend(hotspots.three_equal_corners_check(min(depth, 4), lambdas))
    rep.extend(hotspots.random_hotspots(trials, level, seed))
    return rep


def run_suite(name: str, depth: int = 8, levels: int = 6, trials: int = 100,
              grid: int = 10_000, seed: int = DEFAULT_SEED) -> Report:
    if name == "all":
        rep = Report("all", {"depth": depth, "levels": levels, "trials": trials, "grid": grid}, seed)
        for s in SUITES:
            rep.extend(run_suite(s, depth, levels, trials, grid, seed))
        return rep
    if name == "hotspots":
        return hotspots_report(depth, levels, trials, seed)
    if name == "identities":
        return identities.identities_report(grid)
    if name == "symmetry":
        return hotspots.symmetry_check(depth)
    if name == "decimation":
        return decimation_report(levels)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")


def clear_caches():
    """Drop memoized coefficient tables (used after patching the coefficients)."""
    dec._coef_memo.clear()
    hotspots._letter_maps.cache_clear()
    hotspots.extended_basis.cache_clear()
