"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed at the end."""

import json
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from vicsek import cli, identities
from vicsek import decimation as dec
from vicsek import hotspots as hs
from vicsek.graph import apply_laplacian, build_graph, graph_spectrum, neumann_laplacian
from vicsek.verify import DEFAULT_SEED
from vicsek.words import Address, Word

PRINTED_LAMBDA2 = "2.601813889315113780749839"


def _leading_digits(s, n):
    digits = s.replace(".", "")
    return digits[:n]


def _lambda2_cli(capsys, precision):
    t0 = time.perf_counter()
    code = cli.main(["lambda2", "--precision", precision, "--format", "json"])
    elapsed = time.perf_counter() - t0
    out = json.loads(capsys.readouterr().out)
    return code, out["estimate"], elapsed


def test_c01_lambda2_reproduction(capsys, criterion):
    code_hi, est_hi, t_hi = _lambda2_cli(capsys, "high")
    code_lo, est_lo, t_lo = _lambda2_cli(capsys, "double")
    printed = _leading_digits(PRINTED_LAMBDA2, 25)
    got = _leading_digits(est_hi, 25)
    matched = next((k for k in range(25) if printed[k] != got[k]), 25)
    rel_double = abs(float(est_lo) - float(PRINTED_LAMBDA2)) / float(PRINTED_LAMBDA2)
    ok = code_hi == 0 and code_lo == 0 and got == printed and rel_double <= 1e-12 and max(t_hi, t_lo) < 1.0
    criterion(1, ok, f"high {est_hi[:28]} matches {matched}/25 printed digits; "
                     f"double relative gap {rel_double:.2e}; runtime {max(t_hi, t_lo):.3f}s")


def test_c02_decimation_exactness(criterion):
    lam1 = dec.branch_inverse(1, 4 / 3)
    exact = dec.R(Fraction(1, 6))
    ok = abs(lam1 - 1 / 6) <= 1e-14 and exact == Fraction(4, 3)
    criterion(2, ok, f"|phi1(4/3) - 1/6| = {abs(lam1 - 1 / 6):.1e}; R(1/6) = {exact}")


def test_c03_eigen_equation(criterion):
    t0 = time.perf_counter()
    lambdas = dec.LambdaTable.build(5)
    worst = {}
    for m in range(1, 6):
        g = build_graph(m)
        u = dec.extend_basis(m, lambdas)
        if m <= 3:
            res = neumann_laplacian(g) @ u - lambdas[m] * u
        else:
            res = np.stack([apply_laplacian(g, u[:, j]) for j in range(3)], axis=1) - lambdas[m] * u
        worst[m] = float(np.abs(res).max())
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-10 and elapsed < 30
    criterion(3, ok, f"max residual {max(worst.values()):.1e} over m=1..5; runtime {elapsed:.2f}s")


def test_c04_spectral_oracle(criterion):
    s0 = graph_spectrum(0)
    s1 = graph_spectrum(1)
    err0 = float(np.max(np.abs(np.sort(s0.values) - [0, 4 / 3, 4 / 3, 4 / 3])))
    mult = s1.multiplicity(1 / 6, 1e-8)
    ok = err0 <= 1e-12 and mult >= 3
    criterion(4, ok, f"level-0 spectrum error {err0:.1e}; multiplicity of 1/6 at level 1 = {mult}")


def test_c05_partition_of_unity(criterion):
    t0 = time.perf_counter()
    rep = hs.partition_check(8)
    elapsed = time.perf_counter() - t0
    by = {r.name: r for r in rep.results}
    ok = rep.passed and elapsed < 60
    criterion(5, ok, f"max |f+g+h+k-1| = {by['partition_of_unity'].extremes['max_abs_error']:.1e}; "
                     f"range [{by['bounds_0_1'].extremes['min']:.1e}, {by['bounds_0_1'].extremes['max']:.6f}]; "
                     f"runtime {elapsed:.2f}s")


def test_c06_closed_forms(criterion):
    rep = hs.closed_form_check(12)
    exact = [Fraction(4, 3), Fraction(1, 6)]
    f13 = hs.f_exact(Address(Word([1]), 3), exact)
    f24 = hs.f_exact(Address(Word([2]), 4), exact)
    ok = rep.passed and f13 == Fraction(5, 8) and f24 == Fraction(1, 8)
    worst = max(r.extremes.get("max_abs_error", 0) for r in rep.results)
    criterion(6, ok, f"closed forms vs recursion max error {worst:.1e}; f(1,3) = {f13}, f(2,4) = {f24}")


def test_c07_hotspots(criterion):
    rep = hs.random_hotspots(100, 6, DEFAULT_SEED)
    ok = rep.passed and len(rep.results) == 100
    criterion(7, ok, f"{sum(r.passed for r in rep.results)}/100 random combinations at level 6 "
                     f"(seed {DEFAULT_SEED:#x})")


def test_c08_symmetries(criterion):
    rep = hs.symmetry_check(6)
    worst = max(r.extremes.get("max_abs_error", 0) for r in rep.results)
    criterion(8, rep.passed, f"{len(rep.results)} identities to depth 6, max error {worst:.1e}")


def test_c09_identities(criterion):
    exact = {c.name: identities.exact_residual(c).is_zero for c in identities.EQUALITIES}
    core_ok = all(exact[n] for n in identities.CORE_EQUALITIES)
    ineq = identities.check_inequalities(10_000)
    rng = next(r for r in ineq.results if r.name == "chi_quadratic_range").extremes
    ok = core_ok and ineq.passed
    criterion(9, ok, f"{sum(exact[n] for n in identities.CORE_EQUALITIES)}/7 exact identities; "
                     f"{sum(r.passed for r in ineq.results)}/{len(ineq.results)} inequality checks; "
                     f"chi-quadratic range [{rng['min']:.4f}, {rng['max']:.4f}]")


def test_c10_structure(criterion):
    bad = []
    for m in range(7):
        g = build_graph(m)
        if g.n_vertices != 3 * 5 ** m + 1 or set(np.unique(g.degrees)) - {3, 6} or g.degrees.sum() != 12 * 5 ** m:
            bad.append(m)
    criterion(10, not bad, f"levels 0..6 checked; failures at {bad}")
