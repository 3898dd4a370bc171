import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from vicsek import decimation as dec
from vicsek.graph import EigenfunctionField, apply_laplacian, build_graph, graph_spectrum, neumann_laplacian


def test_polynomial_examples():
    assert dec.R(Fraction(1, 6)) == Fraction(4, 3)
    assert dec.R(0) == 0
    assert dec.R(Fraction(1, 2)) == 0


@pytest.mark.parametrize("lam", np.linspace(-1, 2, 31))
def test_polynomial_factorizations(lam):
    assert dec.R(lam) == pytest.approx(lam * dec.g2(lam) * dec.h2(lam), abs=1e-12)
    assert dec.R(lam) == pytest.approx(3 * lam * (1 - 2 * lam) * (5 - 6 * lam), abs=1e-12)
    assert 3 * dec.R(lam) - 4 == pytest.approx((6 * lam - 1) * dec.f2(lam), abs=1e-12)


def test_forbidden_set():
    vals = dec.forbidden_values()
    assert dec.g2(vals[1]) == 0
    for v in vals[3:]:
        assert abs(dec.f2(v)) < 1e-14
    assert dec.forbidden_match(Fraction(4, 3)) == "4/3"
    assert dec.forbidden_match(vals[3] + 1e-16) == "(7-sqrt17)/12"
    assert dec.forbidden_match(0.3) is None
    with pytest.raises(dec.ForbiddenEigenvalueError, match="1/2"):
        dec.coefficients(Fraction(1, 2))
    with pytest.raises(dec.ForbiddenEigenvalueError, match="sqrt17"):
        dec.coefficients(vals[4])


def test_coefficient_examples():
    c = dec.coefficients(0)
    assert (c.a, c.b, c.c, c.d, c.gamma) == (9, 6, 1, 2, Fraction(1, 12))
    assert c.alpha + 3 * c.chi == 1 and c.beta + 3 * c.delta == 1
    assert dec.coefficients(Fraction(1, 6)).gamma == Fraction(1, 2)
    for lam in np.linspace(0.001, 0.4, 20):
        c = dec.coefficients(lam)
        assert c.gamma == c.chi
        assert c.beta - c.delta == pytest.approx(1 / (3 - 6 * lam), rel=1e-13)


@pytest.mark.parametrize("lam", [1 / 6] + [float(x) for x in dec.lambda_sequence(8).lambdas[2:]])
def test_identity_suite_at_used_lambdas(lam):
    c = dec.coefficients(lam)
    R = dec.R(lam)
    assert c.alpha + 3 * c.chi - 1 == pytest.approx(3 * R * c.chi, rel=1e-12, abs=1e-15)
    assert c.beta + 3 * c.delta - 1 == pytest.approx(-18 * (lam - 1) * R * c.chi / (5 - 6 * lam), rel=1e-12, abs=1e-15)


def test_branch_examples():
    assert dec.branch_inverse(1, 4 / 3) == pytest.approx(1 / 6, abs=1e-14)
    assert dec.branch_inverse(1, 0.0) == 0.0
    with pytest.raises(ValueError):
        dec.branch_inverse(1, 2.0)
    with pytest.raises(ValueError):
        dec.branch_inverse(4, 0.5)


def _valid_y(branch):
    lo, hi = dec.branch_range(branch)
    return st.floats(float(lo), float(hi))


@pytest.mark.parametrize("branch", [1, 2, 3])
def test_round_trip_1000(branch):
    lo, hi = dec.branch_range(branch)
    for y in np.random.default_rng(branch).uniform(lo, hi, 1000):
        x = dec.branch_inverse(branch, y)
        a, b = dec.branch_interval(branch)
        assert a <= x <= b
        assert abs(dec.R(x) - y) <= 1e-13


@given(st.data())
def test_branch_monotone_and_ordered(data):
    xs = {}
    for b in (1, 2, 3):
        lo, hi = dec.branch_range(b)
        y1 = data.draw(st.floats(float(lo), float(hi)))
        y2 = data.draw(st.floats(float(lo), float(hi)))
        if y1 > y2:
            y1, y2 = y2, y1
        p1, p2 = dec.branch_inverse(b, y1), dec.branch_inverse(b, y2)
        assert (p1 <= p2) if b != 2 else (p1 >= p2)
        xs[b] = p1
    assert xs[1] <= xs[2] <= xs[3]


def test_round_trip_high():
    for b in (1, 2, 3):
        lo, hi = dec.branch_range(b, "high")
        with mpmath.workdps(80):
            y = lo + (hi - lo) * mpmath.mpf(3) / 7
            x = dec.branch_inverse(b, y, "high")
            assert abs(dec.R(x) - y) < mpmath.mpf(10) ** -40


def test_lambda_sequence():
    seq = dec.lambda_sequence(12)
    assert seq.lambdas[1] == pytest.approx(1 / 6, abs=1e-15)
    assert seq.estimates[1] == pytest.approx(2.5)
    assert all(a > b > 0 for a, b in zip(seq.lambdas, seq.lambdas[1:]))
    for m in range(1, 12):
        assert dec.R(seq.lambdas[m + 1]) == pytest.approx(seq.lambdas[m], rel=1e-13)
    d = seq.deltas
    ratios = [d[m] / d[m + 1] for m in range(2, 10)]
    assert all(13 < r < 16 for r in ratios)
    with pytest.raises(ValueError):
        dec.lambda_sequence(0)


def _lambda2_by_polyroots(levels=40, dps=80):
    # independent route: smallest positive root of R(x) = y at each step
    with mpmath.workdps(dps):
        y = mpmath.mpf(4) / 3
        for m in range(1, levels + 1):
            roots = mpmath.polyroots([36, -48, 15, -y], maxsteps=200, extraprec=200)
            y = min(r.real for r in roots if abs(r.imag) < mpmath.mpf(10) ** (-dps // 2) and r.real > 0)
        return mpmath.mpf(15) ** levels * y


def test_lambda2_high_against_independent_oracle():
    seq = dec.lambda2("high")
    assert seq.converged
    oracle = _lambda2_by_polyroots()
    with mpmath.workdps(80):
        assert abs(seq.limit - oracle) / oracle < mpmath.mpf(10) ** -40


def test_lambda2_double_vs_high():
    lo, hi = dec.lambda2("double"), dec.lambda2("high")
    assert abs(lo.limit - float(hi.limit)) / float(hi.limit) < 1e-13


def test_lambda2_bracketed_by_dense_eigenvalues():
    # 15^m * (smallest nonzero eigenvalue of the level-m Laplacian) increases towards the limit
    lim = dec.lambda2().limit
    prev = 0
    for m in range(1, 5):
        est = 15 ** m * graph_spectrum(m).values[1]
        assert prev < est < lim
        prev = est
    assert lim - prev < 1e-3


def test_extension_column_example():
    # u1(F_1 q_2) = gamma (a - 1) at lambda = 1/6
    g1 = build_graph(1)
    c = dec.coefficients(Fraction(1, 6))
    u = dec.extend_eigenfunction(EigenfunctionField(0, dec.BASIS_V0[:, 0]), 1 / 6)
    v = g1.address_id(dec.Address(dec.Word([1]), 2)) if hasattr(dec, "Address") else None
    from vicsek.words import Address, Word
    v = g1.address_id(Address(Word([1]), 2))
    assert u.values[v] == pytest.approx(float(c.gamma * (c.a - 1)), abs=1e-15)


@pytest.mark.parametrize("m", range(1, 6))
def test_extension_residual(m):
    lambdas = dec.LambdaTable.build(m)
    vals = dec.extend_basis(m, lambdas)
    g = build_graph(m)
    if m <= 3:
        res = neumann_laplacian(g) @ vals - lambdas[m] * vals
    else:
        res = np.stack([apply_laplacian(g, vals[:, j]) for j in range(3)], axis=1) - lambdas[m] * vals
    assert np.abs(res).max() < 1e-10


def test_extension_preserves_coarse_values():
    lambdas = dec.LambdaTable.build(3)
    for m in range(3):
        coarse, fine = build_graph(m), build_graph(m + 1)
        uc, uf = dec.extend_basis(m, lambdas), dec.extend_basis(m + 1, lambdas)
        for v in range(coarse.n_vertices):
            assert np.allclose(uf[fine.vertex_id(coarse.point(v))], uc[v], atol=0)


def test_constant_extends_to_constant():
    u = EigenfunctionField(0, np.ones(4))
    v = dec.extend_eigenfunction(u, 0.0)
    assert np.allclose(v.values, 1.0, atol=1e-15)


@given(st.floats(-3, 3), st.integers(0, 2))
def test_extension_linear(c, m):
    lambdas = dec.LambdaTable.build(m + 1)
    rng = np.random.default_rng(m)
    g = build_graph(m)
    basis = dec.extend_basis(m, lambdas)
    u = EigenfunctionField(m, basis @ rng.normal(size=3))
    w = EigenfunctionField(m, basis @ rng.normal(size=3))
    lhs = dec.extend_eigenfunction(c * u + w, lambdas[m + 1])
    rhs = c * dec.extend_eigenfunction(u, lambdas[m + 1]) + dec.extend_eigenfunction(w, lambdas[m + 1])
    assert np.allclose(lhs.values, rhs.values, atol=1e-12 * (1 + abs(c)))


def test_wrong_eigenvalue_is_caught():
    u = EigenfunctionField(0, dec.BASIS_V0[:, 0])
    with pytest.raises(dec.ExtensionResidualError):
        dec.extend_eigenfunction(u, 0.2)


def test_u1_reflection_antisymmetry():
    # u1 is odd under y -> 1-y (q1<->q4, q2<->q3); f = (3u1 - u2 - u3)/4 + 1/4 is R1-invariant
    g = build_graph(2)
    u = dec.extend_basis(2)
    for v in range(g.n_vertices):
        x, y = g.point(v)
        w = g.vertex_id((x, 1 - y))
        assert u[w, 0] == pytest.approx(-u[v, 0], abs=1e-14)
        r1 = g.vertex_id((1 - y, 1 - x))
        f = lambda row: 0.75 * row[0] - 0.25 * row[1] - 0.25 * row[2]
        assert f(u[r1]) == pytest.approx(f(u[v]), abs=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_finite_spectrum_matches_dense(m):
    predicted = np.sort(np.concatenate([np.full(k, float(v)) for v, k, _ in dec.finite_level_spectrum(m)]))
    dense = np.sort(graph_spectrum(m).values)
    assert len(predicted) == len(dense) == 3 * 5 ** m + 1
    assert np.allclose(predicted, dense, atol=1e-9)


def test_spectrum_word_rules():
    with pytest.raises(ValueError):
        dec.SpectrumWord("0", 0, (2,))
    with pytest.raises(ValueError):
        dec.SpectrumWord("4/3", 0, (3,))
    with pytest.raises(ValueError):
        dec.SpectrumWord("4/3", 0, (4,))
    assert dec.SpectrumWord("0", 0, (1, 3, 2)).multiplicity == 1
    assert dec.SpectrumWord("4/3", 2, ()).multiplicity == 51


def test_enumerate_spectrum_examples():
    table = dec.enumerate_spectrum(6)
    assert table[0][0] == 0 and table[0][1] == 1
    assert table[1][0] == pytest.approx(dec.lambda2().limit, rel=1e-13)
    assert table[1][1] == 3
    k1 = [t for t in table if t[2].series == "4/3" and t[2].birth_level == 1]
    assert k1 and k1[0][1] == 11
    values = [float(t[0]) for t in table]
    assert values == sorted(values)
    with pytest.raises(ValueError):
        dec.enumerate_spectrum(0)


def test_enumerate_spectrum_against_dense():
    # level-4 dense eigenvalues times 15^4 approach the low limits
    table = dec.enumerate_spectrum(4)
    dense = graph_spectrum(4)
    for v, mult, _ in table[1:]:
        est = 15 ** 4 * dense.values
        assert np.min(np.abs(est - float(v))) / float(v) < 1e-2


def test_level_cap_error():
    with pytest.raises(dec.InsufficientLevelCapError):
        dec.limit_value(dec.SpectrumWord("4/3", 0, ()), level_cap=3)
