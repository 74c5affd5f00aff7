"""Iterated integrals, transports, exponential iterated integrals.

Every exact evaluator is checked against at least one independent
route: hand formulas, simplex quadrature, an ODE integration, or the
truncated series with its certified tail bound.
"""

from math import factorial

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from solvhull import (
    IntegralWord,
    exp_iterated_integral,
    exp_iterated_integral_series,
    iterated_integral,
    iterated_integral_quadrature,
    path_from_pairs,
    shuffle_identity_residual,
    shuffle_words,
    transport,
    transport_series,
)
from solvhull.matfuncs import expm_upper_bidiagonal, phi1_apply, phi_difference


def random_path(rng, dim, segments, scale=1.0):
    pairs = []
    for _ in range(segments):
        pairs.append((scale * rng.standard_normal(dim), float(rng.uniform(0.1, 1.0))))
    return path_from_pairs(pairs)


# ------------------------------------------------------------- hand values


def test_single_letter_is_plain_line_integral():
    f = np.array([2.0, -1.0])
    path = path_from_pairs([((1.0, 3.0), 0.5), ((0.0, 1.0), 2.0)])
    # f pulled back is constant on each segment
    expected = (2.0 - 3.0) * 0.5 + (-1.0) * 2.0
    assert iterated_integral([f], path) == pytest.approx(expected)


def test_empty_word_integrates_to_one():
    path = path_from_pairs([((1.0,), 1.0)])
    assert iterated_integral([], path) == pytest.approx(1.0)


def test_two_letters_single_segment():
    f = np.array([1.0, 0.0])
    g = np.array([0.0, 1.0])
    v = (2.0, 3.0)
    t = 0.7
    path = path_from_pairs([(v, t)])
    expected = 2.0 * 3.0 * t * t / 2.0
    assert iterated_integral([f, g], path) == pytest.approx(expected)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_repeated_letter_gives_power_over_factorial(k):
    f = np.array([1.5])
    path = path_from_pairs([((2.0,), 0.9)])
    a = 1.5 * 2.0 * 0.9
    assert iterated_integral([f] * k, path) == pytest.approx(a**k / factorial(k))


def test_two_letters_across_two_segments_by_splitting():
    f = np.array([1.0, 0.0])
    g = np.array([0.0, 1.0])
    s1, t1 = (1.0, 2.0), 0.5
    s2, t2 = (3.0, -1.0), 1.2

    def single(h, v, t):
        return float(np.dot(h, v)) * t

    def double(v, t):
        return float(np.dot(f, v)) * float(np.dot(g, v)) * t * t / 2.0

    expected = (
        double(s1, t1) + single(f, s1, t1) * single(g, s2, t2) + double(s2, t2)
    )
    path = path_from_pairs([(s1, t1), (s2, t2)])
    assert iterated_integral([f, g], path) == pytest.approx(expected)


def test_integral_is_additive_under_subdivision():
    rng = np.random.default_rng(0)
    f = rng.standard_normal(3)
    g = rng.standard_normal(3)
    path = random_path(rng, 3, 2)
    coarse = iterated_integral([f, g], path)
    fine = iterated_integral([f, g], path.subdivide(7))
    assert coarse == pytest.approx(fine, abs=1e-12)


# ------------------------------------------------------------- quadrature


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_quadrature_converges_to_exact(depth):
    rng = np.random.default_rng(depth)
    word = [rng.standard_normal(2) for _ in range(depth)]
    path = random_path(rng, 2, 3)
    exact = iterated_integral(word, path)
    approx = iterated_integral_quadrature(word, path, points=10000)
    assert abs(exact - approx) < 1e-3 * max(1.0, abs(exact))


def test_quadrature_error_shrinks_linearly():
    rng = np.random.default_rng(5)
    word = [rng.standard_normal(2) for _ in range(2)]
    path = random_path(rng, 2, 2)
    exact = iterated_integral(word, path)
    e1 = abs(exact - iterated_integral_quadrature(word, path, points=500))
    e2 = abs(exact - iterated_integral_quadrature(word, path, points=5000))
    assert e2 < e1 / 3.0


# ------------------------------------------------------------- shuffles


def test_shuffle_words_counts():
    assert shuffle_words((0,), (1,)) == {(0, 1): 1, (1, 0): 1}
    assert shuffle_words((), (0, 1)) == {(0, 1): 1}
    out = shuffle_words((0, 1), (2,))
    assert out == {(0, 1, 2): 1, (0, 2, 1): 1, (2, 0, 1): 1}


def test_shuffle_words_total_count_is_binomial():
    out = shuffle_words((0, 1, 2), (3, 4))
    assert sum(out.values()) == 10  # C(5, 2)


def test_shuffle_words_repeated_letters_accumulate():
    out = shuffle_words((0,), (0,))
    assert out == {(0, 0): 2}


@pytest.mark.parametrize("seed", range(8))
def test_shuffle_identity_on_random_words(seed):
    rng = np.random.default_rng(200 + seed)
    functionals = [rng.standard_normal(3) for _ in range(4)]
    la = int(rng.integers(1, 3))
    lb = int(rng.integers(1, 3))
    wa = tuple(int(rng.integers(0, 4)) for _ in range(la))
    wb = tuple(int(rng.integers(0, 4)) for _ in range(lb))
    path = random_path(rng, 3, 3)
    assert shuffle_identity_residual(functionals, wa, wb, path) < 1e-10


# ------------------------------------------------------------- transport


def test_transport_of_empty_path_is_identity(sol_stages):
    form = sol_stages["form"]
    out = transport(form, path_from_pairs([]))
    assert np.allclose(out, np.eye(form.r))


def test_transport_concatenation_law(sol_stages):
    form = sol_stages["form"]
    rng = np.random.default_rng(1)
    p1 = random_path(rng, 3, 2)
    p2 = random_path(rng, 3, 2)
    lhs = transport(form, p1.concat(p2))
    rhs = transport(form, p1) @ transport(form, p2)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_transport_inverse_path_inverts_matrix(sol_stages):
    form = sol_stages["form"]
    rng = np.random.default_rng(2)
    p = random_path(rng, 3, 3)
    prod = transport(form, p) @ transport(form, p.inverse())
    assert np.max(np.abs(prod - np.eye(form.r))) < 1e-9


def test_transport_against_ode_oracle(sol_stages, sect4_stages):
    """Independent route: integrate Y' = Y psi(v) numerically."""
    for stages in (sol_stages, sect4_stages):
        form = stages["form"]
        dim = form.dim
        rng = np.random.default_rng(3)
        path = random_path(rng, dim, 3, scale=0.8)
        y = np.eye(form.r, dtype=complex)
        for seg in path:
            a = form.psi(seg.vector)

            def rhs(_, flat):
                return (flat.reshape(form.r, form.r) @ a).ravel()

            sol = solve_ivp(
                rhs,
                (0.0, seg.duration),
                y.ravel(),
                rtol=1e-12,
                atol=1e-12,
                method="DOP853",
            )
            y = sol.y[:, -1].reshape(form.r, form.r)
        exact = transport(form, path)
        assert np.max(np.abs(exact - y)) < 1e-7


def test_transport_series_matches_transport_within_tail(sol_stages):
    form = sol_stages["form"]
    rng = np.random.default_rng(4)
    for _ in range(5):
        path = random_path(rng, 3, 3)
        exact = transport(form, path)
        res = transport_series(form, path, depth=20)
        observed = float(np.max(np.abs(res.value - exact)))
        assert observed <= res.tail_bound
        assert observed < 1e-8


def test_transport_series_tail_decreases_with_depth(sol_stages):
    form = sol_stages["form"]
    rng = np.random.default_rng(6)
    path = random_path(rng, 3, 2)
    bounds = [transport_series(form, path, depth=d).tail_bound for d in (5, 10, 15)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_transport_series_reports_growth(sol_stages):
    form = sol_stages["form"]
    path = path_from_pairs([((1.0, 0.0, 0.0), 2.0)])
    res = transport_series(form, path, depth=8)
    expected = float(np.linalg.norm(2.0 * form.psi(np.array([1.0, 0.0, 0.0])), "fro"))
    assert res.growth == pytest.approx(expected)
    assert res.depth == 8


# ----------------------------------------------------- exponential words


def test_integral_word_validation():
    with pytest.raises(ValueError):
        IntegralWord(exponents=([1.0],), factors=([1.0],))


def test_integral_word_segment_matrix():
    word = IntegralWord(
        exponents=((1.0, 0.0), (0.0, 1.0)), factors=((2.0, 0.0),)
    )
    m = word.segment_matrix(np.array([3.0, 5.0]))
    assert m.shape == (2, 2)
    assert m[0, 0] == 3.0
    assert m[1, 1] == 5.0
    assert m[0, 1] == 6.0
    assert m[1, 0] == 0.0


def test_size_one_word_is_pure_exponential():
    word = IntegralWord(exponents=((2.0, -1.0),), factors=())
    path = path_from_pairs([((1.0, 1.0), 0.5), ((0.0, 2.0), 1.5)])
    # integral of the exponent along the path, then exponentiate
    total = (2.0 - 1.0) * 0.5 + (-2.0) * 1.5
    assert exp_iterated_integral(word, path) == pytest.approx(np.exp(total))


def test_size_two_word_single_segment_closed_form():
    a, b, f = 0.8, -0.3, 2.0
    word = IntegralWord(exponents=((a,), (b,)), factors=((f,),))
    t = 1.3
    path = path_from_pairs([((1.0,), t)])
    expected = f * (np.exp(a * t) - np.exp(b * t)) / (a - b)
    assert exp_iterated_integral(word, path) == pytest.approx(expected)


def test_size_two_word_degenerate_exponents():
    a, f, t = 0.6, 1.5, 0.9
    word = IntegralWord(exponents=((a,), (a,)), factors=((f,),))
    path = path_from_pairs([((1.0,), t)])
    # the divided difference collapses to t e^(a t)
    expected = f * t * np.exp(a * t)
    assert exp_iterated_integral(word, path) == pytest.approx(expected)


def test_size_two_word_near_degenerate_is_stable():
    a = 0.6
    b = a + 1e-13
    word = IntegralWord(exponents=((a,), (b,)), factors=((1.0,),))
    path = path_from_pairs([((1.0,), 1.0)])
    exact = exp_iterated_integral(word, path)
    reference = 1.0 * np.exp(a)  # limit value of the divided difference
    assert abs(exact - reference) < 1e-10


def test_zero_exponents_reduce_to_plain_iterated_integral():
    """Cross route: killing the diagonal recovers the Chen integral."""
    rng = np.random.default_rng(7)
    factors = [rng.standard_normal(3) for _ in range(3)]
    zero = np.zeros(3)
    word = IntegralWord(
        exponents=(zero, zero, zero, zero), factors=tuple(factors)
    )
    path = random_path(rng, 3, 3)
    lhs = exp_iterated_integral(word, path)
    rhs = iterated_integral(factors, path)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_exp_integral_series_converges_to_closed_form(size):
    rng = np.random.default_rng(30 + size)
    exponents = tuple(0.5 * rng.standard_normal(2) for _ in range(size))
    factors = tuple(rng.standard_normal(2) for _ in range(size - 1))
    word = IntegralWord(exponents=exponents, factors=factors)
    path = random_path(rng, 2, 2, scale=0.7)
    exact = exp_iterated_integral(word, path)
    res = exp_iterated_integral_series(word, path, depth=25)
    assert abs(res.value - exact) <= res.tail_bound
    assert abs(res.value - exact) < 1e-8


def test_exp_integral_series_tail_bound_observed():
    rng = np.random.default_rng(50)
    word = IntegralWord(
        exponents=(rng.standard_normal(2), rng.standard_normal(2)),
        factors=(rng.standard_normal(2),),
    )
    path = random_path(rng, 2, 2, scale=0.5)
    exact = exp_iterated_integral(word, path)
    for depth in (3, 6, 10, 16):
        res = exp_iterated_integral_series(word, path, depth=depth)
        assert abs(res.value - exact) <= res.tail_bound


def test_exp_integral_multiplicative_over_concat_for_size_one():
    word = IntegralWord(exponents=((1.0, 2.0),), factors=())
    p1 = path_from_pairs([((0.3, 0.1), 1.0)])
    p2 = path_from_pairs([((0.2, -0.4), 0.5)])
    lhs = exp_iterated_integral(word, p1.concat(p2))
    rhs = exp_iterated_integral(word, p1) * exp_iterated_integral(word, p2)
    assert lhs == pytest.approx(rhs)


# ------------------------------------------------------------- matfuncs


def test_phi_difference_far_and_near():
    assert phi_difference(1.0, 0.0) == pytest.approx(np.e - 1.0)
    # series branch agrees with the direct quotient at moderate gap
    direct = (np.exp(0.5) - np.exp(0.5 - 1e-5)) / 1e-5
    assert phi_difference(0.5, 0.5 - 1e-5) == pytest.approx(direct, rel=1e-9)
    assert phi_difference(0.7, 0.7) == pytest.approx(np.exp(0.7))


def test_expm_upper_bidiagonal_matches_dense():
    import scipy.linalg

    rng = np.random.default_rng(8)
    for n in (1, 2, 3):
        diag = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        sup = rng.standard_normal(n - 1)
        m = np.diag(diag) + np.diag(sup, 1) if n > 1 else np.diag(diag)
        out = expm_upper_bidiagonal(diag, sup)
        assert np.max(np.abs(out - scipy.linalg.expm(m))) < 1e-12


def test_phi1_apply_matches_quadrature():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((3, 3))
    z = rng.standard_normal(3)
    out = phi1_apply(m, z)
    s = np.linspace(0.0, 1.0, 20001)
    import scipy.linalg

    vals = np.stack([scipy.linalg.expm(si * m) @ z for si in s[::200]], axis=0)
    crude = np.trapezoid(vals, dx=0.01, axis=0) if hasattr(np, "trapezoid") else np.trapz(vals, dx=0.01, axis=0)
    assert np.max(np.abs(out - crude)) < 1e-3


def test_phi1_apply_singular_matrix():
    # m = 0 integrates to z itself
    z = np.array([1.0, -2.0])
    assert np.allclose(phi1_apply(np.zeros((2, 2)), z), z)
