import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from lemniscate.catalog import (chebyshev_t, get_example, intersecting_arcs_centers,
                                intersecting_arcs_poly, symmetric_three_intervals_centers,
                                symmetric_three_intervals_poly, symmetric_two_intervals_poly,
                                two_intervals_centers, two_intervals_poly)
from lemniscate.centers import (centers_double_symmetry_two, centers_iterative,
                                centers_three_double_symmetry, centers_two_components,
                                classify_symmetry, lemniscatic_data, make_lemniscatic,
                                q_critical_points, q_poly, validate_centers)
from lemniscate.errors import ConvergenceError, ValidationError
from lemniscate.polycore import ComplexPoly, compose_affine, from_roots, roots
from lemniscate.preimage import IntervalSet, analyze

# independent oracle: scipy.optimize.fsolve on the joint system for centers and
# critical points of Q (alpha = 0.05, beta = 0.3), frozen here
EX41_CENTERS = (-0.7751926166589889, -0.1648077484834528, 0.8525003651424417)
EX41_Q_CRITICAL = (-0.5039104530254173, 0.4455771196920839)

EX52_CENTERS = (-0.807906463544657, -0.367217238438923, 0.341284084426686, 0.878324884021925)
EX53_CENTERS = (-0.957893296657925, -0.570567929561560, -0.079252067054220,
                0.464367835203743, 0.951037765762270)


# --- Q and its critical points ---------------------------------------------

def test_q_poly_single_center():
    Q = q_poly(3.0, [0.0], [4])
    np.testing.assert_allclose(Q.coeffs, [0, 0, 0, 0, 6.0])


def test_q_poly_two_intervals_shape():
    pre = analyze(two_intervals_poly(0.1))
    a1, a2 = two_intervals_centers(0.1)
    Q = q_poly(pre.pn, [a1, a2], [2, 1])
    assert Q.leading == pytest.approx(2 * pre.pn)
    for w in (0.3, -1 + 1j, 2j):
        assert Q(w) == pytest.approx(2 * pre.pn * (w - a1) ** 2 * (w - a2), rel=1e-13)


def test_q_level_set_matches_u_level_set():
    lem = lemniscatic_data(analyze(get_example("ex4.1").polynomial()))[0]
    cap = lem.capacity
    m = [float(x) for x in lem.exponents]
    rng = np.random.default_rng(0)
    for w in rng.uniform(-2, 2, 20) + 1j * rng.uniform(-2, 2, 20):
        u = np.prod([abs(w - a) ** mj for a, mj in zip(lem.centers, m)])
        assert abs(lem.Q(w)) == pytest.approx((u / cap) ** lem.n, rel=1e-12)


def test_q_critical_two_components():
    (w1,) = q_critical_points([-0.4, 0.7], [2, 1])
    assert w1 == pytest.approx((1 * -0.4 + 2 * 0.7) / 3)


def test_q_critical_symmetric_three():
    a3 = 0.83
    w = q_critical_points([-a3, 0.0, a3], [1, 1, 1])
    np.testing.assert_allclose(w, [-a3 / math.sqrt(3), a3 / math.sqrt(3)], atol=1e-15)


def test_q_critical_three_general_matches_quadratic():
    a = np.array([-0.9, 0.1, 0.7])
    n1, n2, n3 = 2, 3, 1
    n = n1 + n2 + n3
    s = (n2 + n3) * a[0] + (n1 + n3) * a[1] + (n1 + n2) * a[2]
    disc = s * s - 4 * n * (n3 * a[0] * a[1] + n2 * a[0] * a[2] + n1 * a[1] * a[2])
    want = [(s - math.sqrt(disc)) / (2 * n), (s + math.sqrt(disc)) / (2 * n)]
    np.testing.assert_allclose(q_critical_points(a, [n1, n2, n3]), want, atol=1e-14)


def test_q_critical_general_against_numpy():
    a = np.array([-1.0, -0.4, 0.05, 0.3, 0.9])
    k = np.array([1, 2, 1, 3, 1])
    poly = sum(k[i] * np.poly(np.delete(a, i)) for i in range(len(a)))
    want = np.sort(np.roots(poly).real)
    np.testing.assert_allclose(q_critical_points(a, k), want, atol=1e-12)


def test_q_critical_needs_increasing_centers():
    with pytest.raises(ValidationError):
        q_critical_points([0.0, -1.0, 1.0], [1, 1, 1])


# --- closed forms ----------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.7])
def test_two_components_matches_displayed_formula(alpha):
    lem = centers_two_components(analyze(two_intervals_poly(alpha)))
    np.testing.assert_allclose(lem.centers, two_intervals_centers(alpha), atol=1e-14)


def test_two_components_symmetric_pair():
    lem = centers_two_components(analyze(symmetric_two_intervals_poly(0.2, 2.0)))
    np.testing.assert_allclose(lem.centers, [-1.1, 1.1], atol=1e-14)


def test_two_components_rejects_three():
    with pytest.raises(ValidationError):
        centers_two_components(analyze(get_example("ex4.1").polynomial()))


def test_double_symmetry_symmetric_pair():
    al, be = 0.2, 2.0
    P = symmetric_two_intervals_poly(al, be)
    assert P.coeffs[0].real == pytest.approx(-(be ** 2 + al ** 2) / (be ** 2 - al ** 2))
    lem = centers_double_symmetry_two(analyze(P))
    np.testing.assert_allclose(lem.centers, [-(al + be) / 2, (al + be) / 2], atol=1e-14)


@pytest.mark.parametrize("alpha", [1.01, 1.2, 2.0])
def test_double_symmetry_intersecting_arcs(alpha):
    lem = centers_double_symmetry_two(analyze(intersecting_arcs_poly(alpha)))
    a2 = ((alpha ** 4 + math.sqrt(alpha ** 8 - 1)) / 2) ** 0.25
    assert lem.centers[1] == pytest.approx(a2, rel=1e-14)
    assert lem.centers[0] == -lem.centers[1]


def test_double_symmetry_case_two_is_rotated_case_one():
    al, be = 0.2, 2.0
    P = symmetric_two_intervals_poly(al, be)
    rotated = compose_affine(P, 1j, 0.0)      # z -> P(i z), components on the imaginary axis
    assert centers_double_symmetry_two_case(rotated) == 2
    lem1 = centers_double_symmetry_two(P, case=1)
    lem2 = centers_double_symmetry_two(rotated, case=2)
    assert lem2.centers[1] == pytest.approx(1j * lem1.centers[1], rel=1e-14)
    assert lem2.centers[0] == pytest.approx(-lem2.centers[1])
    assert lem2.q_critical_points[0] == pytest.approx(0.0, abs=1e-15)


def centers_double_symmetry_two_case(P):
    from lemniscate.centers import double_symmetry_case
    return double_symmetry_case(P)


def test_double_symmetry_rejects_p0_in_interval():
    with pytest.raises(ValidationError):
        centers_double_symmetry_two(ComplexPoly([0.5, 0, 1.0]))


def test_double_symmetry_rejects_odd():
    with pytest.raises(ValidationError):
        centers_double_symmetry_two(ComplexPoly([3.0, 1.0, 1.0]))


@pytest.mark.parametrize("alpha", [0.05, 0.2, 0.35, 0.49])
def test_three_double_symmetry(alpha):
    lem = centers_three_double_symmetry(analyze(symmetric_three_intervals_poly(alpha)))
    np.testing.assert_allclose(lem.centers, symmetric_three_intervals_centers(alpha), atol=1e-14)


def test_three_double_symmetry_limits():
    # alpha -> 1/2: a_3 -> sqrt(3) / (2 * 2^(1/3)); alpha -> 0: a_3 -> 1
    assert symmetric_three_intervals_centers(0.5)[2] == pytest.approx(
        math.sqrt(3) / (2 * 2 ** (1 / 3)), rel=1e-14)
    assert math.sqrt(3) / (2 * 2 ** (1 / 3)) == pytest.approx(0.6874, abs=1e-4)
    near_half = centers_three_double_symmetry(analyze(symmetric_three_intervals_poly(0.499))).centers[2]
    assert abs(near_half - 0.6874) < 2e-3
    near_zero = centers_three_double_symmetry(analyze(symmetric_three_intervals_poly(1e-4))).centers[2]
    assert abs(near_zero - 1.0) < 1e-3


def test_three_double_symmetry_rejects_asymmetric():
    with pytest.raises(ValidationError):
        centers_three_double_symmetry(analyze(get_example("ex4.1").polynomial()))


# --- iterative scheme -------------------------------------------------------

def test_iterative_three_intervals():
    pre = analyze(get_example("ex4.1").polynomial())
    lem, trace = centers_iterative(pre)
    np.testing.assert_allclose(lem.centers, EX41_CENTERS, atol=1e-12)
    np.testing.assert_allclose(lem.q_critical_points, EX41_Q_CRITICAL, atol=1e-12)
    assert trace.steps == 4 and trace.converged


def test_iterative_trace_starts_at_midpoints():
    pre = analyze(get_example("ex4.1").polynomial())
    _, trace = centers_iterative(pre)
    b = np.array(pre.components.endpoints)
    np.testing.assert_allclose(trace.centers[0], (b[0::2] + b[1::2]) / 2)
    np.testing.assert_allclose(trace.critical_points[0], (b[1:-1:2] + b[2::2]) / 2)
    assert len(trace.centers) == trace.steps + 2
    for a, w in zip(trace.centers, trace.critical_points):
        assert np.all(a[:-1] < w) and np.all(w < a[1:])


def test_iterative_degree7():
    lem, trace = centers_iterative(analyze(get_example("ex5.2").polynomial()))
    np.testing.assert_allclose(lem.centers, EX52_CENTERS, atol=1e-10)
    assert abs(trace.steps - 5) <= 2


def test_iterative_five_intervals():
    lem, trace = centers_iterative(analyze(get_example("ex5.3").polynomial()))
    np.testing.assert_allclose(lem.centers, EX53_CENTERS, atol=1e-10)
    assert abs(trace.steps - 4) <= 2


def test_iterative_exact_start_takes_zero_steps():
    _, trace = centers_iterative(analyze(symmetric_two_intervals_poly(0.2, 2.0)))
    assert trace.steps == 0


def test_iterative_outer_budget():
    with pytest.raises(ConvergenceError) as info:
        centers_iterative(analyze(get_example("ex5.3").polynomial()), max_outer=1)
    assert info.value.trace is not None and len(info.value.trace.centers) == 2


def test_iterative_needs_two_components():
    with pytest.raises(ValidationError):
        centers_iterative(analyze(ComplexPoly([0, 1])))


def test_iterative_flags_sign_disagreement():
    pre = analyze(get_example("ex4.1").polynomial())
    bad = dataclasses.replace(pre, critical_images=tuple(-h for h in pre.critical_images))
    with pytest.raises(ValidationError):
        centers_iterative(bad)


# --- validation and symmetry -----------------------------------------------------

def test_validate_five_intervals():
    pre = analyze(get_example("ex5.3").polynomial())
    lem, _ = centers_iterative(pre)
    rep = validate_centers(pre, lem)
    assert rep.max_residual <= 1e-10
    assert rep.ok_interlacing


def test_validate_detects_perturbation():
    pre = analyze(get_example("ex5.3").polynomial())
    lem, _ = centers_iterative(pre)
    a = lem.centers.copy()
    a[0] += 1e-3
    rep = validate_centers(pre, make_lemniscatic(pre.pn, a, pre.zero_counts))
    assert rep.critical_residuals[0] >= 1e-4


def test_validate_closed_form_symmetric_pair():
    pre = analyze(symmetric_two_intervals_poly(0.2, 2.0))
    rep = validate_centers(pre, centers_two_components(pre))
    assert rep.max_residual < 1e-14


def test_classify_two():
    s = classify_symmetry(IntervalSet((-2, -0.2, 0.2, 2)))
    assert s.symmetric and s.fixed is None and s.pairs == ((0, 1),)


def test_classify_three():
    s = classify_symmetry(analyze(symmetric_three_intervals_poly(0.2)).components)
    assert s.symmetric and s.fixed == 1 and s.pairs == ((0, 2),)


def test_classify_four():
    s = classify_symmetry([(-3, -2), (-1, -0.5), (0.5, 1), (2, 3)])
    assert s.symmetric and s.fixed is None and s.pairs == ((0, 3), (1, 2))


def test_classify_not_symmetric():
    E = analyze(get_example("ex4.1").polynomial()).components
    assert not classify_symmetry(E).symmetric
    with pytest.raises(ValidationError):
        classify_symmetry(E, require=True)


# --- invariants -------------------------------------------------------------------

@pytest.mark.parametrize("key", ["ex3.1", "ex3.2", "ex3.3", "ex4.1", "ex4.2", "ex5.2", "ex5.3",
                                 "ex5.4-T10"])
def test_exponents_interlacing_centroid(key):
    pre = analyze(get_example(key).polynomial())
    lem, _, _ = lemniscatic_data(pre)
    assert sum(lem.exponents) == Fraction(1)
    a, w = lem.centers, np.array(lem.q_critical_points)
    assert np.all(a[:-1] < w) and np.all(w < a[1:])
    assert np.dot(lem.counts, a) == pytest.approx(pre.centroid_sum.real, abs=1e-12)
    assert np.all(np.abs(lem.q_value(w)) > 1)


@pytest.mark.parametrize("key", ["ex3.2", "ex3.3", "ex4.2", "ex5.4-T10"])
def test_symmetric_sets_have_antisymmetric_centers(key):
    lem, _, _ = lemniscatic_data(analyze(get_example(key).polynomial()), method="iterative")
    np.testing.assert_allclose(lem.centers, -lem.centers[::-1], atol=1e-11)


@pytest.mark.parametrize("s,t", [(2.0, 0.0), (0.5, 0.3), (1.7, -2.0)])
def test_scaling_covariance(s, t):
    P = get_example("ex5.3").polynomial()
    Ps = compose_affine(P, 1 / s, -t / s)          # preimage is s E + t
    a = centers_iterative(analyze(P))[0].centers
    b = centers_iterative(analyze(Ps))[0].centers
    np.testing.assert_allclose(b, s * a + t, atol=1e-10)


def test_dispatch():
    assert lemniscatic_data(analyze(ComplexPoly([0, 1])))[2] == "single"
    assert lemniscatic_data(analyze(two_intervals_poly(0.1)))[2] == "two-components"
    assert lemniscatic_data(analyze(symmetric_two_intervals_poly(0.2, 2)))[2] == "double-symmetry-two"
    assert lemniscatic_data(analyze(symmetric_three_intervals_poly(0.2)))[2] == "three-double-symmetry"
    assert lemniscatic_data(analyze(get_example("ex4.1").polynomial()))[2] == "iterative"
    with pytest.raises(ValidationError):
        lemniscatic_data(analyze(get_example("ex4.1").polynomial()), method="closed-form")
    with pytest.raises(ValidationError):
        lemniscatic_data(analyze(ComplexPoly([0, 1])), method="bogus")


def test_single_component_center():
    # P = 2z + 1/2 maps [-3/4, 1/4] onto [-1, 1]; the center is the midpoint
    lem, _, _ = lemniscatic_data(analyze(ComplexPoly([0.5, 2.0])))
    assert lem.centers[0] == pytest.approx(-0.25)
    assert lem.capacity == pytest.approx(0.25)


def test_chebyshev_twenty_converges_within_seven():
    _, trace = centers_iterative(analyze(chebyshev_t(20) * 1.05))
    assert trace.steps <= 7


def test_intersecting_arcs_iterative_matches_closed_form():
    pre = analyze(intersecting_arcs_poly(1.01))
    a = centers_iterative(pre)[0].centers
    np.testing.assert_allclose(a, intersecting_arcs_centers(1.01), atol=1e-12)


def test_from_roots_q_matches_factored():
    lem = lemniscatic_data(analyze(get_example("ex5.2").polynomial()))[0]
    rep = [a for a, k in zip(lem.centers, lem.counts) for _ in range(k)]
    Q = from_roots(2 * lem.pn, rep)
    assert np.allclose(Q.coeffs, lem.Q.coeffs)
    assert sorted(r.real for r in roots(Q)) == pytest.approx(sorted(rep), abs=1e-4)


def test_three_intervals_agree_with_printed_digits():
    # the published values are the first four decimals, cut off rather than rounded
    lem, _ = centers_iterative(analyze(get_example("ex4.1").polynomial()))
    printed = get_example("ex4.1").published_centers
    cut = [math.trunc(a * 1e4) / 1e4 for a in lem.centers]
    assert cut == pytest.approx(printed, abs=1e-12)
