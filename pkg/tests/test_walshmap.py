import cmath
import math

import numpy as np
import pytest

from lemniscate.catalog import chebyshev_t, symmetric_two_intervals_poly
from lemniscate.centers import lemniscatic_data
from lemniscate.errors import OnSetError, ValidationError
from lemniscate.polycore import compose_affine
from lemniscate.preimage import analyze, green_function
from lemniscate.walshmap import (GridSpec, make_context, map_grid, phi, phi_derivative,
                                 phi_inverse, phi_nearest_heuristic, trace_boundary)

FIXTURES = ["ex3.1", "ex3.2", "ex4.1", "ex4.2", "ex5.2", "ex5.3"]


def sample_off_set(ctx, count, seed, radius=3.0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        z = complex(*rng.uniform(-radius, radius, 2))
        if abs(z) <= radius and abs(z.imag) > 1e-3:
            out.append(z)
    return out


def symmetric_pair_phi(z, alpha, beta):
    # explicit map for E = [-beta, -alpha] u [alpha, beta]
    r = cmath.sqrt(1 - alpha ** 2 / z ** 2) * cmath.sqrt(1 - beta ** 2 / z ** 2)
    return z * cmath.sqrt((1 + alpha * beta / z ** 2 + r) / 2)


@pytest.mark.parametrize("key", FIXTURES)
def test_residual_invariant(ctx_for, key):
    ctx = ctx_for(key)
    for z in sample_off_set(ctx, 40, seed=1):
        w = phi(ctx, z)
        h = ctx.h(z)
        assert abs(ctx.lem.q_value(w) - h) <= 1e-9 * max(1.0, abs(h))


@pytest.mark.parametrize("key", ["ex4.1", "ex5.3"])
def test_green_function_transfers(ctx_for, key):
    ctx = ctx_for(key)
    for z in sample_off_set(ctx, 20, seed=2):
        w = phi(ctx, z)
        g = math.log(abs(ctx.lem.q_value(w))) / ctx.lem.n
        assert g == pytest.approx(green_function(ctx.pre.P, z), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("key", FIXTURES)
def test_monotone_on_gaps_and_outer_rays(ctx_for, key):
    ctx = ctx_for(key)
    b = ctx.pre.components.endpoints
    pieces = [(b[2 * j + 1], b[2 * j + 2]) for j in range(ctx.lem.ell - 1)]
    pieces += [(b[0] - 3, b[0]), (b[-1], b[-1] + 3)]
    for lo, hi in pieces:
        xs = np.linspace(lo, hi, 42)[1:-1]
        ws = [phi(ctx, x).real for x in xs]
        assert np.all(np.diff(ws) > 0)


def test_gap_maps_between_consecutive_centers(ctx_for):
    ctx = ctx_for("ex5.3")
    b = ctx.pre.components.endpoints
    a = ctx.lem.centers
    for j in range(ctx.lem.ell - 1):
        x = 0.5 * (b[2 * j + 1] + b[2 * j + 2])
        w = phi(ctx, x).real
        assert a[j] < w < a[j + 1]


def test_outer_critical_points_map_to_q_critical_points(ctx_for):
    ctx = ctx_for("ex5.3")
    for zj, wj in zip(ctx.pre.outer_critical_points, ctx.w):
        assert phi(ctx, zj).real == pytest.approx(wj, abs=1e-12)
        assert phi_inverse(ctx, wj).real == pytest.approx(zj, abs=1e-7)


def test_right_of_last_center_maps_right_of_set(ctx_for):
    ctx = ctx_for("ex4.1")
    for w in ctx.crossings[-1] + np.array([1e-3, 0.1, 1.0, 10.0]):
        assert phi_inverse(ctx, w).real > ctx.pre.components.endpoints[-1]


@pytest.mark.parametrize("key", FIXTURES)
def test_conjugation_symmetry(ctx_for, key):
    ctx = ctx_for(key)
    for z in sample_off_set(ctx, 10, seed=3):
        assert abs(phi(ctx, z.conjugate()) - phi(ctx, z).conjugate()) <= 1e-12


def test_quadrants_preserved_on_doubly_symmetric_set(ctx_for):
    ctx = ctx_for("ex4.2")
    for z in sample_off_set(ctx, 30, seed=4):
        w = phi(ctx, z)
        assert np.sign(w.real) == np.sign(z.real) and np.sign(w.imag) == np.sign(z.imag)
        assert abs(phi(ctx, -z) + w) <= 1e-11


@pytest.mark.parametrize("key", ["ex3.1", "ex5.3", "ex5.4-T10"])
def test_normalization_at_infinity(ctx_for, key):
    ctx = ctx_for(key)
    for th in np.linspace(0.1, 3.0, 5):
        z = 1e4 * cmath.exp(1j * th)
        assert abs(phi(ctx, z) - z) <= 1e-3


def test_round_trip_five_intervals(ctx_for):
    ctx = ctx_for("ex5.3")
    worst = 0.0
    for z in sample_off_set(ctx, 200, seed=5):
        worst = max(worst, abs(phi_inverse(ctx, phi(ctx, z)) - z))
    assert worst <= 1e-9


@pytest.mark.parametrize("alpha,beta", [(0.2, 2.0), (0.5, 1.0), (1.0, 3.0)])
def test_symmetric_pair_explicit_map(alpha, beta):
    pre = analyze(symmetric_two_intervals_poly(alpha, beta))
    ctx = make_context(pre, lemniscatic_data(pre)[0])
    rng = np.random.default_rng(6)
    for _ in range(30):
        z = complex(rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0))
        assert abs(phi(ctx, z) - symmetric_pair_phi(z, alpha, beta)) <= 1e-10


def test_derivative_matches_difference_quotient(ctx_for):
    ctx = ctx_for("ex4.1")
    z, eps = 0.3 + 0.4j, 1e-6
    fd = (phi(ctx, z + eps) - phi(ctx, z - eps)) / (2 * eps)
    assert phi_derivative(ctx, z) == pytest.approx(fd, rel=1e-7)


def test_nearest_root_heuristic_far_from_set(ctx_for):
    ctx = ctx_for("ex5.3")
    for z in (4 + 3j, -5 + 1j, 0.2 + 2.5j):
        assert abs(phi(ctx, z) - phi_nearest_heuristic(ctx, z)) <= 1e-10


def test_points_on_set_rejected(ctx_for):
    ctx = ctx_for("ex4.1")
    b = ctx.pre.components.endpoints
    with pytest.raises(OnSetError):
        phi(ctx, 0.5 * (b[0] + b[1]))
    with pytest.raises(OnSetError):
        phi_inverse(ctx, ctx.lem.centers[1])
    with pytest.raises(ValidationError):
        phi(ctx, complex(math.nan, 0))


def test_grid_conjugate_and_odd_symmetry(ctx_for):
    ctx = ctx_for("ex4.2")
    spec = GridSpec("cartesian", -1.5, 1.5, -1.5, 1.5, lines=6, samples=31)
    result = map_grid(ctx, spec)
    assert result.max_residual <= 1e-9
    mapped = {}
    for line in result.polylines:
        for z, w in zip(line.z, line.w):
            mapped[(round(z.real, 12), round(z.imag, 12))] = w
    for (x, y), w in mapped.items():
        if (x, -y) in mapped:
            assert abs(mapped[(x, -y)] - w.conjugate()) <= 1e-12
        if (-x, -y) in mapped:
            assert abs(mapped[(-x, -y)] + w) <= 1e-11


def test_grid_splits_at_set(ctx_for):
    ctx = ctx_for("ex4.1")
    spec = GridSpec("cartesian", -1.2, 1.2, -0.5, 0.5, lines=3, samples=25)
    result = map_grid(ctx, spec)
    # the middle horizontal line runs along the real axis and crosses E
    assert any(d[2] == "OnSetError" for d in result.dropped)
    assert len({p.source_line for p in result.polylines}) == 6


def test_polar_grid_shapes():
    spec = GridSpec("polar", rmin=1.5, rmax=2.5, lines=4, samples=9)
    lines = spec.polylines()
    assert len(lines) == 8 and all(len(z) == 9 for z in lines)
    np.testing.assert_allclose(np.abs(lines[0]), 1.5)


def test_grid_spec_validation():
    with pytest.raises(ValidationError):
        GridSpec("hex")
    with pytest.raises(ValidationError):
        GridSpec(xmin=1, xmax=0)


def test_boundary_disk():
    # T_3((z - 0.3) / 0.8) has E = [-0.5, 1.1]; L is the disk |w - 0.3| <= 0.4
    P = compose_affine(chebyshev_t(3), 1 / 0.8, -0.3 / 0.8)
    pre = analyze(P)
    lem = lemniscatic_data(pre)[0]
    assert lem.ell == 1 and lem.centers[0] == pytest.approx(0.3, abs=1e-14)
    curves = trace_boundary(make_context(pre, lem), 64)
    assert len(curves) == 1
    assert np.max(np.abs(np.abs(curves[0].points - 0.3) - 0.4)) <= 1e-10


def test_boundary_level_and_crossings(ctx_for):
    ctx = ctx_for("ex3.2")
    curves = trace_boundary(ctx, 64)
    for c in curves:
        assert np.max(np.abs(np.abs(ctx.lem.q_value(c.points)) - 1)) <= 1e-10
        assert c.points[0] == c.points[-1]
    a2, cap = ctx.lem.centers[1], ctx.lem.capacity
    assert ctx.crossings[2] == pytest.approx(math.sqrt(a2 ** 2 - cap ** 2), abs=1e-10)
    assert ctx.crossings[3] == pytest.approx(math.sqrt(a2 ** 2 + cap ** 2), abs=1e-10)


@pytest.mark.parametrize("key", ["ex4.1", "ex5.2", "ex5.4-T10"])
def test_boundary_level_many_components(ctx_for, key):
    ctx = ctx_for(key)
    curves = trace_boundary(ctx, 32)
    assert len(curves) == ctx.lem.ell
    for j, c in enumerate(curves):
        assert np.max(np.abs(np.abs(ctx.lem.q_value(c.points)) - 1)) <= 1e-10
        assert np.min(np.abs(c.points - ctx.lem.centers[j])) > 0


def test_boundary_needs_samples(ctx_for):
    with pytest.raises(ValidationError):
        trace_boundary(ctx_for("ex3.2"), 8)


def test_context_rejects_foreign_centers(ctx_for):
    ctx = ctx_for("ex4.1")
    with pytest.raises(ValidationError):
        make_context(ctx.pre, ctx_for("ex5.3").lem)


@pytest.mark.parametrize("key", ["ex3.1", "ex5.3"])
def test_far_points_just_off_the_real_line(ctx_for, key):
    # Im(Phi(z)) is below the rounding level of |Phi(z)| here
    ctx = ctx_for(key)
    for x in (-1e4, 1e4, -50.0):
        z = complex(x, 1e-12)
        w = phi(ctx, z)
        assert w.imag >= 0
        assert abs(w - phi(ctx, x)) <= 1e-10 * abs(x)
        assert abs(phi_inverse(ctx, w) - z) <= 1e-10 * abs(x)
