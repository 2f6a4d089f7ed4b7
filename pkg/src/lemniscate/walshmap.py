"""
The conformal map Phi from the exterior of E onto the lemniscatic domain.

Phi is characterised by ``Q(Phi(z)) = h(z)`` together with the normalisation
``Phi(z) = z + O(1/z)``. On the real line the right root of ``Q(w) = h(z)`` is
found by a bracketed solve on the monotone piece that Phi must land on. Off the
real line the root is followed by predictor-corrector continuation from a far
point, where Phi is close to the identity, to the requested point.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .centers import LemniscaticData
from .errors import ConvergenceError, OnSetError, ValidationError
from .polycore import derivative, roots
from .preimage import PreimageData, h_from_value

log = logging.getLogger(__name__)

TOL_MAP = 1e-9
JUMP_TOL = 20.0
MAX_CONT_STEPS = 20000
NEWTON_STEPS = 12


def _horner2(c: Sequence[complex], z: complex):
    """P(z) and P'(z) for descending coefficients ``c`` (plain Python, scalar)."""
    p = c[0]
    dp = 0j
    for ck in c[1:]:
        dp = dp * z + p
        p = p * z + ck
    return p, dp


@dataclass(frozen=True)
class MapContext:
    """Everything needed to evaluate Phi for one set.

    ``crossings`` are the 2*ell points of the boundary of L on the real line,
    ordered so that ``crossings[2j] < a_j < crossings[2j+1]``.
    """

    pre: PreimageData
    lem: LemniscaticData
    crossings: tuple
    w: tuple
    _pc: tuple = field(repr=False, default=())
    _a: tuple = field(repr=False, default=())
    _n: tuple = field(repr=False, default=())
    _pcrit: tuple = field(repr=False, default=())
    _pabs: tuple = field(repr=False, default=())

    # scalar kernels ---------------------------------------------------------

    def p_and_dp(self, z: complex):
        return _horner2(self._pc, z)

    def p_rounding(self, z: complex) -> float:
        """Rounding-error scale of evaluating P at z, about eps * sum |c_k| |z|^k."""
        r = abs(z)
        acc = 0.0
        for c in self._pabs:
            acc = acc * r + c
        return 8 * len(self._pabs) * np.finfo(float).eps * acc

    def q_and_s(self, w: complex):
        """Q(w) and S(w) = Q'(w)/Q(w), from the factored form."""
        q = 2 * self.lem.pn
        s = 0j
        for a, k in zip(self._a, self._n):
            d = w - a
            if d == 0:
                return 0j, complex(math.inf)
            q *= d ** k
            s += k / d
        return q, s

    def log_abs_q(self, x: float) -> float:
        out = math.log(2 * abs(self.lem.pn))
        for a, k in zip(self._a, self._n):
            if x == a:
                return -math.inf
            out += k * math.log(abs(x - a))
        return out

    def h(self, z: complex) -> complex:
        return h_from_value(self.p_and_dp(z)[0])


def _bracket_outward(f, x0: float, step: float, direction: float, limit: int = 200):
    """Walk from x0 until f changes sign; f(x0) is assumed negative."""
    x = x0 + direction * step
    for _ in range(limit):
        if f(x) > 0:
            return x
        step *= 2
        x = x0 + direction * step
    raise ConvergenceError("could not bracket a boundary crossing")


def make_context(pre: PreimageData, lem: LemniscaticData) -> MapContext:
    """Precompute the real boundary crossings of L and scalar kernels."""
    if not lem.is_real:
        raise ValidationError("the map needs real centers (a set that meets the real line)")
    if lem.counts != tuple(pre.zero_counts):
        raise ValidationError("lemniscatic data does not belong to this preimage")
    a = [float(x) for x in lem.centers]
    w = [float(x) for x in lem.q_critical_points]
    ctx0 = MapContext(pre, lem, (), tuple(w), tuple(complex(c) for c in pre.P.coeffs[::-1]),
                      tuple(a), tuple(lem.counts))

    def f(x):
        return ctx0.log_abs_q(x)

    span = max(1.0, a[-1] - a[0])
    cross = []
    for j, aj in enumerate(a):
        lo = w[j - 1] if j > 0 else _bracket_outward(f, aj, span, -1.0)
        hi = w[j] if j < len(w) else _bracket_outward(f, aj, span, 1.0)
        cross.append(brentq(f, lo, aj, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=300))
        cross.append(brentq(f, aj, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=300))
    dP = derivative(pre.P)
    pcrit = tuple(roots(dP)) if dP.degree >= 1 else ()
    return MapContext(pre, lem, tuple(cross), tuple(w), ctx0._pc, ctx0._a, ctx0._n, pcrit,
                      tuple(abs(c) for c in ctx0._pc))


# ---------------------------------------------------------------------------
# real line

def _real_solve(g, lo: float, hi: float) -> float:
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=300)


def _phi_real(ctx: MapContext, x: float, h: complex) -> float:
    b = ctx.pre.components.endpoints
    d = ctx.crossings
    target = math.log(abs(h))

    def g(t):
        return ctx.log_abs_q(t) - target

    if x < b[0]:
        lo = _bracket_outward(g, d[0], max(1.0, abs(d[0])), -1.0)
        return _real_solve(g, lo, d[0])
    if x > b[-1]:
        hi = _bracket_outward(g, d[-1], max(1.0, abs(d[-1])), 1.0)
        return _real_solve(g, d[-1], hi)
    j = ctx.pre.components.index_of(x)
    if j is not None:
        raise OnSetError(f"z = {x} lies on E")
    # gap j sits between components j and j+1 (0-based)
    j = int(np.searchsorted(b, x)) // 2 - 1
    zj = ctx.pre.outer_critical_points[j]
    wj = ctx.w[j]
    if g(wj) <= 0:
        return wj
    if x < zj:
        return _real_solve(g, d[2 * j + 1], wj)
    if x > zj:
        return _real_solve(g, wj, d[2 * j + 2])
    return wj


def _phi_inverse_real(ctx: MapContext, x: float, target: float) -> float:
    b = ctx.pre.components.endpoints
    d = ctx.crossings
    P = ctx.pre.P

    def g(t):
        return (P(t).real - target)

    def solve(lo, hi):
        return _real_solve(g, lo, hi)

    def outward(x0, direction):
        s0 = math.copysign(1.0, g(x0 + direction * 1e-12 * max(1, abs(x0))))
        step = max(1.0, abs(x0))
        for _ in range(200):
            t = x0 + direction * step
            if math.copysign(1.0, g(t)) != s0:
                return t
            step *= 2
        raise ConvergenceError("could not bracket the inverse image")

    if x < d[0]:
        return solve(outward(b[0], -1.0), b[0])
    if x > d[-1]:
        return solve(b[-1], outward(b[-1], 1.0))
    j = int(np.searchsorted(d, x)) // 2 - 1
    zj = ctx.pre.outer_critical_points[j]
    wj = ctx.w[j]
    if x == wj:
        return zj
    lo, hi = (b[2 * j + 1], zj) if x < wj else (zj, b[2 * j + 2])
    if g(lo) * g(hi) > 0:
        # target within rounding of the extreme value P(z_j)
        return zj
    return solve(lo, hi)


# ---------------------------------------------------------------------------
# continuation

def _path_candidates(z: complex, radius: float):
    """Straight paths from a far point to z that stay in the same half-plane."""
    u = z / abs(z) if z != 0 else 1j
    far = [z + 1j * radius, radius * u if u.imag > 0.2 else None,
           z + radius * cmath.exp(0.25j * math.pi), z + radius * cmath.exp(0.75j * math.pi)]
    return [s for s in far if s is not None]


def _phi_continuation(ctx: MapContext, z: complex, start: complex):
    """Follow the root of Q(w) = h(t) along the segment t: start -> z."""
    h0 = ctx.h(start)
    w = _newton_q(ctx, start, h0)
    if w is None:
        raise ConvergenceError(f"no start root near {start}")
    t = 0.0
    dt = 0.05
    seg = z - start
    steps = 0
    while t < 1.0:
        steps += 1
        if steps > MAX_CONT_STEPS:
            raise ConvergenceError(f"continuation to {z} did not finish")
        dt = min(dt, 1.0 - t)
        zt = start + t * seg
        p, dp = ctx.p_and_dp(zt)
        h = h_from_value(p)
        q, s = ctx.q_and_s(w)
        dphi = dp / ((h - p) * s)
        zn = start + (t + dt) * seg
        try:
            hn = ctx.h(zn)
        except OnSetError:
            raise
        w_pred = w + dphi * (zn - zt)
        w_new = _newton_q(ctx, w_pred, hn)
        limit = 0.25 * _q_critical_distance(ctx, w)
        if w_new is None or abs(w_new - w_pred) > 0.1 * limit or abs(w_new - w) > limit:
            dt *= 0.5
            if dt < 1e-12:
                raise ConvergenceError(f"continuation step collapsed near {zt}")
            continue
        w = w_new
        t += dt
        dt *= 1.6
    return w, steps


def _q_critical_distance(ctx: MapContext, w: complex) -> float:
    dist = abs(w) + 1.0
    for wj in ctx.w:
        dist = min(dist, abs(w - wj))
    for a, k in zip(ctx._a, ctx._n):
        if k > 1:
            dist = min(dist, abs(w - a))
    return max(dist, 1e-300)


def _newton_q(ctx: MapContext, w: complex, h: complex) -> Optional[complex]:
    """Newton on Q(w)/h - 1; None if it does not settle."""
    for _ in range(NEWTON_STEPS):
        q, s = ctx.q_and_s(w)
        step = (1.0 - h / q) / s
        w -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(w)):
            return w
    q, _ = ctx.q_and_s(w)
    if abs(q / h - 1.0) <= 1e-13:
        return w
    return None


def _newton_p(ctx: MapContext, z: complex, target: complex) -> Optional[complex]:
    for _ in range(NEWTON_STEPS):
        p, dp = ctx.p_and_dp(z)
        if dp == 0:
            return None
        step = (p - target) / dp
        z -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(z)):
            return z
    p, _ = ctx.p_and_dp(z)
    if abs(p - target) <= 1e-12 * max(1.0, abs(target)) + ctx.p_rounding(z):
        return z
    return None


def _far_radius(ctx: MapContext) -> float:
    b = ctx.pre.components.endpoints
    return 10.0 * max(1.0, abs(b[0]), abs(b[-1]))


def _path_is_clear(ctx: MapContext, start: complex, z: complex, samples: int = 64) -> bool:
    for t in np.linspace(0.0, 1.0, samples):
        try:
            ctx.h(start + t * (z - start))
        except OnSetError:
            return False
    return True


def phi(ctx: MapContext, z: complex) -> complex:
    """Evaluate the exterior map Phi at a point z outside E.

    Raises
    ------
    OnSetError
        If z lies on E.
    ConvergenceError
        If no root of Q(w) = h(z) passes the branch selection.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("z must be finite")
    h = ctx.h(z)
    if z.imag == 0.0:
        return complex(_phi_real(ctx, z.real, h), 0.0)
    if z.imag < 0:
        return phi(ctx, z.conjugate()).conjugate()
    radius = max(_far_radius(ctx), 10.0 * abs(z))
    last = None
    for start in _path_candidates(z, radius):
        if not _path_is_clear(ctx, start, z):
            continue
        try:
            w, steps = _phi_continuation(ctx, z, start)
        except ConvergenceError as exc:
            last = exc
            continue
        q, _ = ctx.q_and_s(w)
        # very close to the real line Im(w) can sit below the rounding level of |w|
        upper = w.imag > -16 * np.finfo(float).eps * abs(w)
        if upper and abs(q - h) <= TOL_MAP * max(1.0, abs(h)):
            log.debug("phi(%s) = %s after %d continuation steps", z, w, steps)
            return complex(w.real, max(w.imag, 0.0))
    cands = phi_candidates(ctx, z)
    raise ConvergenceError(f"no root of Q(w) = h(z) passed the selector at z = {z}",
                           best=cands, residual=float("nan")) from last


def phi_candidates(ctx: MapContext, z: complex) -> list:
    """All roots of Q(w) - h(z)."""
    h = ctx.h(complex(z))
    return roots(ctx.lem.Q - h)


def phi_nearest_heuristic(ctx: MapContext, z: complex) -> complex:
    """The root of Q(w) = h(z) closest to z; a cheap cross-check, not always right."""
    return min(phi_candidates(ctx, z), key=lambda w: abs(w - z))


def phi_derivative(ctx: MapContext, z: complex, w: Optional[complex] = None) -> complex:
    """Phi'(z) = P'(z) / (sqrt(P(z)^2 - 1) S(Phi(z)))."""
    if w is None:
        w = phi(ctx, z)
    p, dp = ctx.p_and_dp(complex(z))
    h = h_from_value(p)
    _, s = ctx.q_and_s(w)
    return dp / ((h - p) * s)


def phi_inverse(ctx: MapContext, w: complex) -> complex:
    """Inverse map: the z outside E with Phi(z) = w, for w outside L."""
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValidationError("w must be finite")
    q, _ = ctx.q_and_s(w)
    if abs(q) <= 1.0 + 1e-13:
        raise OnSetError(f"|Q(w)| = {abs(q):.17g} <= 1: w lies in L")
    target = 0.5 * (q + 1.0 / q)
    if w.imag == 0.0:
        return complex(_phi_inverse_real(ctx, w.real, target.real), 0.0)
    if w.imag < 0:
        return phi_inverse(ctx, w.conjugate()).conjugate()
    radius = max(_far_radius(ctx), 10.0 * abs(w))
    last = None
    for start in _path_candidates(w, radius):
        try:
            z = _inverse_continuation(ctx, w, start)
        except (ConvergenceError, OnSetError) as exc:
            last = exc
            continue
        try:
            h = ctx.h(z)
        except OnSetError as exc:
            last = exc
            continue
        if z.imag > -16 * np.finfo(float).eps * abs(z) and abs(q - h) <= TOL_MAP * max(1.0, abs(q)):
            return complex(z.real, max(z.imag, 0.0))
    raise ConvergenceError(f"inverse map failed at w = {w}") from last


def _p_critical_distance(ctx: MapContext, z: complex) -> float:
    dist = abs(z) + 1.0
    for c in ctx._pcrit:
        dist = min(dist, abs(z - c))
    return max(dist, 1e-300)


def _inverse_continuation(ctx: MapContext, w: complex, start: complex) -> complex:
    q0, _ = ctx.q_and_s(start)
    z = _newton_p(ctx, start, 0.5 * (q0 + 1.0 / q0))
    if z is None:
        raise ConvergenceError("no start point for inverse continuation")
    t, dt = 0.0, 0.05
    seg = w - start
    steps = 0
    while t < 1.0:
        steps += 1
        if steps > MAX_CONT_STEPS:
            raise ConvergenceError("inverse continuation did not finish")
        dt = min(dt, 1.0 - t)
        wt = start + t * seg
        q, s = ctx.q_and_s(wt)
        p, dp = ctx.p_and_dp(z)
        dz = s * (q - p) / dp
        wn = start + (t + dt) * seg
        qn, _ = ctx.q_and_s(wn)
        if abs(qn) <= 1.0:
            raise OnSetError("inverse continuation path enters L")
        z_pred = z + dz * (wn - wt)
        z_new = _newton_p(ctx, z_pred, 0.5 * (qn + 1.0 / qn))
        limit = 0.25 * _p_critical_distance(ctx, z)
        if z_new is None or abs(z_new - z_pred) > 0.1 * limit or abs(z_new - z) > limit:
            dt *= 0.5
            if dt < 1e-12:
                raise ConvergenceError("inverse continuation step collapsed")
            continue
        z = z_new
        t += dt
        dt *= 1.6
    return z


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class GridSpec:
    """A family of polylines to push through Phi.

    ``kind="cartesian"`` gives ``lines`` horizontal and ``lines`` vertical
    segments across ``[xmin, xmax] x [ymin, ymax]``. ``kind="polar"`` gives
    ``lines`` circles about 0 with radii spread over ``[rmin, rmax]`` and
    ``lines`` rays between them. Every polyline carries ``samples`` points.
    """

    kind: str = "cartesian"
    xmin: float = -1.5
    xmax: float = 1.5
    ymin: float = -1.5
    ymax: float = 1.5
    rmin: float = 1.1
    rmax: float = 3.0
    lines: int = 11
    samples: int = 101

    def __post_init__(self):
        if self.kind not in ("cartesian", "polar"):
            raise ValidationError(f"unknown grid kind {self.kind!r}")
        if self.lines < 1 or self.samples < 2:
            raise ValidationError("grid needs lines >= 1 and samples >= 2")
        if self.xmin >= self.xmax or self.ymin >= self.ymax or not 0 < self.rmin < self.rmax:
            raise ValidationError("empty grid range")

    def polylines(self) -> list:
        out = []
        s = np.linspace(0.0, 1.0, self.samples)
        if self.kind == "cartesian":
            for y in np.linspace(self.ymin, self.ymax, self.lines):
                out.append(self.xmin + (self.xmax - self.xmin) * s + 1j * y)
            for x in np.linspace(self.xmin, self.xmax, self.lines):
                out.append(x + 1j * (self.ymin + (self.ymax - self.ymin) * s))
        else:
            for r in np.linspace(self.rmin, self.rmax, self.lines):
                out.append(r * np.exp(2j * np.pi * s))
            for th in 2 * np.pi * np.arange(self.lines) / self.lines:
                out.append((self.rmin + (self.rmax - self.rmin) * s) * np.exp(1j * th))
        return out


@dataclass
class MappedPolyline:
    line_id: int
    source_line: int
    z: np.ndarray
    w: np.ndarray
    residual: np.ndarray


@dataclass
class GridResult:
    polylines: list
    dropped: list

    @property
    def max_residual(self) -> float:
        vals = [float(np.max(p.residual)) for p in self.polylines if len(p.residual)]
        return max(vals) if vals else 0.0


def map_grid(ctx: MapContext, spec: GridSpec, jump_tol: float = JUMP_TOL) -> GridResult:
    """Map every polyline of ``spec``; split at points on E and at jumps."""
    polylines, dropped = [], []
    next_id = 0
    for src, zs in enumerate(spec.polylines()):
        piece_z, piece_w, piece_r = [], [], []

        def flush():
            nonlocal next_id, piece_z, piece_w, piece_r
            if piece_z:
                polylines.append(MappedPolyline(next_id, src, np.array(piece_z),
                                                np.array(piece_w), np.array(piece_r)))
                next_id += 1
            piece_z, piece_w, piece_r = [], [], []

        for z in zs:
            z = complex(z)
            try:
                w = phi(ctx, z)
                q, _ = ctx.q_and_s(w)
                res = abs(q - ctx.h(z))
            except (OnSetError, ConvergenceError) as exc:
                dropped.append((src, z, type(exc).__name__))
                flush()
                continue
            if piece_z and abs(w - piece_w[-1]) > jump_tol * max(abs(z - piece_z[-1]), 1e-15):
                flush()
            piece_z.append(z)
            piece_w.append(w)
            piece_r.append(res)
        flush()
    return GridResult(polylines, dropped)


# ---------------------------------------------------------------------------
# boundary of L

@dataclass
class BoundaryCurve:
    """Closed polyline on |Q(w)| = 1 around one center (first point repeated last)."""

    center_index: int
    points: np.ndarray
    method: str


def _radial_curve(ctx: MapContext, j: int, samples: int):
    a = ctx._a[j]
    reach = 2.0 * max(ctx.crossings[2 * j + 1] - a, a - ctx.crossings[2 * j])
    pts = []
    fails = 0
    for th in 2 * np.pi * np.arange(samples) / samples:
        u = cmath.exp(1j * th)

        def f(r):
            q, _ = ctx.q_and_s(a + r * u)
            return math.log(abs(q))

        # first sign change on a fine radial grid, then a bracketed solve
        rs = np.linspace(0.0, reach, 65)[1:]
        vals = [f(r) for r in rs]
        k = next((i for i, v in enumerate(vals) if v > 0), None)
        if k is None:
            fails += 1
            pts.append(None)
            continue
        lo = rs[k - 1] if k > 0 else 1e-300
        r = brentq(f, lo, rs[k], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=300)
        w = a + r * u
        _, s = ctx.q_and_s(w)
        # the ray must cross the level curve transversally and only once
        second = any(v <= 0 for v in vals[k + 1:]) and reach < 1e300
        if (s * u).real <= 0.05 * abs(s) or second:
            fails += 1
            pts.append(None)
            continue
        pts.append(w)
    return pts, fails


def _march_curve(ctx: MapContext, j: int, samples: int) -> np.ndarray:
    """March along |Q| = 1 from the right real crossing to the left one, then reflect."""
    start = complex(ctx.crossings[2 * j + 1])
    stop = ctx.crossings[2 * j]
    width = ctx.crossings[2 * j + 1] - stop
    ds = math.pi * width / samples
    w = start
    upper = [w]
    for _ in range(200 * samples):
        _, s = ctx.q_and_s(w)
        tangent = 1j * s.conjugate() / abs(s)
        if tangent.imag < 0 and w == start:
            tangent = -tangent
        step = ds
        while True:
            cand = _level_newton(ctx, w + step * tangent)
            if cand is not None and abs(cand - w) < 2 * step and (cand.imag > 0 or len(upper) > 2):
                break
            step *= 0.5
            if step < 1e-10 * ds:
                raise ConvergenceError(f"boundary marching stalled around center {j}")
        if cand.imag <= 0:
            upper.append(complex(stop))
            break
        upper.append(cand)
        w = cand
    else:
        raise ConvergenceError(f"boundary marching did not close around center {j}")
    upper = np.array(upper)
    lower = np.conj(upper[-2:0:-1])
    return np.concatenate([upper, lower, upper[:1]])


def _level_newton(ctx: MapContext, w: complex) -> Optional[complex]:
    for _ in range(NEWTON_STEPS):
        q, s = ctx.q_and_s(w)
        g = math.log(abs(q))
        step = g * s.conjugate() / abs(s) ** 2
        w -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(w)):
            return w
    q, _ = ctx.q_and_s(w)
    return w if abs(math.log(abs(q))) <= 1e-13 else None


def trace_boundary(ctx: MapContext, samples_per_component: int = 64) -> list:
    """Closed curves on |Q(w)| = 1, one per center.

    Points are found by radial root bracketing from each center. If a ray
    fails (the curve is not star-shaped about its center along that ray), the
    whole component is traced by predictor-corrector marching instead.
    """
    if samples_per_component < 16:
        raise ValidationError("samples_per_component must be at least 16")
    out = []
    for j in range(ctx.lem.ell):
        pts, fails = _radial_curve(ctx, j, samples_per_component)
        if fails == 0:
            arr = np.array(pts + pts[:1], dtype=complex)
            out.append(BoundaryCurve(j, arr, "radial"))
            continue
        log.info("center %d: %d of %d rays failed, marching instead", j, fails, samples_per_component)
        try:
            arr = _march_curve(ctx, j, samples_per_component)
        except ConvergenceError as exc:
            if fails > 0.1 * samples_per_component:
                raise ConvergenceError(f"boundary tracing failed around center {j}") from exc
            arr = np.array([p for p in pts if p is not None] + [pts[0] or pts[1]], dtype=complex)
            out.append(BoundaryCurve(j, arr, "radial-partial"))
            continue
        out.append(BoundaryCurve(j, arr, "marching"))
    return out
