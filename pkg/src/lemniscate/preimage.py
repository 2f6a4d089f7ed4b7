"""
Polynomial preimages E = P^{-1}([-1, 1]) of the unit interval.

Covers the moment system satisfied by interval endpoints, the explicit
polynomial built from such endpoints, detection of the components of E on the
real line, zero counts per component, the critical points of P in the gaps,
capacity, Green's function and the exterior map h(z) = P(z) + sqrt(P(z)^2 - 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, OnSetError, ValidationError
from .polycore import ComplexPoly, derivative, from_roots, roots, real_roots_in

TOL_VAL = 1e-9
TOL_IM = 1e-9
TOL_ASSIGN = 1e-7
TOL_BRANCH = 1e-13


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint closed real intervals ``[b1, b2] u [b3, b4] u ...``.

    A pair may collapse to a point (``b_{2j-1} == b_{2j}``) when a component
    only meets the real line in one point.
    """

    endpoints: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.endpoints)
        object.__setattr__(self, "endpoints", b)
        if len(b) < 2 or len(b) % 2:
            raise ValidationError("an IntervalSet needs 2*ell >= 2 endpoints")
        for j in range(0, len(b), 2):
            if b[j] > b[j + 1]:
                raise ValidationError(f"interval {j // 2} is reversed: {b[j]} > {b[j + 1]}")
        for j in range(1, len(b) - 1, 2):
            if not b[j] < b[j + 1]:
                raise ValidationError(f"gap {j // 2} is empty: {b[j]} >= {b[j + 1]}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> IntervalSet:
        return cls(tuple(x for pair in pairs for x in pair))

    @property
    def ell(self) -> int:
        return len(self.endpoints) // 2

    @property
    def intervals(self) -> list[tuple[float, float]]:
        b = self.endpoints
        return [(b[2 * j], b[2 * j + 1]) for j in range(self.ell)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        b = self.endpoints
        return [(b[2 * j + 1], b[2 * j + 2]) for j in range(self.ell - 1)]

    def index_of(self, x: float, tol: float = 0.0):
        """Index of the interval containing real ``x`` (within ``tol``), else None."""
        for j, (lo, hi) in enumerate(self.intervals):
            if lo - tol <= x <= hi + tol:
                return j
        return None

    def distance(self, z: complex) -> float:
        """Euclidean distance from ``z`` to the set."""
        z = complex(z)
        return min(math.hypot(max(lo - z.real, 0.0, z.real - hi), z.imag)
                   for lo, hi in self.intervals)


@dataclass(frozen=True)
class PreimageData:
    """A polynomial together with the structure of its preimage of [-1, 1]."""

    P: ComplexPoly
    components: IntervalSet
    zero_counts: tuple
    outer_critical_points: tuple
    critical_images: tuple
    capacity: float
    zeros: tuple = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return self.P.degree

    @property
    def ell(self) -> int:
        return self.components.ell

    @property
    def pn(self) -> complex:
        return self.P.leading

    @property
    def centroid_sum(self) -> complex:
        """-p_{n-1}/p_n, which equals sum n_j a_j for the centers."""
        c = self.P.coeffs
        return -complex(c[-2]) / complex(c[-1])


# ---------------------------------------------------------------------------
# endpoint systems

def _alternating_signs(m: int) -> np.ndarray:
    # + - - + + - - + + ... for 1-based index i: (-1)^floor(i/2)
    i = np.arange(1, m + 1)
    return np.where((i // 2) % 2 == 0, 1.0, -1.0)


def endpoint_residual(c: Sequence[float]) -> np.ndarray:
    """Residual of the moment system satisfied by preimage endpoints.

    Component k (k = 1..n-1) is
    ``c1^k - (c2^k + c3^k) + (c4^k + c5^k) - ... + (-1)^n c_{2n}^k``.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or len(c) < 2 or len(c) % 2:
        raise ValidationError("endpoint_residual needs an even number (>= 2) of endpoints")
    n = len(c) // 2
    s = _alternating_signs(len(c))
    return np.array([np.sum(s * c ** k) for k in range(1, n)])


def _check_order(c: np.ndarray) -> bool:
    for j in range(len(c) - 1):
        if j % 2 == 0 and not c[j] < c[j + 1]:
            return False
        if j % 2 == 1 and not c[j] <= c[j + 1]:
            return False
    return True


def solve_endpoints(pinned: Mapping[int, float], free: Mapping[int, float],
                    tol: float = 1e-12, maxiter: int = 100) -> np.ndarray:
    """Complete a partial endpoint configuration so that it is a preimage.

    Parameters
    ----------
    pinned : mapping
        Fixed coordinates, 0-based index -> value.
    free : mapping
        Unknown coordinates, 0-based index -> initial guess. Exactly n-1 of
        them for 2n endpoints.

    Returns
    -------
    numpy.ndarray
        All 2n endpoints, with moment residual at most ``tol`` (inf-norm).
    """
    idx = sorted(set(pinned) | set(free))
    if set(pinned) & set(free):
        raise ValidationError("an index cannot be both pinned and free")
    m = len(idx)
    if idx != list(range(m)) or m % 2 or m < 2:
        raise ValidationError("pinned and free must cover indices 0..2n-1")
    n = m // 2
    fidx = sorted(free)
    if len(fidx) != n - 1:
        raise ValidationError(f"need exactly {n - 1} free coordinates, got {len(fidx)}")
    c = np.array([pinned[i] if i in pinned else free[i] for i in range(m)], dtype=float)
    if not _check_order(c):
        raise ValidationError("initial configuration violates the endpoint ordering")
    if n == 1:
        return c
    s = _alternating_signs(m)
    ks = np.arange(1, n)
    res = endpoint_residual(c)
    for _ in range(maxiter):
        if np.max(np.abs(res)) <= tol:
            return c
        jac = np.array([[s[i] * k * c[i] ** (k - 1) for i in fidx] for k in ks])
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in endpoint solve", best=c,
                                   residual=float(np.max(np.abs(res)))) from None
        c_new = c.copy()
        c_new[fidx] += step
        if not _check_order(c_new):
            raise ConvergenceError("endpoint ordering violated during Newton iteration",
                                   best=c_new, residual=float(np.max(np.abs(res))))
        c = c_new
        res = endpoint_residual(c)
        if np.max(np.abs(step)) <= 4 * np.finfo(float).eps * max(1.0, np.max(np.abs(c))):
            break
    r = float(np.max(np.abs(res)))
    scale = max(1.0, float(np.max([np.sum(np.abs(c) ** k) for k in ks])))
    if r <= tol * scale:
        return c
    raise ConvergenceError("endpoint Newton iteration did not converge", best=c, residual=r)


def polynomial_from_endpoints(c: Sequence[float]) -> ComplexPoly:
    """Degree-n polynomial whose preimage of [-1, 1] has endpoints ``c``.

    Built as ``-1 + 2 * prod(z - c_i) / prod(c_1 - c_i)`` over the 1-based
    indices i = 2, 3, 6, 7, 10, 11, ..., so that P(c_1) = 1 and P(c_2) = -1.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or len(c) < 2 or len(c) % 2:
        raise ValidationError("need an even number (>= 2) of endpoints")
    sel = [c[i - 1] for i in range(1, len(c) + 1) if i % 4 in (2, 3)]
    denom = math.prod(c[0] - x for x in sel)
    if denom == 0.0:
        raise ValidationError("degenerate endpoints: c_1 coincides with another endpoint")
    return from_roots(2.0 / denom, sel) - 1.0


# ---------------------------------------------------------------------------
# structure of a given preimage

def _real_part_poly(P: ComplexPoly) -> ComplexPoly:
    if not P.is_real(1e-12):
        raise ValidationError("components_of needs a polynomial with real coefficients")
    return ComplexPoly(P.coeffs.real)


def _dist_to_unit_interval(v: complex) -> float:
    return math.hypot(max(abs(v.real) - 1.0, 0.0), v.imag)


def _is_real(r: complex, tol_im: float) -> bool:
    return abs(r.imag) <= tol_im * max(1.0, abs(r))


def _outer_real_critical_points(P: ComplexPoly, tol_val: float, tol_im: float):
    """Real critical points of P with the flag "outside E", ascending.

    Raises if a non-real critical point maps outside [-1, 1], which means some
    component is not symmetric with respect to the real line.
    """
    if P.degree < 2:
        return []
    out = []
    for r in roots(derivative(P)):
        v = complex(P(r))
        if _is_real(r, tol_im):
            out.append((r.real, abs(complex(P(r.real)).real) > 1.0 + tol_val))
        elif _dist_to_unit_interval(v) > tol_val:
            raise ValidationError(
                "a non-real critical point of P lies outside E: the components are not "
                "all symmetric with respect to the real line; supply the structure manually")
    out.sort()
    dedup = []
    for x, flag in out:
        if dedup and abs(x - dedup[-1][0]) <= 1e-12 * max(1.0, abs(x)):
            continue
        dedup.append((x, flag))
    return dedup


def components_of(P: ComplexPoly, real_symmetric: bool = True,
                  tol_val: float = TOL_VAL, tol_im: float = TOL_IM) -> IntervalSet:
    """Real trace of the components of ``P^{-1}([-1, 1])``.

    Breakpoints are the real roots of P - 1 and P + 1 together with the real
    critical points. Segments between breakpoints are classified by the value
    of |P| at their midpoint, then glued into maximal intervals. Two intervals
    are only kept apart when a critical point with |P| > 1 + tol_val lies
    between them, so that touching intervals (a double root of P^2 - 1) count
    as one component.
    """
    if not real_symmetric:
        raise ValidationError("only real-symmetric component structures are detected "
                              "automatically; supply the structure manually")
    if P.degree < 1:
        raise ValidationError("components_of needs deg P >= 1")
    Pr = _real_part_poly(P)
    crit = _outer_real_critical_points(Pr, tol_val, tol_im)
    bps = [x for x, _ in crit]
    for shift in (1.0, -1.0):
        bps += [r.real for r in roots(Pr - shift) if _is_real(r, tol_im)]
    bps = np.unique(np.array(bps, dtype=float))

    def val(x):
        return abs(complex(Pr(float(x))).real)

    in_pt = [val(x) <= 1.0 + tol_val for x in bps]
    in_seg = [val(0.5 * (bps[i] + bps[i + 1])) <= 1.0 for i in range(len(bps) - 1)]

    intervals: list[list[float]] = []
    cur = None
    for i, x in enumerate(bps):
        if in_pt[i] or (i > 0 and in_seg[i - 1]):
            if cur is None:
                cur = [x, x]
            cur[1] = x
        if i < len(in_seg) and in_seg[i]:
            if cur is None:
                cur = [x, x]
            continue
        if cur is not None:
            intervals.append(cur)
            cur = None
    if cur is not None:
        intervals.append(cur)
    if not intervals:
        raise ValidationError("no real points of E found; supply the structure manually")

    outer = [x for x, flag in crit if flag]
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        if any(merged[-1][1] < z < lo for z in outer):
            merged.append([lo, hi])
        else:
            merged[-1][1] = hi
    gaps = [(merged[j][1], merged[j + 1][0]) for j in range(len(merged) - 1)]
    counts = [sum(1 for z in outer if a < z < b) for a, b in gaps]
    if any(k != 1 for k in counts) or len(outer) != len(gaps):
        raise ValidationError(
            "inconsistent component structure: every gap must contain exactly one "
            "critical point of P with |P| > 1; supply endpoints manually")
    return IntervalSet.from_pairs(merged)


def endpoint_list(P: ComplexPoly, E: IntervalSet = None, tol_val: float = TOL_VAL,
                  tol_im: float = TOL_IM) -> np.ndarray:
    """The 2n endpoints of the n intervals making up ``P^{-1}([-1, 1])`` on the real line.

    Points where two of these intervals touch are critical points of P with
    |P| = 1; they are taken from P' (where they are simple roots) and listed
    twice. Raises if the count does not come out as 2n, which happens when E
    is not contained in the real line.
    """
    if E is None:
        E = components_of(P, True, tol_val, tol_im)
    Pr = _real_part_poly(P)
    touch = [x for x, outside in _outer_real_critical_points(Pr, tol_val, tol_im)
             if not outside and abs(abs(complex(Pr(x)).real) - 1.0) <= tol_val
             and E.index_of(x) is not None and x not in E.endpoints]
    pts = np.sort(np.array(list(E.endpoints) + 2 * touch, dtype=float))
    if len(pts) != 2 * P.degree:
        raise ValidationError(f"found {len(pts)} endpoints, expected {2 * P.degree}; "
                              "E is not a union of real intervals")
    return pts


def zero_counts(P: ComplexPoly, E: IntervalSet, tol_assign: float = TOL_ASSIGN) -> tuple:
    """Number of zeros of P (with multiplicity) in each component of ``E``."""
    counts = [0] * E.ell
    for r in roots(P):
        d = [math.hypot(max(lo - r.real, 0.0, r.real - hi), r.imag) for lo, hi in E.intervals]
        j = int(np.argmin(d))
        if d[j] > tol_assign * max(1.0, abs(r)):
            raise ValidationError(f"zero {r} of P is not on any interval of E (distance {d[j]:.3e})")
        counts[j] += 1
    if any(k == 0 for k in counts):
        raise ValidationError("some component contains no zero of P; structure is inconsistent")
    return tuple(counts)


def outer_critical_points(P: ComplexPoly, E: IntervalSet, tol_val: float = TOL_VAL,
                          tol_im: float = TOL_IM) -> tuple:
    """Critical points of P in the gaps of E, one per gap, ascending."""
    if E.ell == 1:
        return ()
    b = E.endpoints
    Pr = _real_part_poly(P)
    cand = real_roots_in(derivative(Pr), b[0], b[-1], tol_im)
    zs = [x for x in cand if abs(complex(Pr(x)).real) > 1.0 + tol_val]
    if len(zs) != E.ell - 1:
        raise ValidationError(f"expected {E.ell - 1} outer critical points, found {len(zs)}")
    for j, ((lo, hi), z) in enumerate(zip(E.gaps, zs)):
        if not lo < z < hi:
            raise ValidationError(f"critical point {z} is not inside gap {j} = ({lo}, {hi})")
    return tuple(zs)


def capacity(P: ComplexPoly) -> float:
    """Logarithmic capacity of the preimage, (2|p_n|)^(-1/n)."""
    if P.degree < 1:
        raise ValidationError("capacity needs deg P >= 1")
    return (2.0 * abs(P.leading)) ** (-1.0 / P.degree)


def h_from_value(p: complex, tol_branch: float = TOL_BRANCH) -> complex:
    """Root of largest modulus of w^2 - 2 p w + 1 = 0, i.e. p + sqrt(p^2 - 1)."""
    p = complex(p)
    if abs(p) > 1.0:
        # p * (1 + sqrt(1 - p^-2)); the principal root has Re >= 0 so this is the larger root
        h = p * (1.0 + cmath.sqrt(1.0 - 1.0 / (p * p)))
    else:
        s = cmath.sqrt(p * p - 1.0)
        if s == 0:
            raise OnSetError("P(z) = +-1: z is an endpoint of E")
        h = p + s if abs(p + s) >= abs(p - s) else p - s
    if abs(h) <= 1.0 + tol_branch:
        raise OnSetError(f"|h| = {abs(h):.17g} <= 1: the point lies on E")
    return h


def exterior_map_h(P: ComplexPoly, z: complex, tol_branch: float = TOL_BRANCH) -> complex:
    """``P(z) + sqrt(P(z)^2 - 1)`` with the branch for which |h| > 1."""
    return h_from_value(complex(P(z)), tol_branch)


def green_function(P: ComplexPoly, z: complex) -> float:
    """Green's function of the complement of E with pole at infinity."""
    return math.log(abs(exterior_map_h(P, z))) / P.degree


def analyze(P: ComplexPoly, tol_val: float = TOL_VAL, tol_im: float = TOL_IM,
            tol_assign: float = TOL_ASSIGN) -> PreimageData:
    """Bundle P with its components, zero counts, outer critical points and capacity."""
    if P.degree < 1:
        raise ValidationError("need deg P >= 1")
    E = components_of(P, True, tol_val, tol_im)
    counts = zero_counts(P, E, tol_assign)
    zs = outer_critical_points(P, E, tol_val, tol_im)
    images = tuple(exterior_map_h(P, z) for z in zs)
    return PreimageData(P=P, components=E, zero_counts=counts, outer_critical_points=zs,
                        critical_images=images, capacity=capacity(P),
                        zeros=tuple(roots(P)))
