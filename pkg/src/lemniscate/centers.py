"""
Centers of the lemniscatic domain.

The lemniscatic domain is the exterior of ``L = {w : |Q(w)| <= 1}`` with
``Q(w) = 2 p_n prod (w - a_j)^{n_j}``. The exponents are ``n_j / n``; this
module computes the centers ``a_j`` either from closed forms (two components,
or doubly symmetric sets with two or three components) or with the iterative
scheme that alternates a Newton solve for the centers with a recomputation of
the critical points of Q.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConvergenceError, ValidationError
from .polycore import ComplexPoly, from_roots, real_roots_in, roots
from .preimage import IntervalSet, PreimageData, h_from_value

log = logging.getLogger(__name__)

SYM_TOL = 1e-9


@dataclass(frozen=True)
class LemniscaticData:
    """Centers, exponents and capacity of a lemniscatic domain.

    ``centers`` is a real array in the real-symmetric case and a complex array
    when the centers leave the real line (doubly symmetric sets whose two
    components are mirror images under conjugation).
    """

    centers: np.ndarray
    counts: tuple
    pn: complex
    capacity: float
    Q: ComplexPoly
    q_critical_points: tuple

    @property
    def ell(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def exponents(self) -> tuple:
        return tuple(Fraction(k, self.n) for k in self.counts)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.centers)

    def log_abs_q(self, w):
        w = np.asarray(w, dtype=complex)
        a = self.centers.astype(complex)
        return (math.log(2 * abs(self.pn))
                + np.sum(np.array(self.counts) * np.log(np.abs(w[..., None] - a)), axis=-1))

    def q_value(self, w):
        """Q(w) from the factored form."""
        w = np.asarray(w, dtype=complex)
        a = self.centers.astype(complex)
        return 2 * self.pn * np.prod((w[..., None] - a) ** np.array(self.counts), axis=-1)

    def q_log_derivative(self, w):
        """Q'(w) / Q(w) = sum n_j / (w - a_j)."""
        w = np.asarray(w, dtype=complex)
        a = self.centers.astype(complex)
        return np.sum(np.array(self.counts) / (w[..., None] - a), axis=-1)


@dataclass
class IterationTrace:
    """History of the iterative center computation."""

    centers: list = field(default_factory=list)
    critical_points: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    inner_iterations: list = field(default_factory=list)
    converged: bool = False
    steps: int = 0


@dataclass(frozen=True)
class SymmetryPairing:
    """How the components of a set symmetric under z -> -z pair up (0-based)."""

    symmetric: bool
    fixed: Optional[int]
    pairs: tuple


@dataclass
class ValidationReport:
    critical_residuals: list
    relative_residuals: list
    sum_residual: float
    interlacing: list
    symmetry_residuals: dict

    @property
    def max_residual(self) -> float:
        vals = list(self.relative_residuals) + [self.sum_residual]
        vals += list(self.symmetry_residuals.values())
        return max(vals) if vals else 0.0

    @property
    def ok_interlacing(self) -> bool:
        return all(self.interlacing)


# ---------------------------------------------------------------------------

def q_poly(pn: complex, centers: Sequence[complex], counts: Sequence[int]) -> ComplexPoly:
    """Expanded ``2 p_n prod (w - a_j)^{n_j}``."""
    if any(int(k) < 1 for k in counts):
        raise ValidationError("counts must be positive")
    if len(centers) != len(counts):
        raise ValidationError("centers and counts differ in length")
    rep = [a for a, k in zip(centers, counts) for _ in range(int(k))]
    return from_roots(2 * complex(pn), rep)


def _rational_polish(x: float, a: np.ndarray, counts: np.ndarray, lo: float, hi: float) -> float:
    # Newton on sum n_k / (w - a_k), strictly decreasing between consecutive centers
    for _ in range(8):
        d = x - a
        f = np.sum(counts / d)
        df = -np.sum(counts / d ** 2)
        step = f / df
        xn = x - step
        if not lo < xn < hi:
            break
        x = xn
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
    return float(x)


def q_critical_points(centers: Sequence[complex], counts: Sequence[int]) -> tuple:
    """Critical points of Q outside L: zeros of sum_k n_k prod_{j != k} (w - a_j)."""
    counts = [int(k) for k in counts]
    ell = len(counts)
    if ell < 2:
        return ()
    n = sum(counts)
    cplx = np.iscomplexobj(centers) and np.any(np.imag(centers) != 0)
    a = np.asarray(centers, dtype=complex if cplx else float)
    if ell == 2:
        return ((counts[1] * a[0] + counts[0] * a[1]) / n,)
    if cplx:
        poly = sum((from_roots(k, [a[j] for j in range(ell) if j != i])
                    for i, k in enumerate(counts)), ComplexPoly([0]))
        return tuple(sorted(roots(poly), key=lambda z: (z.real, z.imag)))
    if np.any(np.diff(a) <= 0):
        raise ValidationError("centers must be strictly increasing")
    nn = np.array(counts, dtype=float)
    if ell == 3:
        n1, n2, n3 = counts
        b = (n2 + n3) * a[0] + (n1 + n3) * a[1] + (n1 + n2) * a[2]
        c = n3 * a[0] * a[1] + n2 * a[0] * a[2] + n1 * a[1] * a[2]
        disc = b * b - 4 * n * c
        if disc < 0:
            raise ValidationError("complex critical point of Q for real centers")
        sq = math.sqrt(disc)
        ws = [(b - sq) / (2 * n), (b + sq) / (2 * n)]
    else:
        poly = sum((from_roots(k, [a[j] for j in range(ell) if j != i])
                    for i, k in enumerate(counts)), ComplexPoly([0]))
        all_roots = roots(poly)
        if any(abs(r.imag) > 1e-8 * max(1.0, abs(r)) for r in all_roots):
            raise ValidationError("complex critical point of Q for real centers")
        ws = sorted(r.real for r in all_roots)
    out = []
    for j, x in enumerate(ws):
        lo, hi = a[j], a[j + 1]
        if not lo < x < hi:
            # clamp into the bracket before polishing; the zero is unique there
            x = 0.5 * (lo + hi)
        out.append(_rational_polish(x, a, nn, lo, hi))
    return tuple(out)


def make_lemniscatic(pn: complex, centers: Sequence[complex], counts: Sequence[int]) -> LemniscaticData:
    counts = tuple(int(k) for k in counts)
    cplx = np.iscomplexobj(centers) and np.any(np.imag(centers) != 0)
    a = np.array(centers, dtype=complex if cplx else float)
    n = sum(counts)
    pn = complex(pn)
    return LemniscaticData(centers=a, counts=counts, pn=pn,
                           capacity=(2 * abs(pn)) ** (-1.0 / n),
                           Q=q_poly(pn, a, counts),
                           q_critical_points=q_critical_points(a, counts))


def _positive_root(x: complex, n: int, what: str) -> float:
    x = complex(x)
    if abs(x.imag) > 1e-10 * abs(x) or x.real <= 0:
        raise ValidationError(f"{what} = {x} is not a positive real number")
    return x.real ** (1.0 / n)


# ---------------------------------------------------------------------------
# closed forms

def centers_single(pre: PreimageData) -> LemniscaticData:
    if pre.ell != 1:
        raise ValidationError("centers_single needs one component")
    a = pre.centroid_sum / pre.n
    return make_lemniscatic(pre.pn, [a.real if abs(a.imag) <= 1e-15 * max(1, abs(a)) else a],
                            pre.zero_counts)


def centers_two_components(pre: PreimageData) -> LemniscaticData:
    """Closed-form centers for two components, each symmetric w.r.t. the real line.

    ``a_{1,2} = -p_{n-1}/(n p_n) -/+ ((n_2/n_1)^{n_1} T)^{1/n}`` resp.
    ``((n_1/n_2)^{n_2} T)^{1/n}`` with ``T = (-1)^{n_2} h(z_1) / (2 p_n)``.
    """
    if pre.ell != 2:
        raise ValidationError(f"centers_two_components needs ell = 2, got {pre.ell}")
    n = pre.n
    n1, n2 = pre.zero_counts
    pn = pre.pn
    shift = pre.centroid_sum / n
    t = (-1) ** n2 * complex(pre.critical_images[0]) / (2 * pn)
    r1 = _positive_root((n2 / n1) ** n1 * t, n, "(n2/n1)^n1 T")
    r2 = _positive_root((n1 / n2) ** n2 * t, n, "(n1/n2)^n2 T")
    if abs(shift.imag) > 1e-12 * max(1.0, abs(shift)):
        raise ValidationError("p_{n-1}/p_n is not real")
    return make_lemniscatic(pn, [shift.real - r1, shift.real + r2], (n1, n2))


def _as_poly(src: Union[PreimageData, ComplexPoly]) -> ComplexPoly:
    return src.P if isinstance(src, PreimageData) else src


def double_symmetry_case(P: ComplexPoly) -> int:
    """1 if the preimage of a real even P meets the real line, else 2."""
    for shift in (1.0, -1.0):
        if real_roots_in(P - shift, -math.inf, math.inf):
            return 1
    return 2


def centers_double_symmetry_two(src: Union[PreimageData, ComplexPoly],
                                case: Optional[int] = None) -> LemniscaticData:
    """Centers for a real even P whose only outer critical point is z_1 = 0.

    Case 1 (each component self-conjugate) gives ``a_2 > 0``; case 2
    (components conjugate to each other) gives ``a_2`` on the positive
    imaginary axis. In both cases ``a_1 = -a_2``.
    """
    P = _as_poly(src)
    n = P.degree
    if n < 2 or n % 2 or not P.is_real(1e-14) or not P.is_even(1e-14):
        raise ValidationError("double symmetry closed form needs a real even polynomial")
    if isinstance(src, PreimageData):
        if src.ell != 2 or abs(src.outer_critical_points[0]) > SYM_TOL:
            raise ValidationError("expected two components with outer critical point 0")
    if case is None:
        case = double_symmetry_case(P)
    if case not in (1, 2):
        raise ValidationError("case must be 1 or 2")
    p0 = complex(P.coeffs[0]).real
    if abs(p0) <= 1.0:
        raise ValidationError(f"p_0 = {p0} lies in [-1, 1]; 0 would belong to E")
    h0 = p0 + math.copysign(math.sqrt(p0 * p0 - 1.0), p0)
    pn = complex(P.leading).real
    if case == 1:
        a2 = _positive_root((-1) ** (n // 2) * h0 / (2 * pn), n, "a_2^n")
        centers = [-a2, a2]
    else:
        a2 = 1j * _positive_root(h0 / (2 * pn), n, "a_2^n / i^n")
        centers = np.array([-a2, a2], dtype=complex)
    return make_lemniscatic(pn, centers, (n // 2, n // 2))


def centers_three_double_symmetry(pre: PreimageData) -> LemniscaticData:
    """Three components with E = -E: a_2 = 0, a_1 = -a_3 and an explicit a_3."""
    if pre.ell != 3:
        raise ValidationError(f"needs ell = 3, got {pre.ell}")
    n1, n2, n3 = pre.zero_counts
    z1, z2 = pre.outer_critical_points
    if n1 != n3:
        raise ValidationError(f"zero counts not symmetric: n1 = {n1}, n3 = {n3}")
    if abs(z1 + z2) > SYM_TOL * max(1.0, abs(z2)):
        raise ValidationError(f"critical points not symmetric: {z1}, {z2}")
    classify_symmetry(pre.components, require=True)
    n = pre.n
    h2 = abs(pre.critical_images[1])
    a3 = math.sqrt(n) * (h2 / (2 * abs(pre.pn) * n2 ** (n2 / 2) * (2 * n3) ** n3)) ** (1.0 / n)
    return make_lemniscatic(pre.pn, [-a3, 0.0, a3], pre.zero_counts)


# ---------------------------------------------------------------------------
# iterative scheme

def _interlaced(a: np.ndarray, w: np.ndarray) -> bool:
    return bool(np.all(a[:-1] < w) and np.all(w < a[1:]))


def _newton_centers(a0, w, log_h, counts, log_2pn, target, maxiter, step_tol):
    """Solve log|Q(w_j)| = log|h_j|, sum n_j a_j = target for the centers."""
    nn = np.array(counts, dtype=float)
    a = a0.copy()

    def residual(a):
        d = w[:, None] - a[None, :]
        top = log_2pn + np.sum(nn * np.log(np.abs(d)), axis=1) - log_h
        return np.concatenate([top, [nn @ a - target]]), d

    f, d = residual(a)
    for it in range(1, maxiter + 1):
        jac = np.vstack([-nn / d, nn])
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in center Newton step", best=a,
                                   residual=float(np.max(np.abs(f)))) from None
        t = 1.0
        while not _interlaced(a + t * step, w):
            t *= 0.5
            if t < 1e-12:
                raise ConvergenceError("center Newton step cannot keep interlacing", best=a,
                                       residual=float(np.max(np.abs(f))))
        a = a + t * step
        f, d = residual(a)
        if np.max(np.abs(t * step)) <= step_tol * (1.0 + np.max(np.abs(a))):
            return a, f, it
    return a, f, maxiter


def centers_iterative(pre: PreimageData, abstol: float = 1e-13, reltol: float = 1e-13,
                      max_outer: int = 50, inner_maxiter: int = 50,
                      inner_tol: float = 1e-14) -> tuple[LemniscaticData, IterationTrace]:
    """Iterative computation of the centers for ell >= 2 real-symmetric components.

    Starting from the interval midpoints and gap midpoints, each outer step
    solves for centers whose Q takes the prescribed critical values at the
    current critical points, then recomputes the critical points of Q. Stops
    when every center moves less than ``abstol + reltol * |a_j|``.

    Returns
    -------
    (LemniscaticData, IterationTrace)
        ``trace.steps`` is the outer index k at which the stopping rule held,
        so an exact initial guess reports 0 steps.
    """
    ell = pre.ell
    if ell < 2:
        raise ValidationError("centers_iterative needs ell >= 2")
    if not pre.P.is_real(1e-12):
        raise ValidationError("centers_iterative needs a real polynomial")
    counts = pre.zero_counts
    b = np.array(pre.components.endpoints)
    a = 0.5 * (b[0::2] + b[1::2])
    w = 0.5 * (b[1:-1:2] + b[2::2])
    h = np.array([complex(x).real for x in pre.critical_images])
    log_h = np.log(np.abs(h))
    pn = complex(pre.pn).real
    target = pre.centroid_sum.real
    nn = np.array(counts)
    # sign of Q(w_j) = sign(p_n) (-1)^(n_{j+1} + ... + n_ell) must match sign(h_j)
    tail = np.cumsum(nn[::-1])[::-1][1:]
    q_sign = np.sign(pn) * (-1.0) ** tail
    if np.any(q_sign != np.sign(h)):
        raise ValidationError(f"sign of Q at its critical points {q_sign.tolist()} disagrees "
                              f"with sign of h at the critical points {np.sign(h).tolist()}")

    trace = IterationTrace()
    trace.centers.append(a.copy())
    trace.critical_points.append(w.copy())
    log_2pn = math.log(2 * abs(pn))
    for k in range(max_outer):
        try:
            a_new, f, nit = _newton_centers(a, w, log_h, counts, log_2pn, target,
                                            inner_maxiter, inner_tol)
        except ConvergenceError as exc:
            exc.trace = trace
            raise
        if not np.all(np.isfinite(a_new)) or np.max(np.abs(f)) > 1e-9:
            raise ConvergenceError(f"inner Newton diverged at outer step {k}", best=a_new,
                                   residual=float(np.max(np.abs(f))), trace=trace)
        w_new = np.array(q_critical_points(a_new, counts))
        if not _interlaced(a_new, w_new):
            raise ConvergenceError("interlacing violated", best=a_new, trace=trace)
        delta = np.abs(a_new - a)
        trace.centers.append(a_new.copy())
        trace.critical_points.append(w_new.copy())
        trace.deltas.append(float(np.max(delta)))
        trace.inner_iterations.append(nit)
        log.debug("outer step %d: max|delta a| = %.3e, inner Newton %d its", k, delta.max(), nit)
        done = np.all(delta < abstol + reltol * np.abs(a))
        a, w = a_new, w_new
        if done:
            trace.converged = True
            trace.steps = k
            log.info("centers converged after %d outer steps (last |delta a| = %.3e)",
                     k, trace.deltas[-1])
            return make_lemniscatic(pn, a, counts), trace
    raise ConvergenceError(f"no convergence after {max_outer} outer steps", best=a,
                           residual=trace.deltas[-1], trace=trace)


# ---------------------------------------------------------------------------
# validation and symmetry

def _pairs_of(E) -> list:
    if isinstance(E, IntervalSet):
        return E.intervals
    return [(float(lo), float(hi)) for lo, hi in E]


def classify_symmetry(E, tol: float = SYM_TOL, require: bool = False) -> SymmetryPairing:
    """Pair up components under z -> -z.

    For a set with E = -E the components split into pairs (j1, j2) with
    E_{j1} = -E_{j2}, plus, for an odd count, one self-symmetric component
    containing 0. Indices are 0-based.
    """
    pairs = _pairs_of(E)
    ell = len(pairs)
    scale = max(1.0, max(max(abs(lo), abs(hi)) for lo, hi in pairs))
    sym = all(abs(pairs[j][0] + pairs[ell - 1 - j][1]) <= tol * scale for j in range(ell))
    if not sym:
        if require:
            raise ValidationError("E = -E does not hold within tolerance")
        return SymmetryPairing(False, None, ())
    fixed = None
    if ell % 2:
        fixed = ell // 2
        lo, hi = pairs[fixed]
        if not lo <= 0.0 <= hi:
            raise ValidationError("middle component of a symmetric set must contain 0")
    return SymmetryPairing(True, fixed, tuple((j, ell - 1 - j) for j in range(ell // 2)))


def validate_centers(pre: PreimageData, lem: LemniscaticData) -> ValidationReport:
    """Residuals of the defining equations for the centers."""
    ws = np.array(lem.q_critical_points, dtype=complex)
    h = np.array(pre.critical_images, dtype=complex)
    if len(ws) != len(h):
        raise ValidationError("number of critical points of Q and P differ")
    q = lem.q_value(ws) if len(ws) else np.array([])
    crit = [float(x) for x in np.abs(q - h)]
    rel = [c / max(1.0, abs(x)) for c, x in zip(crit, h)]
    s = float(abs(np.dot(lem.counts, lem.centers) - pre.centroid_sum))
    s /= max(1.0, abs(pre.centroid_sum))
    inter = []
    if lem.is_real:
        a = lem.centers
        for j, wj in enumerate(ws.real):
            inter.append(bool(a[j] < wj < a[j + 1]))
    sym = {}
    pairing = classify_symmetry(pre.components)
    if pairing.symmetric:
        for j1, j2 in pairing.pairs:
            sym[f"a[{j1}]+a[{j2}]"] = float(abs(lem.centers[j1] + lem.centers[j2]))
        if pairing.fixed is not None:
            sym[f"a[{pairing.fixed}]"] = float(abs(lem.centers[pairing.fixed]))
    return ValidationReport(crit, rel, s, inter, sym)


# ---------------------------------------------------------------------------
# dispatch

def closed_form_available(pre: PreimageData) -> Optional[str]:
    if pre.ell == 1:
        return "single"
    if pre.ell == 2:
        if pre.P.is_real(1e-14) and pre.P.is_even(1e-14) and abs(pre.outer_critical_points[0]) <= SYM_TOL:
            return "double-symmetry-two"
        return "two-components"
    if pre.ell == 3 and classify_symmetry(pre.components).symmetric:
        return "three-double-symmetry"
    return None


_CLOSED = {
    "single": centers_single,
    "two-components": centers_two_components,
    "double-symmetry-two": lambda pre: centers_double_symmetry_two(pre, case=1),
    "three-double-symmetry": centers_three_double_symmetry,
}


def lemniscatic_data(pre: PreimageData, method: str = "auto", **opts):
    """Compute the lemniscatic data with the requested method.

    ``method`` is ``"auto"`` (closed form when its preconditions hold, else
    iterative), ``"closed-form"`` or ``"iterative"``. Returns
    ``(LemniscaticData, IterationTrace or None, name of the method used)``.
    """
    if method not in ("auto", "closed-form", "iterative"):
        raise ValidationError(f"unknown method {method!r}")
    name = closed_form_available(pre)
    if method == "iterative" and pre.ell >= 2:
        lem, trace = centers_iterative(pre, **opts)
        return lem, trace, "iterative"
    if name is None:
        if method == "closed-form":
            raise ValidationError("no closed form applies to this set")
        lem, trace = centers_iterative(pre, **opts)
        return lem, trace, "iterative"
    return _CLOSED[name](pre), None, name
