"""
Dense complex polynomials and a global root finder.

Coefficients are stored in ascending order, ``coeffs[k]`` multiplies ``z**k``.
Root finding uses the Aberth-Ehrlich simultaneous iteration started on a
circle whose radius is the Cauchy bound, followed by clustering of nearly
coincident roots and Newton polishing.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, ValidationError

EPS = np.finfo(float).eps
TINY = np.finfo(float).tiny

TOL_ROOT = 1e-12
MAX_ABERTH_ITER = 500
POLISH_STEPS = 20
CLUSTER_TOL = 1e-7


class ComplexPoly:
    """Immutable dense polynomial with complex coefficients.

    Trailing zero coefficients are trimmed on construction. The zero
    polynomial is stored as a single ``0`` coefficient and reports
    ``is_zero``; operations that need degree >= 1 reject it.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[complex]):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                     dtype=complex).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(1, dtype=complex)
        c.flags.writeable = False
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self._c) == 1 and self._c[0] == 0

    @property
    def leading(self) -> complex:
        return complex(self._c[-1])

    def is_real(self, tol: float = 0.0) -> bool:
        scale = max(np.max(np.abs(self._c)), 1e-300)
        return bool(np.all(np.abs(self._c.imag) <= tol * scale))

    def is_even(self, tol: float = 0.0) -> bool:
        scale = max(np.max(np.abs(self._c)), 1e-300)
        return bool(np.all(np.abs(self._c[1::2]) <= tol * scale))

    def __call__(self, z):
        return horner(self._c, z)

    def __repr__(self) -> str:
        return f"ComplexPoly({self._c.tolist()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self) -> int:
        return hash(self._c.tobytes())

    def __len__(self) -> int:
        return len(self._c)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> ComplexPoly:
        if isinstance(other, ComplexPoly):
            return other
        return ComplexPoly([complex(other)])

    def __add__(self, other):
        o = self._coerce(other)
        m = max(len(self._c), len(o._c))
        out = np.zeros(m, dtype=complex)
        out[: len(self._c)] += self._c
        out[: len(o._c)] += o._c
        return ComplexPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self._c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            return ComplexPoly(np.convolve(self._c, other._c))
        return ComplexPoly(self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return ComplexPoly(self._c / complex(scalar))

    def __pow__(self, k: int):
        out = ComplexPoly([1])
        for _ in range(int(k)):
            out = out * self
        return out


def horner(c: np.ndarray, z):
    """Evaluate ascending coefficients ``c`` at scalar or array ``z``."""
    z = np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
    acc = c[-1] * (np.ones_like(z) if isinstance(z, np.ndarray) else 1)
    for ck in c[-2::-1]:
        acc = acc * z + ck
    return acc


def _horner_with_derivative(c: np.ndarray, z):
    p = np.full_like(z, c[-1])
    dp = np.zeros_like(z)
    for ck in c[-2::-1]:
        dp = dp * z + p
        p = p * z + ck
    return p, dp


def _abs_scale(c: np.ndarray, z):
    """Sum of |c_k| |z|^k, the natural magnitude for residuals at ``z``."""
    return horner(np.abs(c).astype(complex), np.abs(z)).real


def evaluate(p: ComplexPoly, z):
    return horner(p.coeffs, z)


def derivative(p: ComplexPoly) -> ComplexPoly:
    """Coefficient-wise derivative; a constant maps to the zero polynomial."""
    c = p.coeffs
    if len(c) == 1:
        return ComplexPoly([0])
    return ComplexPoly(c[1:] * np.arange(1, len(c)))


def antiderivative(p: ComplexPoly) -> ComplexPoly:
    c = p.coeffs
    return ComplexPoly(np.concatenate([[0], c / np.arange(1, len(c) + 1)]))


def compose_affine(p: ComplexPoly, s: complex, t: complex) -> ComplexPoly:
    """Return the polynomial ``z -> p(s*z + t)``."""
    lin = ComplexPoly([t, s])
    out = ComplexPoly([p.coeffs[-1]])
    for ck in p.coeffs[-2::-1]:
        out = out * lin + ck
    return out


def from_roots(leading: complex, roots: Sequence[complex]) -> ComplexPoly:
    """Expand ``leading * prod(z - r)``."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, [-complex(r), 1.0])
    return ComplexPoly(c * complex(leading))


def cauchy_radius(c: np.ndarray) -> float:
    """Cauchy bound: the positive root of |c_n| x^n - sum_{k<n} |c_k| x^k.

    Every root of the polynomial lies in the closed disk of this radius.
    """
    a = np.abs(c)
    n = len(a) - 1
    if n < 1 or not np.any(a[:-1]):
        return 0.0

    def g(x):
        # increasing in x; zero exactly at the bound
        k = np.arange(n)
        return a[-1] - np.sum(a[:-1] * np.exp((k - n) * math.log(x)))

    hi = 1.0 + float(np.max(a[:-1]) / a[-1])
    lo = hi
    while g(lo) > 0:
        lo *= 0.5
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 4 * EPS * hi:
            break
    return hi


def _aberth(c: np.ndarray, maxiter: int):
    n = len(c) - 1
    radius = cauchy_radius(c)
    k = np.arange(n)
    z = radius * np.exp(1j * (2 * np.pi * k / n + 0.4))
    active = np.ones(n, dtype=bool)
    absc = np.abs(c).astype(complex)
    for it in range(maxiter):
        p, dp = _horner_with_derivative(c, z)
        scale = horner(absc, np.abs(z)).real
        # a tight residual test: near a multiple root the iterates only come
        # together once the residual is at rounding level
        small = np.abs(p) <= EPS * scale
        active &= ~small
        if not active.any():
            return z, it
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        sums = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * sums)
        bad = ~np.isfinite(w)
        w[bad] = 1e-3 * (1.0 + np.abs(z[bad]))
        w[~active] = 0.0
        z = z - w
        done = np.abs(w) <= 2 * EPS * np.maximum(np.abs(z), TINY)
        active &= ~done
        if not active.any():
            return z, it + 1
    return z, maxiter


def cluster_roots(roots: Sequence[complex], tol: float = CLUSTER_TOL, floor: float = 1.0):
    """Group roots closer than ``tol * max(floor, |r|)`` (single linkage).

    ``floor`` sets the absolute scale below which closeness is judged
    absolutely; pass the root radius for polynomials whose roots are all tiny.

    Returns a list of ``(mean, multiplicity)`` pairs.
    """
    r = np.asarray(roots, dtype=complex)
    n = len(r)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(r[i] - r[j]) <= tol * max(floor, abs(r[i]), abs(r[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [(complex(np.mean(r[idx])), len(idx)) for idx in groups.values()]


def _newton_polish(c: np.ndarray, target: np.ndarray, z0: complex, steps: int) -> complex:
    """Newton on ``target`` from z0, keeping iterates that lower the residual of ``c``."""
    dtarget = np.array(derivative(ComplexPoly(target)).coeffs)
    best = z0
    best_res = abs(horner(c, z0))
    z = z0
    for _ in range(steps):
        d = horner(dtarget, z)
        if d == 0:
            break
        step = horner(target, z) / d
        z = z - step
        res = abs(horner(c, z))
        if res < best_res or (res == best_res and abs(step) > 0):
            best, best_res = z, res
        if abs(step) <= 2 * EPS * max(abs(z), TINY):
            break
    return best


def roots(p: ComplexPoly, tol: float = TOL_ROOT, maxiter: int = MAX_ABERTH_ITER,
          polish_steps: int = POLISH_STEPS, cluster_tol: float = CLUSTER_TOL) -> list[complex]:
    """All ``deg p`` roots of ``p`` with multiplicity.

    Roots closer than ``cluster_tol`` are replaced by their mean and, for
    multiplicity m > 1, refined as a root of the (m-1)-th derivative.

    Raises
    ------
    ValidationError
        If ``p`` is constant.
    ConvergenceError
        If some root keeps a scaled residual above ``tol``.
    """
    if p.degree < 1:
        raise ValidationError("roots() needs a polynomial of degree >= 1")
    c = np.array(p.coeffs)
    c = c / np.max(np.abs(c))
    nzero = int(np.flatnonzero(c)[0])
    out: list[complex] = [0j] * nzero
    c = c[nzero:]
    if len(c) == 1:
        return out
    if len(c) == 2:
        out.append(complex(-c[0] / c[1]))
        return out

    z, _ = _aberth(c, maxiter)
    floor = min(1.0, cauchy_radius(c))
    for center, mult in cluster_roots(z, cluster_tol, floor):
        if mult == 1:
            r = _newton_polish(c, c, center, polish_steps)
        else:
            dm = ComplexPoly(c)
            for _ in range(mult - 1):
                dm = derivative(dm)
            dmc = np.array(dm.coeffs)
            r = _newton_polish(dmc, dmc, center, polish_steps)
            if abs(r - center) > cluster_tol * max(floor, abs(center)):
                r = center
        out.extend([complex(r)] * mult)

    res = [abs(horner(c, r)) / max(_abs_scale(c, r), 1e-300) for r in out[nzero:]]
    worst = int(np.argmax(res))
    if res[worst] > tol:
        raise ConvergenceError(
            f"root finder did not converge (scaled residual {res[worst]:.3e})",
            best=out, residual=res[worst])
    return out


def real_roots_in(p: ComplexPoly, lo: float, hi: float, tol_im: float = 1e-9) -> list[float]:
    """Distinct real roots in ``[lo, hi]`` (imaginary part at most ``tol_im``), ascending."""
    if lo > hi:
        raise ValidationError("real_roots_in needs lo <= hi")
    cand = [r.real for r in roots(p) if abs(r.imag) <= tol_im and lo <= r.real <= hi]
    merged = [c for c, _ in cluster_roots(cand)]
    return sorted(x.real for x in merged)
