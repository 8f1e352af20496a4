"""Perturbation series for algebraic equations, with a posteriori checks.

Given a problem ``Phi(x, eps) = 0`` this module finds the roots of the
zeroth-order equation ``Phi(x, 0) = 0``, grows each simple root ``a_0``
into a truncated series ``z(eps) = a_0 + a_1*eps + ... + a_N*eps**N`` by
matching powers of eps, and quantifies the quality of the result three
independent ways:

* the symbolic residual ``Phi(z(eps), eps)``, whose coefficients through
  order N vanish by construction;
* the numeric residual sampled on a geometric eps-grid, whose log-log
  slope estimates the residual order N+1;
* a first-order error bound ``|z - x| <= kappa * |residual|`` with
  ``kappa = 1 / |dPhi/dx|``, cross-checked against a bisection oracle.

Each coefficient ``a_n`` solves one linear equation whose pivot is
``dPhi/dx(a_0, 0)``; the recursion is done by substituting the partial
series into the problem and collecting powers, so a single code path
covers every polynomial problem.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .parsing import PerturbedPolynomial
from .series import FLOAT, RATIONAL, TruncatedSeries

Coefficient = Union[Fraction, complex]

#: |dPhi/dx(a0, 0)| at or below this is treated as a multiple root in
#: float mode (rational mode tests exact zero).
SIMPLE_ROOT_TOL = 1e-8

#: Default eps-grid for order estimation: 2**-4 .. 2**-10.
DEFAULT_GRID = tuple(2.0 ** -j for j in range(4, 11))


class AlgebraicError(Exception):
    """Base class for errors of this module."""


class DegenerateAtZeroError(AlgebraicError):
    """Phi(x, 0) is constant; there is no zeroth-order root to find."""


class NoConvergenceError(AlgebraicError):
    """The simultaneous root iteration stalled."""


class MultipleRootError(AlgebraicError):
    """The pivot dPhi/dx(a0, 0) vanishes: the branch needs rescaling."""


class ZeroResidualOnGridError(AlgebraicError):
    """Residual is exactly zero on the sample grid (exact solution)."""


class IllConditionedError(AlgebraicError):
    """dPhi/dx vanishes at the evaluation point."""


class NoBracketFoundError(AlgebraicError):
    """No sign change discoverable near the oracle starting guess."""


# ---------------------------------------------------------------------------
# solution containers


@dataclass(frozen=True)
class PerturbationSolution:
    """One root branch: base root, series and residual bookkeeping.

    ``laurent_offset`` is the integer ``l <= 0`` such that the branch in
    the original variable is ``eps**l * series(eps)``; it is 0 unless the
    branch came out of a dominant-balance rescaling (``scaling`` then
    records the transform; its type lives in :mod:`perturbkit.rescale`).
    """

    problem: PerturbedPolynomial
    base_root: Coefficient
    series: TruncatedSeries
    residual_leading_order: int
    scaling: object | None = None
    laurent_offset: int = 0

    @property
    def order(self) -> int:
        return self.series.order

    def evaluate(self, eps):
        """Branch value at ``eps`` (exact when everything is rational)."""
        scale = 1 if self.laurent_offset == 0 else _power(eps, self.laurent_offset)
        return scale * self.series.evaluate(eps)


def _power(eps, exponent: int):
    if isinstance(eps, Fraction) or isinstance(eps, int):
        return Fraction(eps) ** exponent
    return complex(eps) ** exponent


@dataclass(frozen=True)
class ResidualReport:
    """Sampled a posteriori diagnostics for one solution series."""

    residual: TruncatedSeries
    residual_leading_order: int
    grid: tuple[float, ...]
    magnitudes: tuple[float, ...]
    slope: Optional[float]          # None when the residual vanished on the grid
    exact_on_grid: bool
    condition_numbers: tuple[float, ...]
    error_bounds: tuple[float, ...]
    oracle_errors: Optional[tuple[float, ...]]


# ---------------------------------------------------------------------------
# zeroth-order roots


def _durand_kerner(coeffs: Sequence[complex], tol: float = 1e-12,
                   max_sweeps: int = 200) -> list[complex]:
    """All complex roots of ``sum(coeffs[k] x^k)``, leading coeff nonzero."""
    d = len(coeffs) - 1
    lead = coeffs[-1]
    monic = [c / lead for c in coeffs]

    def poly(x: complex) -> complex:
        acc = 0j
        for c in reversed(monic):
            acc = acc * x + c
        return acc

    # Fujiwara-style magnitude estimate keeps the start circle near the
    # actual root sizes even when they blow up like 1/eps
    radius = 1.0
    for k in range(d):
        mag = abs(monic[k])
        if mag > 0:
            radius = max(radius, 2.0 * mag ** (1.0 / (d - k)))
    seed = 0.4 + 0.9j
    xs = [radius * seed ** j for j in range(d)]

    converged = False
    for _ in range(max_sweeps):
        max_update = 0.0
        for i in range(d):
            denom = 1 + 0j
            for j in range(d):
                if j != i:
                    denom *= xs[i] - xs[j]
            if denom == 0:
                xs[i] += tol * (1 + 1j)
                max_update = math.inf
                continue
            delta = poly(xs[i]) / denom
            xs[i] -= delta
            max_update = max(max_update, abs(delta) / max(1.0, abs(xs[i])))
        if max_update <= tol:
            converged = True
            break
    if not converged:
        # clustered (multiple) roots stall the sweep metric; accept if the
        # iterates actually sit on the polynomial
        if max(abs(poly(x)) for x in xs) > 1e-10 * max(1.0, max(abs(x) for x in xs) ** d):
            raise NoConvergenceError("root iteration stalled after %d sweeps" % max_sweeps)

    # a few Newton polish steps clean each root to machine precision
    dcoeffs = [k * monic[k] for k in range(1, d + 1)]

    def dpoly(x: complex) -> complex:
        acc = 0j
        for c in reversed(dcoeffs):
            acc = acc * x + c
        return acc

    for i in range(d):
        x = xs[i]
        for _ in range(3):
            dp = dpoly(x)
            if dp == 0:
                break
            step = poly(x) / dp
            if abs(step) > 0.5 * max(1.0, abs(x)):
                break
            x -= step
        if abs(poly(x)) <= abs(poly(xs[i])):
            xs[i] = x
    return xs


def _snap_to_rational(root: complex, poly0: Sequence[Fraction],
                      imag_tol: float = 1e-9) -> Coefficient:
    """Return an exact Fraction when the numeric root verifiably is one."""
    if abs(root.imag) > imag_tol:
        return root
    cand = Fraction(root.real).limit_denominator(1_000_000)
    acc = Fraction(0)
    for c in reversed(poly0):
        acc = acc * cand + c
    if acc == 0:
        return cand
    return root


def _root_sort_key(r: Coefficient):
    if isinstance(r, Fraction):
        return (float(r), 0.0)
    return (r.real, r.imag)


def zeroth_roots(p: PerturbedPolynomial) -> list[Coefficient]:
    """All complex roots of Phi(x, 0), with multiplicity, ordered by
    (real part, imaginary part).  Roots that are verifiably rational come
    back as exact Fractions."""
    poly0 = p.at_eps_zero()
    while len(poly0) > 1 and poly0[-1] == 0:
        poly0.pop()
    if len(poly0) <= 1:
        raise DegenerateAtZeroError("Phi(x, 0) has no x dependence")
    numeric = _durand_kerner([complex(c) for c in poly0])
    snapped = [_snap_to_rational(r, poly0) for r in numeric]
    return sorted(snapped, key=_root_sort_key)


# ---------------------------------------------------------------------------
# series construction


def _pivot_at(p: PerturbedPolynomial, a0: Coefficient):
    """dPhi/dx at (a0, eps=0), in the arithmetic of a0."""
    dpoly = p.derivative_x().at_eps_zero()
    acc = Fraction(0) if isinstance(a0, Fraction) else 0j
    for c in reversed(dpoly):
        acc = acc * a0 + (c if isinstance(a0, Fraction) else complex(c))
    return acc


def expand_root(p: PerturbedPolynomial, a0: Coefficient, order: int) -> PerturbationSolution:
    """Grow the zeroth-order root ``a0`` into an order-``order`` series.

    The branch stays in exact rational mode when ``a0`` is rational
    (int/Fraction) and uses complex floats otherwise.  Raises
    :class:`MultipleRootError` when the pivot ``dPhi/dx(a0, 0)``
    vanishes, which signals a singular branch that needs rescaling.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if isinstance(a0, int):
        a0 = Fraction(a0)
    rational = isinstance(a0, Fraction)
    pivot = _pivot_at(p, a0)
    if rational:
        if pivot == 0:
            raise MultipleRootError("dPhi/dx vanishes exactly at the base root")
    elif abs(pivot) <= SIMPLE_ROOT_TOL:
        raise MultipleRootError(
            "|dPhi/dx| = %.3g at the base root is below the simple-root tolerance"
            % abs(pivot))

    mode = RATIONAL if rational else FLOAT
    coeffs: list[Coefficient] = [a0] + [Fraction(0) if rational else 0j] * order
    for n in range(1, order + 1):
        z = TruncatedSeries(coeffs, mode=mode)
        resid = p.substitute_series(z, order)
        coeffs[n] = -resid.coeffs[n] / pivot
    z = TruncatedSeries(coeffs, mode=mode)

    probe = p.substitute_series(z, 2 * order + 2)
    lead = probe.leading_index()
    leading_order = probe.order + 1 if lead is None else lead
    if leading_order < order + 1:
        raise AlgebraicError(
            "internal failure: residual order %d below %d" % (leading_order, order + 1))
    return PerturbationSolution(problem=p, base_root=a0, series=z,
                                residual_leading_order=leading_order)


def residual_series(p: PerturbedPolynomial, z: TruncatedSeries,
                    order: int) -> TruncatedSeries:
    """Phi(z(eps), eps) as a series of the given order (>= order of z);
    ``z`` is zero-extended to that order first."""
    if order < z.order:
        raise ValueError("residual order must be >= the series order")
    return p.substitute_series(z, order)


# ---------------------------------------------------------------------------
# a posteriori diagnostics


def _as_number(value):
    if isinstance(value, Fraction):
        return float(value)
    return value


def _residual_at(p: PerturbedPolynomial, z: TruncatedSeries, eps: float):
    x = _as_number(z.evaluate(eps))
    return p.evaluate_at(x, eps)


def _check_grid(grid: Sequence[float]):
    if len(grid) < 3:
        raise ValueError("grid needs at least 3 points")
    for e in grid:
        if not e > 0:
            raise ValueError("grid values must be positive")
    for a, b in zip(grid, grid[1:]):
        if not b < a:
            raise ValueError("grid must be strictly decreasing")


def estimate_order(p: PerturbedPolynomial, z: TruncatedSeries,
                   grid: Sequence[float] = DEFAULT_GRID) -> float:
    """Least-squares slope of log|Phi(z(eps), eps)| against log eps.

    A slope near ``N + 1`` confirms that the first ``N + 1`` residual
    coefficients vanish.  Raises :class:`ZeroResidualOnGridError` when a
    sample residual is exactly zero (the series solves the problem on the
    grid, so the slope is undefined).
    """
    _check_grid(grid)
    mags = [abs(_residual_at(p, z, e)) for e in grid]
    if any(m == 0.0 for m in mags):
        raise ZeroResidualOnGridError("residual vanishes on the grid")
    xs = [math.log(e) for e in grid]
    ys = [math.log(m) for m in mags]
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var = sum((u - mean_x) ** 2 for u in xs)
    cov = sum((u - mean_x) * (v - mean_y) for u, v in zip(xs, ys))
    return cov / var


def condition_bound(p: PerturbedPolynomial, z: TruncatedSeries,
                    eps: float, tol: float = SIMPLE_ROOT_TOL) -> tuple[float, float]:
    """First-order error estimate ``(kappa, kappa * |residual|)`` at eps.

    ``kappa = 1/|dPhi/dx(z(eps), eps)|`` converts residual size into
    solution error; the product bounds ``|z - x|`` to first order.
    """
    x = _as_number(z.evaluate(eps))
    deriv = p.derivative_x().evaluate_at(x, eps)
    if abs(deriv) <= tol:
        raise IllConditionedError("|dPhi/dx| = %.3g at eps=%g" % (abs(deriv), eps))
    kappa = 1.0 / abs(deriv)
    return kappa, kappa * abs(p.evaluate_at(x, eps))


def oracle_root(p: PerturbedPolynomial, eps: float, guess: float) -> float:
    """Independent real-root oracle: bracket near ``guess`` by doubling
    steps (cap 60), bisect, then polish with Newton steps; absolute
    accuracy 1e-13."""

    def f(x: float) -> float:
        return _as_number(p.evaluate_at(x, eps))

    fg = f(guess)
    if fg == 0.0:
        return guess
    lo = hi = guess
    flo = fhi = fg
    step = max(0.125, 0.125 * abs(guess))
    bracket = None
    for _ in range(60):
        a, b = guess - step, guess + step
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * flo < 0:
            bracket = (a, guess, fa, flo) if a < guess else (guess, a, flo, fa)
            break
        if fb * fhi < 0:
            bracket = (guess, b, fhi, fb) if guess < b else (b, guess, fb, fhi)
            break
        lo, hi, flo, fhi = a, b, fa, fb
        step *= 2.0
    if bracket is None:
        raise NoBracketFoundError("no sign change within doubling steps of %g" % guess)

    a, b, fa, fb = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a <= 1e-13 or mid in (a, b):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    root = 0.5 * (a + b)

    dphi = p.derivative_x()
    for _ in range(4):
        d = _as_number(dphi.evaluate_at(root, eps))
        if d == 0:
            break
        nxt = root - f(root) / d
        if not (a - 1e-9 <= nxt <= b + 1e-9):
            break
        root = nxt
    return root


def residual_report(p: PerturbedPolynomial, solution: PerturbationSolution,
                    grid: Sequence[float] = DEFAULT_GRID,
                    use_oracle: bool = True) -> ResidualReport:
    """Bundle the symbolic residual, sampled magnitudes, order slope,
    condition bounds and (for real branches) oracle errors."""
    _check_grid(grid)
    z = solution.series
    n = z.order
    resid = residual_series(p, z, 2 * n + 2)
    mags = tuple(abs(_residual_at(p, z, e)) for e in grid)
    try:
        slope: Optional[float] = estimate_order(p, z, grid)
        exact = False
    except ZeroResidualOnGridError:
        slope, exact = None, True
    kappas = []
    bounds = []
    for e in grid:
        k, b = condition_bound(p, z, e)
        kappas.append(k)
        bounds.append(b)

    oracle_errors = None
    base_is_real = (isinstance(solution.base_root, Fraction)
                    or abs(solution.base_root.imag) < 1e-12)
    if use_oracle and base_is_real and solution.laurent_offset == 0:
        try:
            errs = []
            for e in grid:
                zval = _as_number(z.evaluate(e))
                zval = zval.real if isinstance(zval, complex) else zval
                errs.append(abs(zval - oracle_root(p, e, zval)))
            oracle_errors = tuple(errs)
        except NoBracketFoundError:
            oracle_errors = None
    return ResidualReport(residual=resid,
                          residual_leading_order=solution.residual_leading_order,
                          grid=tuple(grid), magnitudes=mags, slope=slope,
                          exact_on_grid=exact, condition_numbers=tuple(kappas),
                          error_bounds=tuple(bounds), oracle_errors=oracle_errors)
