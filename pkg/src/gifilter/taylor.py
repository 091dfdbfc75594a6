"""Polynomialization of smooth functions by Taylor expansion.

Model functions that are not already polynomial are expanded around a chosen
center (in filtering, the current predicted mean) and handed to the exact
moment machinery as ordinary polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .poly import Polynomial


@dataclass(frozen=True)
class SmoothFn:
    """A scalar function with point evaluations and partial derivatives.

    ``partials(alpha, point)`` returns the mixed partial of multi-index
    ``alpha`` at ``point``; the zero multi-index must agree with ``eval``.
    """

    dim_in: int
    eval: Callable[[np.ndarray], float]
    partials: Callable[[tuple, np.ndarray], float]
    max_order: int = 3

    def __call__(self, x) -> float:
        return self.eval(np.asarray(x, dtype=float))


def multi_indices(dim: int, max_total: int):
    """All multi-indices alpha in N^dim with |alpha| <= max_total."""
    for total in range(max_total + 1):
        for alpha in _indices_of_total(dim, total):
            yield alpha


def _indices_of_total(dim: int, total: int):
    if dim == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _indices_of_total(dim - 1, total - first):
            yield (first,) + rest


def taylorize(f: SmoothFn, center: Sequence[float], order: int) -> Polynomial:
    """Degree-``order`` Taylor polynomial of f about ``center``.

    The result is expanded into monomials in x itself (not x - center), so it
    can be consumed directly by the moment engine.
    """
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    if order > f.max_order:
        raise ValueError(f"order {order} exceeds available derivatives ({f.max_order})")
    center = np.asarray(center, dtype=float)
    if center.shape != (f.dim_in,):
        raise ValueError(f"center of shape {center.shape} for dim_in {f.dim_in}")
    terms: dict[tuple, float] = {}
    for alpha in multi_indices(f.dim_in, order):
        deriv = f.partials(alpha, center)
        if deriv == 0.0:
            continue
        fact = 1.0
        for a in alpha:
            fact *= math.factorial(a)
        terms[alpha] = terms.get(alpha, 0.0) + deriv / fact
    in_z = Polynomial(f.dim_in, terms)  # polynomial in z = x - center
    return in_z.shift(-center)


# --------------------------------------------------------------------------
# Finite-difference fallback for functions without analytic partials.

_EPS = np.finfo(float).eps


def _fd_step(coord: float, order: int) -> float:
    return max(abs(coord), 1.0) * _EPS ** (1.0 / (order + 2))


def _fd_axis(f: Callable, x: np.ndarray, axis: int, k: int, h: float) -> float:
    """Central-difference k-th derivative along one axis, k <= 3."""

    def at(offset):
        y = x.copy()
        y[axis] += offset
        v = f(y)
        if not np.isfinite(v):
            raise ValueError(f"non-finite evaluation at {y}")
        return v

    if k == 0:
        return at(0.0)
    if k == 1:
        return (at(h) - at(-h)) / (2.0 * h)
    if k == 2:
        return (at(h) - 2.0 * at(0.0) + at(-h)) / h**2
    if k == 3:
        return (at(2 * h) - 2.0 * at(h) + 2.0 * at(-h) - at(-2 * h)) / (2.0 * h**3)
    raise ValueError(f"finite differences support order <= 3, got {k}")


def finite_diff_partials(
    f_eval: Callable[[np.ndarray], float], point: Sequence[float], order: int
) -> dict:
    """Central finite-difference partials up to total order <= 3.

    Returns {alpha: estimate} for every multi-index with |alpha| <= order.
    Mixed partials nest the one-axis stencils.
    """
    if order > 3:
        raise ValueError(f"finite differences support order <= 3, got {order}")
    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    out: dict[tuple, float] = {}
    for alpha in multi_indices(dim, order):
        total = sum(alpha)

        def deriv(f, x, remaining):
            axis = next((i for i, a in enumerate(remaining) if a > 0), None)
            if axis is None:
                v = f(x)
                if not np.isfinite(v):
                    raise ValueError(f"non-finite evaluation at {x}")
                return v
            k = remaining[axis]
            rest = list(remaining)
            rest[axis] = 0
            rest = tuple(rest)
            h = _fd_step(point[axis], total)
            if all(a == 0 for a in rest):
                return _fd_axis(f, x, axis, k, h)

            def g(y):
                return deriv(f, y, rest)

            return _fd_axis(g, x, axis, k, h)

        out[alpha] = deriv(f_eval, point.copy(), alpha)
    return out


def smooth_from_eval(
    f_eval: Callable[[np.ndarray], float], dim_in: int, max_order: int = 3
) -> SmoothFn:
    """Wrap a bare evaluator with finite-difference partials."""

    def partials(alpha, x):
        return finite_diff_partials(f_eval, x, sum(alpha))[tuple(alpha)]

    return SmoothFn(dim_in=dim_in, eval=f_eval, partials=partials, max_order=max_order)
