"""Exact Gaussian-weighted moments of polynomials.

The closed form: diagonalize the covariance, substitute x = mu + S y, expand
each factor (mu_i + sum_l S_il y_l)^{m_i} multinomially, and reduce every
surviving term to a product of univariate even central moments. Monomials of
any degree and dimension are handled exactly, subject only to a combinatorial
cap on the enumeration size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .poly import DimensionMismatch, Polynomial

# Enumeration size above which expect_monomial refuses to run (fail loudly
# rather than hang; the term count is prod_i C(m_i + n, n)).
COMPOSITION_CAP = 10**7

_SYM_TOL = 1e-9
_EIG_NEG_TOL = 1e-9


class NotPSDError(ValueError):
    """Covariance has an eigenvalue below the negative tolerance."""


class CombinatorialCapError(ValueError):
    """Moment enumeration would exceed the term-count cap."""


def _check_symmetric(P: np.ndarray, tol: float = _SYM_TOL) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"covariance must be square, got shape {P.shape}")
    scale = max(np.abs(P).max(), 1e-300)
    if np.abs(P - P.T).max() > tol * scale:
        raise ValueError("covariance is not symmetric within tolerance")
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class Gaussian:
    """Mean vector and symmetric PSD covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        cov = _check_symmetric(cov)
        if cov.shape[0] != mean.shape[0]:
            raise DimensionMismatch(
                f"mean of length {mean.shape[0]} with cov {cov.shape}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class EigenBasis:
    """Orthogonal eigenvectors S (det +1) and eigenvalues d of a covariance."""

    S: np.ndarray
    d: np.ndarray


def eig_sym(P: np.ndarray, floor: float = 0.0) -> EigenBasis:
    """Diagonalize a symmetric PSD matrix.

    Eigenvalues in (-tol, 0) are clamped to zero, where tol is 1e-9 scaled
    by max(trace, 1) so that covariances computed as near-cancelling
    differences of O(1) quantities still pass; anything more negative raises
    NotPSDError. With ``floor`` > 0 the clamped eigenvalues are additionally
    floored at floor*max(d_max, 1), which filters use to keep a usable
    covariance.
    """
    P = _check_symmetric(P)
    d, S = np.linalg.eigh(P)
    tr = max(np.trace(P), 0.0)
    neg_tol = _EIG_NEG_TOL * max(tr, 1.0)
    if d[0] < -neg_tol:
        raise NotPSDError(f"covariance not PSD: eigenvalue {d[0]:.3e}")
    d = np.where(d < 0.0, 0.0, d)
    if floor > 0.0:
        d = np.maximum(d, floor * max(d.max(initial=0.0), 1.0))
    # eigh returns ascending eigenvalues; make det(S) = +1 by convention
    if np.linalg.det(S) < 0.0:
        S = S.copy()
        S[:, -1] = -S[:, -1]
    return EigenBasis(S=S, d=d)


def gauss_integral_1d(m: int, d: float) -> float:
    """Unnormalized integral of y^m * exp(-y^2 / (2 d)) over the real line."""
    if d <= 0:
        raise ValueError(f"scale d must be positive, got {d}")
    if m < 0:
        raise ValueError(f"exponent must be non-negative, got {m}")
    if m % 2 == 1:
        return 0.0
    return (2.0 * d) ** ((m + 1) / 2.0) * math.gamma((m + 1) / 2.0)


def central_moment_1d(k: int, d: float) -> float:
    """E[y^k] for y ~ N(0, d); 0 for odd k, (k-1)!! d^(k/2) for even k."""
    if k % 2 == 1:
        return 0.0
    if k == 0:
        return 1.0
    if d == 0.0:
        return 0.0
    if k < 20:
        return _double_factorial(k - 1) * d ** (k // 2)
    # log-gamma route avoids overflow of (k-1)!! for large k
    log_val = (k / 2.0) * math.log(2.0 * d) + math.lgamma((k + 1) / 2.0) - 0.5 * math.log(math.pi)
    return math.exp(log_val)


@lru_cache(maxsize=None)
def _double_factorial(k: int) -> float:
    out = 1.0
    while k > 1:
        out *= k
        k -= 2
    return out


@lru_cache(maxsize=None)
def compositions(m: int, parts: int) -> tuple:
    """All splits of m into `parts` non-negative ordered integers."""
    if parts == 1:
        return ((m,),)
    out = []
    for first in range(m + 1):
        for rest in compositions(m - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


def composition_count(m: Sequence[int], n: int) -> int:
    """Number of terms expect_monomial enumerates for exponents m in R^n."""
    total = 1
    for mi in m:
        total *= math.comb(mi + n, n)
    return total


@lru_cache(maxsize=None)
def _weighted_compositions(m: int, n: int) -> tuple:
    """Compositions of m into n+1 parts with their multinomial coefficients."""
    out = []
    for combo in compositions(m, n + 1):
        c = math.factorial(m)
        for a in combo:
            c //= math.factorial(a)
        out.append((combo, float(c)))
    return tuple(out)


def expect_monomial(
    m: Sequence[int], g: Gaussian, basis: EigenBasis | None = None
) -> float:
    """Exact E[prod_i x_i^{m_i}] under the Gaussian g.

    Enumerates, per variable i, all compositions of m_i into n+1 parts
    (one slot for mu_i, one per eigen-direction), multiplies in the
    multinomial coefficient, and closes each term with the product of
    univariate even central moments along the eigen-axes.
    """
    m = tuple(int(e) for e in m)
    n = g.dim
    if len(m) != n:
        raise DimensionMismatch(f"exponents {m} for a {n}-dimensional Gaussian")
    if any(e < 0 for e in m):
        raise ValueError(f"negative exponent in {m}")
    if composition_count(m, n) > COMPOSITION_CAP:
        raise CombinatorialCapError(
            f"enumeration of {composition_count(m, n)} terms exceeds cap {COMPOSITION_CAP}"
        )
    if basis is None:
        basis = eig_sym(g.cov)
    mu, S, d = g.mean, basis.S, basis.d

    # Fold one variable at a time, merging terms that land on the same
    # aggregate y-power vector so the state count stays polynomial even when
    # the raw composition product is large.
    states: dict[tuple, float] = {(0,) * n: 1.0}
    for i, mi in enumerate(m):
        if mi == 0:
            continue
        options = []
        for combo, c in _weighted_compositions(mi, n):
            w = c * mu[i] ** combo[0]
            for l in range(n):
                a = combo[l + 1]
                if a:
                    w *= S[i, l] ** a
            if w != 0.0:
                options.append((combo[1:], w))
        merged: dict[tuple, float] = {}
        for k, wk in states.items():
            for powers, wi in options:
                key = tuple(kl + pl for kl, pl in zip(k, powers))
                merged[key] = merged.get(key, 0.0) + wk * wi
        states = merged

    total = 0.0
    for k, w in states.items():
        if any(kl % 2 for kl in k):
            continue
        for l in range(n):
            w *= central_moment_1d(k[l], d[l])
            if w == 0.0:
                break
        total += w
    return total


def expect_poly(
    p: Polynomial, g: Gaussian, basis: EigenBasis | None = None
) -> float:
    """Exact E[p(x)] under the Gaussian g, by linearity over monomials."""
    if p.dim != g.dim:
        raise DimensionMismatch(f"polynomial dim {p.dim} vs Gaussian dim {g.dim}")
    if basis is None:
        basis = eig_sym(g.cov)
    return sum(
        coef * expect_monomial(expo, g, basis) for expo, coef in p.terms.items()
    )


class MomentContext:
    """Caches monomial expectations for one (mean, covariance) pair.

    One context per filter step; repeated monomials across E[f], E[f f^T] and
    E[x f^T] are each evaluated once, and the per-variable composition tables
    are shared between monomials. Accepts a Gaussian or raw mean/cov arrays.
    """

    __slots__ = ("mean", "S", "d", "_cache", "_options", "_central")

    def __init__(self, g: Gaussian | None = None, basis: EigenBasis | None = None,
                 mean: np.ndarray | None = None, cov: np.ndarray | None = None):
        if g is not None:
            mean, cov = g.mean, g.cov
        else:
            mean = np.asarray(mean, dtype=float)
            cov = np.asarray(cov, dtype=float)
        n = mean.shape[0]
        if basis is None:
            if n == 1:
                basis = EigenBasis(S=np.ones((1, 1)), d=np.array([max(cov[0, 0], 0.0)]))
            else:
                basis = eig_sym(cov)
        self.mean = mean
        self.S = basis.S
        self.d = basis.d
        self._cache: dict = {}
        self._options: dict = {}
        self._central: list = [[1.0] for _ in range(n)]

    @property
    def basis(self) -> EigenBasis:
        return EigenBasis(S=self.S, d=self.d)

    def _central_moment(self, axis: int, k: int) -> float:
        table = self._central[axis]
        while len(table) <= k:
            table.append(central_moment_1d(len(table), self.d[axis]))
        return table[k]

    def _var_options(self, i: int, mi: int) -> tuple:
        """(y-power tuple, weight) choices for the factor x_i^{mi}."""
        key = (i, mi)
        opts = self._options.get(key)
        if opts is not None:
            return opts
        n = self.mean.shape[0]
        if mi == 0:
            opts = (((0,) * n, 1.0),)
        else:
            built = []
            for combo, c in _weighted_compositions(mi, n):
                w = c * self.mean[i] ** combo[0]
                for l in range(n):
                    a = combo[l + 1]
                    if a:
                        w *= self.S[i, l] ** a
                if w != 0.0:
                    built.append((combo[1:], w))
            opts = tuple(built)
        self._options[key] = opts
        return opts

    def monomial(self, expo: tuple) -> float:
        v = self._cache.get(expo)
        if v is not None:
            return v
        n = self.mean.shape[0]
        if composition_count(expo, n) > COMPOSITION_CAP:
            raise CombinatorialCapError(
                f"enumeration of {composition_count(expo, n)} terms exceeds cap "
                f"{COMPOSITION_CAP}"
            )
        if n == 1:
            v = self._monomial_1d(expo[0])
        else:
            per_var = [self._var_options(i, mi) for i, mi in enumerate(expo)]
            total = 0.0
            for choice in itertools.product(*per_var):
                w = 1.0
                k = [0] * n
                for powers, wi in choice:
                    w *= wi
                    for l in range(n):
                        k[l] += powers[l]
                for l in range(n):
                    if k[l] % 2:
                        w = 0.0
                        break
                    w *= self._central_moment(l, k[l])
                    if w == 0.0:
                        break
                total += w
            v = total
        self._cache[expo] = v
        return v

    def _monomial_1d(self, m: int) -> float:
        # binomial split of (mu + y)^m into mu^{m-j} E[y^j]
        mu = self.mean[0]
        total = 0.0
        for j in range(0, m + 1, 2):
            total += math.comb(m, j) * mu ** (m - j) * self._central_moment(0, j)
        return total

    def poly(self, p: Polynomial) -> float:
        mono = self.monomial
        return sum(coef * mono(expo) for expo, coef in p.terms.items())


# --------------------------------------------------------------------------
# Independent oracles (test support): tensor Gauss-Hermite quadrature and the
# Isserlis/Wick moment recursion. Kept free of the closed-form path above.

_ORACLE_MAX_DEGREE = 12
_ORACLE_MAX_DIM = 4


def _gh_moment(m: tuple, g: Gaussian) -> float:
    degree = sum(m)
    nodes_per_axis = max(1, math.ceil((degree + 1) / 2))
    t, w = np.polynomial.hermite.hermgauss(nodes_per_axis)
    basis = eig_sym(g.cov)
    scale = np.sqrt(2.0 * basis.d)
    n = g.dim
    total = 0.0
    for idx in itertools.product(range(nodes_per_axis), repeat=n):
        y = scale * t[list(idx)]
        x = g.mean + basis.S @ y
        fx = 1.0
        for xi, mi in zip(x, m):
            fx *= xi**mi
        weight = 1.0
        for i in idx:
            weight *= w[i]
        total += weight * fx
    return total / math.pi ** (n / 2.0)


def _isserlis_moment(m: tuple, g: Gaussian) -> float:
    mu, P = g.mean, g.cov

    memo: dict[tuple, float] = {}

    def rec(expo: tuple) -> float:
        if all(e == 0 for e in expo):
            return 1.0
        v = memo.get(expo)
        if v is not None:
            return v
        j = next(i for i, e in enumerate(expo) if e > 0)
        rest = list(expo)
        rest[j] -= 1
        rest = tuple(rest)
        # E[x_j * x^rest] = mu_j E[x^rest] + sum_i rest_i P_ji E[x^(rest - e_i)]
        v = mu[j] * rec(rest)
        for i, e in enumerate(rest):
            if e > 0:
                lower = list(rest)
                lower[i] -= 1
                v += e * P[j, i] * rec(tuple(lower))
        memo[expo] = v
        return v

    return rec(m)


def oracle_moment(m: Sequence[int], g: Gaussian) -> float:
    """E[prod x_i^{m_i}] via two independent routes; asserts they agree.

    Route (a) is tensor-product Gauss-Hermite quadrature in the eigenbasis
    with enough nodes to be exact at the monomial's degree; route (b) is the
    Isserlis/Wick recursion. Returns (a).
    """
    m = tuple(int(e) for e in m)
    if len(m) != g.dim:
        raise DimensionMismatch(f"exponents {m} for a {g.dim}-dimensional Gaussian")
    if sum(m) > _ORACLE_MAX_DEGREE or g.dim > _ORACLE_MAX_DIM:
        raise ValueError(
            f"oracle caps exceeded: degree {sum(m)} (max {_ORACLE_MAX_DEGREE}), "
            f"dim {g.dim} (max {_ORACLE_MAX_DIM})"
        )
    a = _gh_moment(m, g)
    b = _isserlis_moment(m, g)
    if abs(a - b) > 1e-9 * (1.0 + abs(a)):
        raise AssertionError(
            f"oracle disagreement for m={m}: quadrature {a!r} vs Isserlis {b!r}"
        )
    return a
