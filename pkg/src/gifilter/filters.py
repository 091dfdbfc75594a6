"""Gaussian moment-matching filter recursion with pluggable integral engines.

One predict/update pair (the standard Gaussian-filter equations) is shared by
all filters; they differ only in how the Gaussian-weighted integrals E[f],
E[f f^T] and E[x f^T] are approximated:

  gif  - exact closed-form moments of the (possibly Taylorized) polynomials
  ekf  - linearization at the mean
  ukf  - 2n+1 symmetric sigma points (kappa parameterization)
  ckf  - 2n cubature points
  ghf  - tensor-product Gauss-Hermite points
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .moments import Gaussian, MomentContext, eig_sym
from .poly import Polynomial, PolyVector
from .taylor import SmoothFn, taylorize

INNOVATION_COND_LIMIT = 1e12


class DegenerateInnovation(RuntimeError):
    """Innovation covariance is numerically singular."""


@dataclass(frozen=True)
class FilterState:
    """Estimate mean and covariance at one time step."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.mean, np.ndarray) and self.mean.ndim == 1):
            object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, float)))
        if not (isinstance(self.cov, np.ndarray) and self.cov.ndim == 2):
            object.__setattr__(self, "cov", np.atleast_2d(np.asarray(self.cov, float)))


class VectorFunction:
    """A vector-valued model function in polynomial and/or smooth form.

    The polynomial form feeds the exact moment engine; the smooth form is
    used directly by the sigma-point engines and the EKF. When only a smooth
    form exists, the polynomial form is a Taylor expansion about the center
    the engine asks for.
    """

    def __init__(
        self,
        polys: PolyVector | None = None,
        smooth: Sequence[SmoothFn] | None = None,
        taylor_order: int = 3,
    ):
        if polys is None and smooth is None:
            raise ValueError("need a polynomial or smooth representation")
        self.polys = polys
        self.smooth = tuple(smooth) if smooth is not None else None
        self.taylor_order = taylor_order
        self._jac_polys = None
        if polys is not None:
            self.dim_in = polys.dim_in
            self.dim_out = len(polys)
        else:
            self.dim_in = self.smooth[0].dim_in
            self.dim_out = len(self.smooth)

    def as_polyvec(self, center: np.ndarray) -> PolyVector:
        if self.polys is not None:
            return self.polys
        return PolyVector(
            [taylorize(f, center, self.taylor_order) for f in self.smooth]
        )

    def eval(self, x: np.ndarray) -> np.ndarray:
        if self.smooth is not None:
            return np.array([f.eval(x) for f in self.smooth])
        return self.polys.eval(x)

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at a batch of points, shape (N, dim_in) -> (N, dim_out)."""
        if self.smooth is not None:
            return np.array([[f.eval(x) for f in self.smooth] for x in X])
        return self.polys.eval_many(X)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        if self.smooth is not None:
            n = self.dim_in
            J = np.empty((self.dim_out, n))
            for j, f in enumerate(self.smooth):
                for i in range(n):
                    alpha = tuple(1 if l == i else 0 for l in range(n))
                    J[j, i] = f.partials(alpha, x)
            return J
        if self._jac_polys is None:
            self._jac_polys = [
                [p.partial(i) for i in range(self.dim_in)] for p in self.polys
            ]
        return np.array(
            [[dp.eval(x) for dp in row] for row in self._jac_polys]
        )


@dataclass
class SystemModel:
    """Process/measurement functions plus noise covariances.

    R may be a matrix or a callable of the predicted mean (state-dependent
    measurement noise).
    """

    process: VectorFunction
    measurement: VectorFunction
    Q: np.ndarray
    R: np.ndarray | Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, float))
        if not callable(self.R):
            self.R = np.atleast_2d(np.asarray(self.R, float))

    def measurement_noise(self, predicted_mean: np.ndarray) -> np.ndarray:
        if callable(self.R):
            return np.atleast_2d(np.asarray(self.R(predicted_mean), float))
        return self.R


def _sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def _cov_sqrt(P: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor, eigen square root as fallback."""
    if P.shape == (1, 1):
        v = P[0, 0]
        if v >= 0.0:
            return np.array([[math.sqrt(v)]])
        return np.array([[math.sqrt(eig_sym(P).d[0])]])
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        basis = eig_sym(P)
        return basis.S * np.sqrt(basis.d)


# -- engines ---------------------------------------------------------------


class MomentEngine:
    """Strategy computing (E[f], E[f f^T], E[x f^T]) under N(mean, cov)."""

    name = "base"

    def moments(self, fn: VectorFunction, mean: np.ndarray, cov: np.ndarray):
        raise NotImplementedError


class GifEngine(MomentEngine):
    """Exact closed-form Gaussian moments of polynomial model functions.

    Smooth functions are re-expanded about the current mean each call.
    """

    name = "gif"

    def __init__(self):
        self._product_cache: dict = {}

    def _products(self, pv: PolyVector):
        """Squares/cross products and x_i*f_j polynomials for one PolyVector.

        Cached by object identity so time-invariant models pay the polynomial
        multiplications once per campaign.
        """
        cached = self._product_cache.get(id(pv))
        if cached is not None and cached[0] is pv:
            return cached[1], cached[2]
        p = len(pv)
        n = pv.dim_in
        pairs = {(j, k): pv[j] * pv[k] for j in range(p) for k in range(j, p)}
        cross = {
            (i, j): Polynomial.variable(n, i) * pv[j]
            for i in range(n)
            for j in range(p)
        }
        if len(self._product_cache) > 64:
            self._product_cache.clear()
        self._product_cache[id(pv)] = (pv, pairs, cross)
        return pairs, cross

    def moments(self, fn, mean, cov):
        ctx = MomentContext(mean=mean, cov=cov)
        pv = fn.as_polyvec(mean)
        pairs, cross = self._products(pv)
        p = len(pv)
        n = len(mean)
        Ef = np.array([ctx.poly(q) for q in pv])
        Eff = np.empty((p, p))
        for (j, k), poly in pairs.items():
            Eff[j, k] = Eff[k, j] = ctx.poly(poly)
        Exf = np.empty((n, p))
        for (i, j), poly in cross.items():
            Exf[i, j] = ctx.poly(poly)
        return Ef, Eff, Exf


class EkfEngine(MomentEngine):
    """First-order linearization at the mean."""

    name = "ekf"

    def moments(self, fn, mean, cov):
        f0 = fn.eval(mean)
        J = fn.jacobian(mean)
        Ef = f0
        Eff = np.outer(f0, f0) + J @ cov @ J.T
        Exf = np.outer(mean, f0) + cov @ J.T
        return Ef, Eff, Exf


class SigmaPointEngine(MomentEngine):
    """Common machinery for deterministic sample-point rules."""

    def points_weights(self, mean, cov):
        raise NotImplementedError

    def moments(self, fn, mean, cov):
        X, w = self.points_weights(mean, cov)
        F = fn.eval_many(X)
        wF = w[:, None] * F
        Ef = wF.sum(axis=0)
        Eff = F.T @ wF
        Exf = X.T @ wF
        return Ef, _sym(Eff), Exf


class UkfEngine(SigmaPointEngine):
    """Symmetric 2n+1 sigma points; kappa defaults to 3 - n."""

    name = "ukf"

    def __init__(self, kappa: float | None = None):
        self.kappa = kappa
        self._weights: dict = {}

    def points_weights(self, mean, cov):
        n = len(mean)
        kappa = 3.0 - n if self.kappa is None else self.kappa
        if kappa <= -n:
            raise ValueError(f"kappa must exceed -n, got {kappa}")
        A = _cov_sqrt((n + kappa) * cov)
        X = np.empty((2 * n + 1, n))
        X[0] = mean
        X[1 : n + 1] = mean + A.T
        X[n + 1 :] = mean - A.T
        w = self._weights.get(n)
        if w is None:
            w = np.full(2 * n + 1, 1.0 / (2.0 * (n + kappa)))
            w[0] = kappa / (n + kappa)
            self._weights[n] = w
        return X, w


class CkfEngine(SigmaPointEngine):
    """2n cubature points at mean +/- sqrt(n) * sqrt(P) columns."""

    name = "ckf"

    def __init__(self):
        self._weights: dict = {}

    def points_weights(self, mean, cov):
        n = len(mean)
        A = _cov_sqrt(cov) * math.sqrt(n)
        X = np.empty((2 * n, n))
        X[:n] = mean + A.T
        X[n:] = mean - A.T
        w = self._weights.get(n)
        if w is None:
            w = np.full(2 * n, 1.0 / (2.0 * n))
            self._weights[n] = w
        return X, w


class GhfEngine(SigmaPointEngine):
    """Tensor-product Gauss-Hermite rule mapped through sqrt(P)."""

    name = "ghf"

    def __init__(self, points_per_axis: int = 3):
        if points_per_axis < 2:
            raise ValueError("GHF needs at least 2 points per axis")
        self.points_per_axis = points_per_axis
        t, w = np.polynomial.hermite.hermgauss(points_per_axis)
        self._nodes_1d = t * math.sqrt(2.0)
        self._weights_1d = w / math.sqrt(math.pi)
        self._templates: dict = {}

    def _template(self, n: int):
        cached = self._templates.get(n)
        if cached is not None:
            return cached
        grids = np.meshgrid(*([self._nodes_1d] * n), indexing="ij")
        Z = np.stack([g.ravel() for g in grids], axis=1)
        wgrids = np.meshgrid(*([self._weights_1d] * n), indexing="ij")
        w = np.ones(Z.shape[0])
        for g in wgrids:
            w = w * g.ravel()
        self._templates[n] = (Z, w)
        return Z, w

    def points_weights(self, mean, cov):
        n = len(mean)
        Z, w = self._template(n)
        A = _cov_sqrt(cov)
        X = mean + Z @ A.T
        return X, w


ENGINES = {
    "gif": GifEngine,
    "ekf": EkfEngine,
    "ukf": UkfEngine,
    "ckf": CkfEngine,
    "ghf": GhfEngine,
}


def make_engine(name: str, **kwargs) -> MomentEngine:
    try:
        cls = ENGINES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown filter '{name}' (choose from {sorted(ENGINES)})")
    return cls(**kwargs)


# -- recursion -------------------------------------------------------------


def _check_innovation(Pyy: np.ndarray) -> None:
    """Reject singular / indefinite innovation covariances.

    Condition number is taken as the symmetric-eigenvalue ratio; a
    non-positive smallest eigenvalue counts as singular.
    """
    if Pyy.shape == (1, 1):
        lo = hi = Pyy[0, 0]
    else:
        w = np.linalg.eigvalsh(Pyy)
        lo, hi = w[0], w[-1]
    if lo <= 0.0 or hi / lo > INNOVATION_COND_LIMIT:
        raise DegenerateInnovation(
            f"degenerate innovation covariance (cond > {INNOVATION_COND_LIMIT:g})"
        )


def predict(state: FilterState, model: SystemModel, engine: MomentEngine) -> FilterState:
    """Time update: prior mean E[phi] and covariance E[phi phi^T] - m m^T + Q."""
    Ef, Eff, _ = engine.moments(model.process, state.mean, state.cov)
    mean = Ef
    cov = _sym(Eff - np.outer(mean, mean) + model.Q)
    return FilterState(mean, cov)


def update(
    prior: FilterState,
    model: SystemModel,
    engine: MomentEngine,
    y: np.ndarray,
    joseph: bool = False,
) -> FilterState:
    """Measurement update via the Kalman gain K = Pxy Pyy^-1."""
    y = np.atleast_1d(np.asarray(y, float))
    R = model.measurement_noise(prior.mean)
    Ef, Eff, Exf = engine.moments(model.measurement, prior.mean, prior.cov)
    yhat = Ef
    if yhat.shape == (1,):
        # scalar-measurement path, same equations without matrix plumbing
        pyy = Eff[0, 0] - yhat[0] * yhat[0] + R[0, 0]
        pxy = Exf[:, 0] - prior.mean * yhat[0]
        # rounding residual from the near-cancelling difference above; below
        # this, the innovation carries no information (noise-free degenerate
        # limit) and the prior passes through with zero gain
        pyy_tol = 1e-14 * max(abs(Eff[0, 0]) + yhat[0] * yhat[0] + abs(R[0, 0]), 1.0)
        if abs(pyy) <= pyy_tol:
            return prior
        if pyy <= 0.0:
            raise DegenerateInnovation("degenerate innovation covariance")
        k = pxy / pyy
        mean = prior.mean + k * (y[0] - yhat[0])
        cov = prior.cov - pyy * np.outer(k, k)
        return FilterState(mean, _sym(cov))
    Pyy = _sym(Eff - np.outer(yhat, yhat) + R)
    Pxy = Exf - np.outer(prior.mean, yhat)
    if not np.any(Pyy):
        return prior
    _check_innovation(Pyy)
    K = np.linalg.solve(Pyy.T, Pxy.T).T
    mean = prior.mean + K @ (y - yhat)
    if joseph:
        # symmetric-by-construction rearrangement of P - K Pyy K^T
        cov = prior.cov - K @ Pxy.T - Pxy @ K.T + K @ Pyy @ K.T
    else:
        cov = prior.cov - K @ Pyy @ K.T
    return FilterState(mean, _sym(cov))
