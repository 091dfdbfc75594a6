"""Sparse multivariate polynomials with real coefficients.

Terms are stored in a dict keyed by exponent tuple, so the representation is
canonical: like terms are merged on construction and exact zeros are dropped.
Polynomials are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

# Coefficients below this magnitude are true zeros (underflow of an exact 0),
# not small numbers worth keeping; numeric pruning would perturb moment values.
_ZERO_TOL = 1e-300


class DimensionMismatch(ValueError):
    """Operands or evaluation points disagree on the number of variables."""


class Polynomial:
    """Sparse polynomial in ``dim`` variables.

    Parameters
    ----------
    dim : number of variables n; exponent tuples have this length.
    terms : mapping from exponent tuple to coefficient. Merged and
        zero-stripped on construction.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[tuple, float] | None = None):
        if dim < 1:
            raise ValueError(f"polynomial dimension must be >= 1, got {dim}")
        merged: dict[tuple, float] = {}
        for expo, coef in (terms or {}).items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != dim:
                raise DimensionMismatch(
                    f"exponent tuple {expo} has length {len(expo)}, expected {dim}"
                )
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")
            merged[expo] = merged.get(expo, 0.0) + float(coef)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(
            self, "terms", {e: c for e, c in merged.items() if abs(c) > _ZERO_TOL}
        )

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, dim: int, c: float) -> "Polynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, dim: int, i: int) -> "Polynomial":
        """The monomial x_i (0-based index)."""
        expo = [0] * dim
        expo[i] = 1
        return cls(dim, {tuple(expo): 1.0})

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(dim, {})

    # -- algebra ------------------------------------------------------------

    def _check_dim(self, other: "Polynomial") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dim {self.dim} != dim {other.dim}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dim, other)
        self._check_dim(other)
        terms = dict(self.terms)
        for expo, coef in other.terms.items():
            terms[expo] = terms.get(expo, 0.0) + coef
        return Polynomial(self.dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(
                self.dim, {e: c * other for e, c in self.terms.items()}
            )
        self._check_dim(other)
        terms: dict[tuple, float] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                expo = tuple(a + b for a, b in zip(ea, eb))
                terms[expo] = terms.get(expo, 0.0) + ca * cb
        return Polynomial(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.dim, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    # -- queries ------------------------------------------------------------

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def __call__(self, x: Sequence[float]) -> float:
        return self.eval(x)

    def eval(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(
                f"point of length {x.shape} for polynomial in {self.dim} variables"
            )
        total = 0.0
        for expo, coef in self.terms.items():
            v = coef
            for xi, e in zip(x, expo):
                if e:
                    v *= xi**e
            total += v
        return total

    def shift(self, c: Sequence[float]) -> "Polynomial":
        """Return q with q(x) = p(x + c)."""
        c = np.asarray(c, dtype=float)
        if c.shape != (self.dim,):
            raise DimensionMismatch(
                f"shift vector of length {c.shape} for polynomial in {self.dim} variables"
            )
        out = Polynomial.zero(self.dim)
        for expo, coef in self.terms.items():
            # expand prod_i (x_i + c_i)^{e_i} via univariate binomials
            term = Polynomial.constant(self.dim, coef)
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                xi = Polynomial.variable(self.dim, i)
                term = term * (xi + float(c[i])) ** e
            out = out + term
        return out

    def partial(self, i: int) -> "Polynomial":
        """Partial derivative with respect to x_i."""
        terms: dict[tuple, float] = {}
        for expo, coef in self.terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + coef * expo[i]
        return Polynomial(self.dim, terms)

    def __repr__(self):
        return f"Polynomial({self.dim}, {self.format()!r})"

    def format(self) -> str:
        """Debug rendering like '1.05*x1 - 0.05*x1^3'. Not a parse format."""
        if not self.terms:
            return "0"
        parts = []
        for expo in sorted(self.terms, key=lambda e: (sum(e), e)):
            coef = self.terms[expo]
            factors = [
                f"x{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(expo)
                if e > 0
            ]
            mag = f"{abs(coef):g}"
            if factors:
                body = "*".join(factors)
                piece = body if math.isclose(abs(coef), 1.0) else f"{mag}*{body}"
            else:
                piece = mag
            sign = "-" if coef < 0 else "+"
            parts.append((sign, piece))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, piece in parts[1:]:
            out += f" {sign} {piece}"
        return out


class PolyVector:
    """Ordered list of polynomials sharing one input dimension."""

    __slots__ = ("dim_in", "components")

    def __init__(self, components: Iterable[Polynomial]):
        components = tuple(components)
        if not components:
            raise ValueError("PolyVector needs at least one component")
        dim = components[0].dim
        for p in components:
            if p.dim != dim:
                raise DimensionMismatch("components disagree on input dimension")
        object.__setattr__(self, "dim_in", dim)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("PolyVector is immutable")

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, j):
        return self.components[j]

    def eval(self, x: Sequence[float]) -> np.ndarray:
        return np.array([p.eval(x) for p in self.components])

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at a batch of points, shape (N, dim_in) -> (N, len)."""
        X = np.asarray(X, dtype=float)
        out = np.zeros((X.shape[0], len(self.components)))
        for j, p in enumerate(self.components):
            acc = out[:, j]
            for expo, coef in p.terms.items():
                term = np.full(X.shape[0], coef)
                for i, e in enumerate(expo):
                    if e == 1:
                        term = term * X[:, i]
                    elif e:
                        term = term * X[:, i] ** e
                acc += term
        return out

    def jacobian(self, x: Sequence[float]) -> np.ndarray:
        """Matrix of partials d component_j / d x_i, shape (len, dim_in)."""
        return np.array(
            [[p.partial(i).eval(x) for i in range(self.dim_in)] for p in self.components]
        )
