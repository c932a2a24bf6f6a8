"""Pointwise factorization on finite discrete spaces and diagonal algebras.

On a zero-dimensional (here: finite) space the perturbed product splits
point by point with modulus delta(eps) = eps**2/4.  The module also provides
the exact jointly-non-degenerate approximation of products and the weighted
diagonal unitisation whose openness is driven by the inversion scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PerturbationTooLarge, PreconditionViolated
from .functions import FiniteSpaceFunction


def scalar_factor(x: complex, y: complex, w: complex, eps: float) -> tuple[complex, complex]:
    """x', y' with x'*y' = x*y + w and |x'-x|, |y'-y| <= eps, for |w| <= eps**2/4.

    If either factor has modulus at least |w|/eps, the perturbation is divided
    into the partner of the larger factor; otherwise both factors are tiny and
    the whole product x*y + w is split between two equal square roots.
    """
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    if abs(w) > 0.25 * eps * eps * (1.0 + 1e-12):
        raise PerturbationTooLarge(
            "perturbation exceeds eps^2/4",
            bound="|w| <= eps^2/4", value=abs(w), limit=0.25 * eps * eps,
        )
    if w == 0:
        return x, y
    if max(abs(x), abs(y)) >= abs(w) / eps:
        if abs(x) >= abs(y):
            return x, y + w / x
        return x + w / y, y
    root = complex(np.sqrt(complex(x * y + w)))
    return root, root


def open_mult_finite(
    a: FiniteSpaceFunction, b: FiniteSpaceFunction, d: FiniteSpaceFunction, eps: float
) -> tuple[FiniteSpaceFunction, FiniteSpaceFunction]:
    """Pointwise application of scalar_factor: a'*b' = a*b + d node-wise."""
    if a.n != b.n or a.n != d.n:
        raise PreconditionViolated("a, b, d must have the same number of points")
    supd = float(np.max(np.abs(d.values)))
    if supd > 0.25 * eps * eps * (1.0 + 1e-12):
        raise PerturbationTooLarge(
            "perturbation exceeds eps^2/4",
            bound="sup|d| <= eps^2/4", value=supd, limit=0.25 * eps * eps,
        )
    out_a = np.empty(a.n, dtype=np.complex128)
    out_b = np.empty(a.n, dtype=np.complex128)
    for i in range(a.n):
        out_a[i], out_b[i] = scalar_factor(
            complex(a.values[i]), complex(b.values[i]), complex(d.values[i]), eps
        )
    return FiniteSpaceFunction(out_a), FiniteSpaceFunction(out_b)


def nondeg_approx(
    f: FiniteSpaceFunction, g: FiniteSpaceFunction, eps: float
) -> tuple[FiniteSpaceFunction, FiniteSpaceFunction]:
    """Jointly non-degenerate f', g' with f'*g' = f*g bit-exactly.

    Points are classified by priority: keep both values where |f| >= eps/3,
    else where |g| >= eps/3; at the remaining points the pair is replaced by
    (s, f*g/s).  The scale s is eps/2 when the product vanishes there, and
    otherwise the largest power of two not exceeding eps/2, so that dividing
    and re-multiplying by s is exact in binary floating point.
    """
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    if f.n != g.n:
        raise PreconditionViolated("f and g must have the same number of points")
    cut = eps / 3.0
    pow2 = math.ldexp(1.0, math.frexp(eps / 2.0)[1] - 1)  # largest power of two <= eps/2
    fp = np.array(f.values)
    gp = np.array(g.values)
    prods = f.values * g.values  # the same vectorized product the verifier sees
    for i in range(f.n):
        if abs(fp[i]) >= cut or abs(gp[i]) >= cut:
            continue
        prod = complex(prods[i])
        if prod == 0:
            fp[i] = eps / 2.0
            gp[i] = 0j
        else:
            fp[i] = pow2
            gp[i] = prod / pow2
    return FiniteSpaceFunction(fp), FiniteSpaceFunction(gp)


# ---------------------------------------------------------------------------
# Weighted diagonal unitisation


@dataclass(frozen=True)
class DiagonalAlgebraElement:
    """lambda*1 + sum coords[i]*e_i in the unitisation of a weighted diagonal
    algebra; the norm is |scalar| + sum(weights * |coords|)."""

    scalar: complex
    coords: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.complex128).copy()
        weights = np.asarray(self.weights, dtype=np.float64).copy()
        if coords.shape != weights.shape or coords.ndim != 1:
            raise ValueError("coords and weights must be matching vectors")
        if weights.size and float(np.min(weights)) <= 0.0:
            raise ValueError("weights must be strictly positive")
        coords.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "scalar", complex(self.scalar))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weights", weights)

    def norm(self) -> float:
        return abs(self.scalar) + float(np.sum(self.weights * np.abs(self.coords)))

    def embed(self) -> FiniteSpaceFunction:
        """Gelfand transform: value scalar + coords[i] at each point, and the
        bare scalar at the point at infinity."""
        return FiniteSpaceFunction(np.concatenate([self.scalar + self.coords, [self.scalar]]))

    def _like(self, scalar, coords) -> "DiagonalAlgebraElement":
        return DiagonalAlgebraElement(scalar, coords, self.weights)

    def __add__(self, other):
        self._check(other)
        return self._like(self.scalar + other.scalar, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.scalar - other.scalar, self.coords - other.coords)

    def __mul__(self, other):
        if isinstance(other, DiagonalAlgebraElement):
            self._check(other)
            return self._like(
                self.scalar * other.scalar,
                self.scalar * other.coords + other.scalar * self.coords + self.coords * other.coords,
            )
        return self._like(self.scalar * other, self.coords * other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return self._like(-self.scalar, -self.coords)

    def conj(self) -> "DiagonalAlgebraElement":
        return self._like(np.conj(self.scalar), np.conj(self.coords))

    def inverse(self) -> "DiagonalAlgebraElement":
        """Inverse in the unitisation; requires scalar and scalar+coords nonzero."""
        if self.scalar == 0 or np.any(self.scalar + self.coords == 0):
            raise ZeroDivisionError("element is not invertible")
        lam = self.scalar
        return self._like(1.0 / lam, -self.coords / (lam * (lam + self.coords)))

    def _check(self, other):
        if other.weights.shape != self.weights.shape or not np.array_equal(other.weights, self.weights):
            raise PreconditionViolated("elements carry different weight vectors")

    def to_json(self) -> dict:
        return {
            "scalar": [self.scalar.real, self.scalar.imag],
            "coords": [[c.real, c.imag] for c in self.coords],
            "weights": list(map(float, self.weights)),
        }

    @classmethod
    def from_json(cls, obj, weights=None) -> "DiagonalAlgebraElement":
        w = obj.get("weights", weights)
        if w is None:
            raise ValueError("weights missing")
        re, im = obj["scalar"]
        coords = np.asarray([complex(a, b) for a, b in obj["coords"]], dtype=np.complex128)
        return cls(complex(re, im), coords, np.asarray(w, dtype=float))


def diagonal_open_mult(
    a: DiagonalAlgebraElement, b: DiagonalAlgebraElement, d: DiagonalAlgebraElement, eps: float
) -> tuple[DiagonalAlgebraElement, DiagonalAlgebraElement]:
    """a', b' with a'*b' = a*b + d and norm distances below eps.

    Delegates to the inversion scheme with the diagonal algebra model; the
    pair (a, b) must be jointly non-degenerate and d must be smaller than the
    scheme's admissible radius for the pair.
    """
    from .scheme import diagonal_algebra_model, run_scheme, scheme_params

    model = diagonal_algebra_model(a.weights)
    params = scheme_params(a, b, eps, model)
    if d.norm() >= params.delta:
        raise PerturbationTooLarge(
            "perturbation exceeds the scheme radius",
            bound="norm(d) < delta", value=d.norm(), limit=params.delta,
        )
    f, g, _trace = run_scheme(a, b, d, params, model)
    return f, g
