"""Root selection for gamma*z**2 + beta*z + alpha with |gamma| = 1.

The selected root is the one of strictly smaller modulus; selection is only
defined when the two root moduli split (relative tie tolerance 1e-12, an open
condition that the factorization pipeline stays well inside).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EqualModulusRoots

TIE_TOL = 1e-12
UNIMODULAR_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticTriple:
    alpha: complex
    beta: complex
    gamma: complex

    def __post_init__(self):
        if abs(abs(self.gamma) - 1.0) > 1e-12 * (1.0 + abs(self.gamma)):
            raise ValueError("leading coefficient must be unimodular")


def roots_vec(alpha, beta, gamma):
    """Both roots, numerically stable, vectorized.

    Returns (big, small) ordered by modulus, |big| >= |small|.  The larger
    root comes from the cancellation-free branch of the quadratic formula and
    the smaller from the product relation small = alpha / (gamma * big), so
    tiny alpha never cancels.
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    gamma = np.asarray(gamma, dtype=np.complex128)
    disc = beta * beta - 4.0 * gamma * alpha
    s = np.sqrt(disc)
    plus = beta + s
    minus = beta - s
    w = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    q = -w / 2.0
    big = q / gamma
    small = np.divide(alpha, q, out=np.zeros_like(q), where=q != 0)
    return big, small


def smaller_root_vec(alpha, beta, gamma):
    """Selected (smaller-modulus) root per node; raises when any node ties."""
    big, small = roots_vec(alpha, beta, gamma)
    gap = np.abs(big) - np.abs(small)
    bad = gap <= TIE_TOL * (1.0 + np.abs(big) + np.abs(small))
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise EqualModulusRoots(f"root moduli tie at index {idx}")
    return small


def roots(t: QuadraticTriple) -> tuple[complex, complex]:
    """Both roots as (larger-modulus, smaller-modulus)."""
    big, small = roots_vec(t.alpha, t.beta, t.gamma)
    return complex(big), complex(small)


def has_distinct_moduli(t: QuadraticTriple) -> bool:
    """Whether the two root moduli split, so the selection is defined."""
    big, small = roots_vec(t.alpha, t.beta, t.gamma)
    gap = float(np.abs(big) - np.abs(small))
    return gap > TIE_TOL * (1.0 + abs(complex(big)) + abs(complex(small)))


def smaller_root(t: QuadraticTriple) -> complex:
    """The root of strictly smaller modulus.

    In the tracking regime |beta| >= eta, |alpha| <= eta^2/4 the returned
    value satisfies |z| <= 2|alpha|/|beta|.
    """
    if not has_distinct_moduli(t):
        raise EqualModulusRoots("root moduli tie; selection undefined")
    _big, small = roots_vec(t.alpha, t.beta, t.gamma)
    return complex(small)
