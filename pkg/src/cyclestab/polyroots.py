"""Complex polynomials, simultaneous root finding, and unit-disk stability.

The root finder is an Aberth-Ehrlich simultaneous iteration with a fixed,
deterministic starting configuration, adequate for the moderate degrees
(a few tens at most) produced by the characteristic-polynomial machinery.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ComplexPolynomial",
    "RootSet",
    "RootConvergenceError",
    "SchurVerdict",
    "SchurReport",
    "find_roots",
    "is_schur_stable",
]


class RootConvergenceError(RuntimeError):
    """Simultaneous iteration did not meet the residual tolerance.

    Carries the best iterate (``best_roots``) and its residuals so callers
    can inspect how close the failure was.
    """

    def __init__(self, message: str, best_roots, residuals):
        super().__init__(message)
        self.best_roots = tuple(best_roots)
        self.residuals = tuple(float(r) for r in residuals)


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients in ascending degree order.

    ``coeffs[d]`` is the degree-d coefficient.  Trailing (high-degree) zero
    coefficients are dropped on construction so the leading coefficient is
    always nonzero; the all-zero polynomial is rejected.
    """

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = [complex(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c or c[-1] == 0:
            raise ValueError("zero polynomial has no normalized form")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        """Evaluate by Horner's rule; accepts scalars or numpy arrays."""
        z = np.asarray(z, dtype=complex)
        acc = np.full_like(z, self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        if acc.ndim == 0:
            return complex(acc)
        return acc

    def derivative(self) -> "ComplexPolynomial":
        if self.degree == 0:
            return ComplexPolynomial((0j + 0.0, ))  # degenerate, rejected upstream
        d = tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1)
        return ComplexPolynomial(d)

    def monic(self) -> "ComplexPolynomial":
        lead = self.coeffs[-1]
        return ComplexPolynomial(tuple(c / lead for c in self.coeffs))


@dataclass(frozen=True)
class RootSet:
    """All roots of a polynomial with per-root residuals |p(root)|."""

    roots: tuple[complex, ...]
    residuals: tuple[float, ...]
    max_modulus: float


class SchurVerdict(enum.Enum):
    STABLE = "Stable"
    MARGINAL = "Marginal"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class SchurReport:
    verdict: SchurVerdict
    max_modulus: float
    roots: RootSet


def _initial_guesses(monic_coeffs: np.ndarray) -> np.ndarray:
    # Equally spaced on a circle of radius 1 + max|coeff|, with a fixed
    # angular offset so the start is never symmetric about the real axis.
    n = len(monic_coeffs) - 1
    radius = 1.0 + float(np.max(np.abs(monic_coeffs)))
    angles = 2.0 * np.pi * np.arange(n) / n + np.pi / (2.0 * n)
    return radius * np.exp(1j * angles)


def find_roots(p: ComplexPolynomial, tol: float = 1e-12, max_iter: int = 200) -> RootSet:
    """Find all roots of ``p`` (with multiplicity) by Aberth-Ehrlich iteration.

    Deterministic for fixed inputs: starting points sit on a fixed circle
    and the update rule has no randomness.  On success every residual
    satisfies ``|p(root)| <= tol * scale(root)`` where the per-root scale
    ``sum_k |c_k| |root|^k`` is the natural size of the evaluation; this is
    the usual backward-error criterion and, unlike a flat coefficient
    bound, remains attainable for roots of large modulus.

    Raises
    ------
    ValueError
        If ``p`` has degree 0 or ``tol`` is not positive.
    RootConvergenceError
        If the residual target is not met within ``max_iter`` sweeps.
    """
    if p.degree < 1:
        raise ValueError("root finding requires degree >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")

    coeffs = np.asarray(p.coeffs, dtype=complex)
    abs_coeffs = np.abs(coeffs)
    monic = coeffs / coeffs[-1]
    dmonic = monic[1:] * np.arange(1, len(monic))

    z = _initial_guesses(monic)

    def horner(c, x):
        acc = np.full_like(x, c[-1])
        for ck in c[-2::-1]:
            acc = acc * x + ck
        return acc

    def scales(x):
        return horner(abs_coeffs.astype(complex), np.abs(x).astype(complex)).real

    best_z = z.copy()
    best_gap = np.inf
    converged = False
    for _ in range(max_iter):
        pv = horner(monic, z)
        res = np.abs(pv) * abs(coeffs[-1])
        gap = float((res / (tol * scales(z))).max())
        if gap <= 1.0:
            best_z = z
            converged = True
            break
        if gap < best_gap:
            best_z, best_gap = z.copy(), gap
        dv = horner(dmonic, z)
        dv = np.where(dv == 0, np.finfo(float).tiny, dv)
        newton = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        repulsion = (1.0 / diff).sum(axis=1)
        denom = 1.0 - newton * repulsion
        denom = np.where(denom == 0, np.finfo(float).tiny, denom)
        step = newton / denom
        z = z - step
        if float(np.abs(step).max()) <= 1e-16 * (1.0 + float(np.abs(z).max())):
            pv = horner(monic, z)
            res = np.abs(pv) * abs(coeffs[-1])
            if float((res / (tol * scales(z))).max()) <= 1.0:
                best_z = z
                converged = True
            break

    if not converged:
        residuals = np.abs(horner(coeffs, best_z))
        raise RootConvergenceError(
            f"no convergence after {max_iter} iterations "
            f"(worst residual/target ratio {best_gap:.3e})",
            best_z, residuals,
        )

    order = np.lexsort((best_z.imag, best_z.real))
    roots = best_z[order]
    residuals = np.abs(horner(coeffs, roots))
    return RootSet(
        roots=tuple(complex(r) for r in roots),
        residuals=tuple(float(r) for r in residuals),
        max_modulus=float(np.abs(roots).max()),
    )


def is_schur_stable(p: ComplexPolynomial, margin_tol: float = 1e-9) -> SchurReport:
    """Classify ``p`` by the position of its root moduli relative to 1.

    Stable: every root modulus < 1 - margin_tol.  Marginal: the largest
    modulus lies within ``margin_tol`` of 1.  Unstable: some root modulus
    exceeds 1 + margin_tol.  Root-finder failures propagate.
    """
    if p.degree < 1:
        raise ValueError("stability test requires degree >= 1")
    roots = find_roots(p)
    m = roots.max_modulus
    if m < 1.0 - margin_tol:
        verdict = SchurVerdict.STABLE
    elif m <= 1.0 + margin_tol:
        verdict = SchurVerdict.MARGINAL
    else:
        verdict = SchurVerdict.UNSTABLE
    return SchurReport(verdict=verdict, max_modulus=m, roots=roots)
