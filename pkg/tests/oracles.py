"""Independent numerical oracles used to validate the library's closed forms.

Everything here is implemented from scratch on top of numpy, deliberately
avoiding the code paths under test: matrix exponentials via a separately
written scaling-and-squaring Taylor sum and via numpy's eigendecomposition,
integrals via adaptive Simpson quadrature, and derivatives via central
differences.
"""

from __future__ import annotations

import numpy as np


def expm_taylor(matrix: np.ndarray, tol: float = 1e-16, max_terms: int = 120) -> np.ndarray:
    """exp(matrix) by scaling-and-squaring with a straight Taylor sum.

    Scales by powers of two until the Frobenius norm is below 1/4, sums the
    series to relative tolerance ``tol``, then squares back up.
    """
    a = np.asarray(matrix, dtype=complex)
    norm = np.linalg.norm(a)
    squarings = 0
    while norm > 0.25:
        norm /= 2.0
        squarings += 1
    scaled = a / (2.0**squarings)
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, max_terms):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term) <= tol * np.linalg.norm(result):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def expm_eig(matrix: np.ndarray) -> np.ndarray:
    """exp(matrix) through numpy's dense eigendecomposition.

    Accurate only for well-conditioned eigenbases; use ``expm_taylor`` near
    degeneracies.
    """
    values, vectors = np.linalg.eig(np.asarray(matrix, dtype=complex))
    return vectors @ np.diag(np.exp(values)) @ np.linalg.inv(vectors)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integral of f over [a, b] by recursive adaptive Simpson quadrature."""

    def _simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def _recurse(x0, x2, f0, f1, f2, whole, tol_here, depth):
        x1 = 0.5 * (x0 + x2)
        left_mid = 0.5 * (x0 + x1)
        right_mid = 0.5 * (x1 + x2)
        f_lm = f(left_mid)
        f_rm = f(right_mid)
        left = _simpson(x0, x1, f0, f_lm, f1)
        right = _simpson(x1, x2, f1, f_rm, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol_here:
            return left + right + (left + right - whole) / 15.0
        return _recurse(x0, x1, f0, f_lm, f1, left, tol_here / 2.0, depth + 1) + _recurse(
            x1, x2, f1, f_rm, f2, right, tol_here / 2.0, depth + 1
        )

    a = float(a)
    b = float(b)
    f_a, f_m, f_b = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(a, b, f_a, f_m, f_b)
    return _recurse(a, b, f_a, f_m, f_b, whole, float(tol), 0)


def central_difference(f, x: float, h: float) -> float:
    """Symmetric difference quotient (f(x+h) - f(x-h)) / (2h)."""
    return (f(x + h) - f(x - h)) / (2.0 * h)
