"""Adaptive Gauss-Legendre quadrature for smooth integrands."""

from __future__ import annotations

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


class QuadratureError(ArithmeticError):
    """Refinement hit the depth cap before reaching the tolerance."""


def gauss_legendre(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    return half * float(np.dot(_WEIGHTS, f(x)))


def adaptive_gauss_legendre(f, a: float, b: float, abs_tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integrate a vectorised ``f`` over [a, b] to absolute accuracy ``abs_tol``.

    A panel is accepted when its two halves agree with the whole to within
    half the panel's share of the tolerance.
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    total = 0.0
    stack = [(a, b, gauss_legendre(f, a, b), abs_tol, 0)]
    while stack:
        lo, hi, whole, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = gauss_legendre(f, lo, mid), gauss_legendre(f, mid, hi)
        if abs(left + right - whole) < tol / 2:
            total += left + right
            continue
        if depth >= max_depth:
            raise QuadratureError(f"tolerance {abs_tol} not met on [{lo}, {hi}]")
        stack.append((lo, mid, left, tol / 2, depth + 1))
        stack.append((mid, hi, right, tol / 2, depth + 1))
    return total
