"""Explicit constant-curvature families: Veronese curves and the two
degenerate families of degree n and 2n.

Coefficients are floats of exact surds (square roots of integers).
"""

from math import comb, sqrt

import numpy as np

from .curve import Curve


def veronese(d: int) -> np.ndarray:
    """Coefficient list of the degree-d Veronese curve: entry k is sqrt(C(d,k)).

    The curve z -> (1, sqrt(C(d,1)) z, ..., sqrt(C(d,d)) z^d) has
    |entries|^2 summing to (1 + |z|^2)^d.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return np.array([sqrt(comb(d, k)) for k in range(d + 1)], dtype=complex)


def family_dn(n: int) -> Curve:
    """Degenerate degree-n family: F_1 the Veronese tail, F_2 = 0.

    Row 1 of the frame is (1, 0, sqrt(C(n,1)) z, ..., sqrt(C(n,n)) z^n),
    row 2 is (0, 1, 0, ..., 0).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    A = np.zeros((n, 2, n), dtype=complex)
    for a in range(1, n + 1):
        A[a - 1, 0, a - 1] = sqrt(comb(n, a))
    return Curve(n, n, A)


def family_d2n(n: int) -> Curve:
    """Degenerate degree-2n family built from two consecutive Veronese rows.

    F_1 entry j is j * sqrt(C(n+1, j+1)) z^{j+1} and F_2 entry j is
    sqrt(C(n, j) * (j+1)) z^j for j = 1..n; the first F_2 entry is
    sqrt(2n) z.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    A = np.zeros((n + 1, 2, n), dtype=complex)
    for j in range(1, n + 1):
        A[j, 0, j - 1] = j * sqrt(comb(n + 1, j + 1))  # z^{j+1} coefficient
        A[j - 1, 1, j - 1] = sqrt(comb(n, j) * (j + 1))  # z^j coefficient
    return Curve(n, 2 * n, A)
