"""Exterior algebra over C^n for grades 1..4.

Elements of Lambda^k C^n are stored densely on the basis of strictly
increasing k-tuples from {1..n} in lexicographic order.  Grade 4 is the
cap: the curve invariants never need more.  The Hermitian inner product
conjugates the second slot: <u, v> = sum_I u_I conj(v_I).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

GRADE_CAP = 4


@lru_cache(maxsize=None)
def _tuples(n: int, k: int) -> tuple:
    """All increasing k-tuples from {1..n}, lexicographic."""
    return tuple(combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def _tuple_index(n: int, k: int) -> dict:
    return {t: i for i, t in enumerate(_tuples(n, k))}


def tuple_rank(t, n: int) -> int:
    """Lexicographic rank of an increasing tuple among k-tuples of {1..n}."""
    t = tuple(t)
    k = len(t)
    if any(t[i] >= t[i + 1] for i in range(k - 1)):
        raise ValueError(f"tuple {t} is not strictly increasing")
    if not t or t[0] < 1 or t[-1] > n:
        raise ValueError(f"tuple {t} out of range for n={n}")
    try:
        return _tuple_index(n, k)[t]
    except KeyError:
        raise ValueError(f"tuple {t} invalid for n={n}, k={k}") from None


def rank_tuple(index: int, n: int, k: int) -> tuple:
    """Inverse of tuple_rank."""
    tups = _tuples(n, k)
    if not 0 <= index < len(tups):
        raise ValueError(f"index {index} out of range for C({n},{k})={len(tups)}")
    return tups[index]


@dataclass(frozen=True, eq=False)
class MultiVec:
    """Element of Lambda^k C^n on the lexicographic increasing-tuple basis."""

    n: int
    k: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.k <= GRADE_CAP:
            raise ValueError(f"grade {self.k} outside 1..{GRADE_CAP}")
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.shape[0] != comb(self.n, self.k):
            raise ValueError(
                f"coefficient length {c.shape[0]} != C({self.n},{self.k})"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int, k: int) -> "MultiVec":
        return cls(n, k, np.zeros(comb(n, k), dtype=complex))

    @classmethod
    def basis(cls, n: int, t) -> "MultiVec":
        """The basis element eps_{i1} ^ ... ^ eps_{ik} for an increasing tuple."""
        t = tuple(t)
        v = np.zeros(comb(n, len(t)), dtype=complex)
        v[tuple_rank(t, n)] = 1.0
        return cls(n, len(t), v)

    @classmethod
    def vector(cls, v) -> "MultiVec":
        """Grade-1 element from a plain coefficient vector."""
        v = np.asarray(v, dtype=complex).reshape(-1)
        return cls(v.shape[0], 1, v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "MultiVec") -> "MultiVec":
        _check_same_space(self, other)
        return MultiVec(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiVec") -> "MultiVec":
        _check_same_space(self, other)
        return MultiVec(self.n, self.k, self.coeffs - other.coeffs)

    def __rmul__(self, scalar) -> "MultiVec":
        return MultiVec(self.n, self.k, complex(scalar) * self.coeffs)

    def __neg__(self) -> "MultiVec":
        return MultiVec(self.n, self.k, -self.coeffs)


def _check_same_space(u: MultiVec, v: MultiVec):
    if u.n != v.n:
        raise ValueError(f"ambient dimension mismatch: {u.n} != {v.n}")
    if u.k != v.k:
        raise ValueError(f"grade mismatch: {u.k} != {v.k}")


def _merge_sign(I: tuple, J: tuple) -> int:
    """Parity sign for sorting the concatenation of two increasing tuples."""
    inversions = sum(1 for a in I for b in J if a > b)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def wedge_table(n: int, j: int, k: int):
    """Index/sign table for Lambda^j x Lambda^k -> Lambda^{j+k} over C^n.

    Returns (iu, iv, iout, sign) integer arrays: out[iout] += sign * u[iu] * v[iv].
    """
    if j + k > GRADE_CAP:
        raise ValueError(f"grade overflow: {j}+{k} > {GRADE_CAP}")
    out_index = _tuple_index(n, j + k)
    iu, iv, iout, sgn = [], [], [], []
    for a, I in enumerate(_tuples(n, j)):
        set_I = set(I)
        for b, J in enumerate(_tuples(n, k)):
            if set_I & set(J):
                continue
            iu.append(a)
            iv.append(b)
            iout.append(out_index[tuple(sorted(I + J))])
            sgn.append(_merge_sign(I, J))
    return (
        np.asarray(iu, dtype=np.intp),
        np.asarray(iv, dtype=np.intp),
        np.asarray(iout, dtype=np.intp),
        np.asarray(sgn, dtype=float),
    )


def wedge_coeffs(u: np.ndarray, v: np.ndarray, n: int, j: int, k: int) -> np.ndarray:
    """Wedge product on raw coefficient arrays (no MultiVec wrapping)."""
    iu, iv, iout, sgn = wedge_table(n, j, k)
    out = np.zeros(comb(n, j + k), dtype=complex)
    if iu.size:
        np.add.at(out, iout, sgn * u[iu] * v[iv])
    return out


def wedge(u: MultiVec, v: MultiVec) -> MultiVec:
    """Graded-anticommutative wedge product u ^ v."""
    if u.n != v.n:
        raise ValueError(f"ambient dimension mismatch: {u.n} != {v.n}")
    if u.k + v.k > GRADE_CAP:
        raise ValueError(f"grade overflow: {u.k}+{v.k} > {GRADE_CAP}")
    return MultiVec(u.n, u.k + v.k, wedge_coeffs(u.coeffs, v.coeffs, u.n, u.k, v.k))


def herm_inner(u: MultiVec, v: MultiVec) -> complex:
    """<u, v> = sum_I u_I conj(v_I); conjugate-linear in the second slot."""
    _check_same_space(u, v)
    return complex(np.vdot(v.coeffs, u.coeffs))


def pair_indices(n: int):
    """(i, j) arrays with i<j (1-based) listing the Lambda^2 basis tuples."""
    tups = _tuples(n, 2)
    if not tups:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    arr = np.asarray(tups, dtype=np.intp)
    return arr[:, 0], arr[:, 1]


def wedge2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of a ^ b for grade-1 arrays a, b of equal length n.

    Supports leading batch dimensions on either argument (broadcast).
    """
    n = a.shape[-1]
    ii, jj = pair_indices(n)
    if ii.size == 0:
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (0,)
        return np.zeros(shape, dtype=complex)
    i0, j0 = ii - 1, jj - 1
    return a[..., i0] * b[..., j0] - a[..., j0] * b[..., i0]
