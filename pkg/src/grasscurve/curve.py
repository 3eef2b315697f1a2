"""Polynomial curves into G(2, n+2; C) and the constant-curvature residual.

A curve is f(z) = [I_2, F(z)] with F = sum_{a=1..deg_max} A_a z^a, so F(0) = 0
is structural.  The squared norm of the Plucker lift (1, F_2, -F_1, F_1^F_2)
is a bivariate polynomial in (z, zbar) whose Hermitian coefficient matrix is
<W_p, W_q> + <V_p, V_q> plus the lone constant 1.  The curve has constant
curvature 4/d exactly when that matrix equals diag(C(d,p)).
"""

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .exterior import MultiVec, wedge2

SCHEMA_VERSION = 1

DEFAULT_CC_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Curve:
    """Degree-d polynomial curve into G(2, n+2; C).

    A[alpha-1] is the 2 x n coefficient matrix of z^alpha; row 0 belongs to
    F_1, row 1 to F_2.  The claimed degree d is data (the curvature target is
    K = 4/d), not inferred from the coefficients.
    """

    n: int
    d: int
    A: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        A = np.asarray(self.A, dtype=complex)
        if A.size == 0:
            A = A.reshape(0, 2, self.n)
        if A.ndim != 3 or A.shape[1] != 2 or A.shape[2] != self.n:
            raise ValueError(f"A must have shape (deg_max, 2, {self.n}), got {A.shape}")
        object.__setattr__(self, "A", A)

    @property
    def deg_max(self) -> int:
        return self.A.shape[0]

    @property
    def deg_actual(self) -> int:
        """Largest alpha with A_alpha != 0 (0 for the zero curve)."""
        nz = np.where(np.abs(self.A).max(axis=(1, 2)) > 0)[0]
        return int(nz[-1] + 1) if nz.size else 0

    def with_claimed_degree(self, d: int) -> "Curve":
        return Curve(self.n, d, self.A.copy())


@dataclass(frozen=True, eq=False)
class CoeffVectors:
    """First-order data of a curve: W_a in C^{2n} and V_p in Lambda^2 C^n."""

    n: int
    d: int
    W: list  # MultiVec-free: plain complex vectors, index 0 -> alpha = 1
    V: list  # grade-2 MultiVec, index 0 -> p = 1


def wv_arrays(c: Curve):
    """Subscript-indexed coefficient arrays.

    Returns (W, V): both subscript-indexed with row 0 zero.  W has shape
    (2M+1, 2n) with row a = (a_1^(a), a_2^(a)) for a <= deg_max; V has shape
    (2M+1, C(n,2)) with row p = sum_{a+b=p} a_1^(a) ^ a_2^(b).
    M = max(d, deg_max) so an over-long coefficient list is still captured.
    """
    n = c.n
    M = max(c.d, c.deg_max)
    m2 = comb(n, 2)
    W = np.zeros((2 * M + 1, 2 * n), dtype=complex)
    if c.deg_max:
        W[1 : c.deg_max + 1, :n] = c.A[:, 0, :]
        W[1 : c.deg_max + 1, n:] = c.A[:, 1, :]
    V = np.zeros((2 * M + 1, m2), dtype=complex)
    if c.deg_max and m2:
        a1 = c.A[:, 0, :]
        a2 = c.A[:, 1, :]
        pair = wedge2(a1[:, None, :], a2[None, :, :])  # (deg, deg, m2)
        for al in range(1, c.deg_max + 1):
            for be in range(1, c.deg_max + 1):
                V[al + be] += pair[al - 1, be - 1]
    return W, V


def coefficient_vectors(c: Curve) -> CoeffVectors:
    """Extract the ordered vectors W_1..W_M and wedge coefficients V_1..V_2M."""
    W, V = wv_arrays(c)
    M = max(c.d, c.deg_max)
    Wl = [W[a].copy() for a in range(1, M + 1)]
    Vl = [MultiVec(c.n, 2, V[p].copy()) for p in range(1, V.shape[0])]
    return CoeffVectors(c.n, c.d, Wl, Vl)


@dataclass(frozen=True, eq=False)
class GramReport:
    """Hermitian coefficient matrix of |Pl o f|^2 against the binomial target.

    residual[p, q] = actual[p, q] - delta_pq * C(d, p); the curve satisfies the
    constant-curvature identity iff residual == 0.
    """

    d: int
    actual: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    max_abs: float
    frobenius: float
    is_cc: bool


def gram_actual(c: Curve) -> np.ndarray:
    """Coefficient matrix P[p, q] of z^p zbar^q in 1 + |F_1|^2 + |F_2|^2 + |F_1^F_2|^2."""
    W, V = wv_arrays(c)
    P = W @ W.conj().T + V @ V.conj().T
    P[0, 0] += 1.0
    return P


def gram_residual(c: Curve, tol: float = DEFAULT_CC_TOL) -> GramReport:
    """Residual of the constant-curvature constraint system as one matrix."""
    P = gram_actual(c)
    m = P.shape[0]
    target = np.zeros(m)
    up = min(c.d, m - 1)
    target[: up + 1] = [comb(c.d, p) for p in range(up + 1)]
    delta = P - np.diag(target)
    max_abs = float(np.abs(delta).max()) if delta.size else 0.0
    fro = float(np.linalg.norm(delta))
    return GramReport(c.d, P, delta, max_abs, fro, bool(max_abs <= tol))


def coefficient_rows(c: Curve) -> np.ndarray:
    """The 2*deg_max x n matrix whose rows are all a_1^(a), a_2^(a)."""
    if c.deg_max == 0:
        return np.zeros((0, c.n), dtype=complex)
    return c.A.reshape(-1, c.n)


def fullness_rank(c: Curve, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank of the coefficient span; the curve is full iff this is n."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    rows = coefficient_rows(c)
    if rows.size == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class VerifyReport:
    is_cc: bool
    is_full: bool
    degree_ok: bool
    deg_consistent: bool
    max_residual: float
    fullness_rank: int
    n: int
    d: int

    @property
    def ok(self) -> bool:
        return self.is_cc and self.is_full and self.degree_ok

    def as_dict(self) -> dict:
        return {
            "is_cc": self.is_cc,
            "is_full": self.is_full,
            "degree_ok": self.degree_ok,
            "deg_consistent": self.deg_consistent,
            "max_residual": self.max_residual,
            "fullness_rank": self.fullness_rank,
            "n": self.n,
            "d": self.d,
        }


def verify(c: Curve, tol: float = DEFAULT_CC_TOL, rank_tol: float = DEFAULT_RANK_TOL) -> VerifyReport:
    """Check constant curvature, fullness and the Plucker degree bound."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    rep = gram_residual(c, tol)
    rank = fullness_rank(c, rank_tol)
    degree_ok = c.d <= comb(c.n + 2, 2) - 1
    return VerifyReport(
        is_cc=rep.is_cc,
        is_full=(rank == c.n),
        degree_ok=degree_ok,
        deg_consistent=(c.deg_actual <= c.d),
        max_residual=rep.max_abs,
        fullness_rank=rank,
        n=c.n,
        d=c.d,
    )


def evaluate(c: Curve, z: complex) -> np.ndarray:
    """F(z) as a 2 x n matrix, by Horner evaluation."""
    F = np.zeros((2, c.n), dtype=complex)
    for a in range(c.deg_max - 1, -1, -1):
        F = F * z + c.A[a]
    return F * z


def plucker(c: Curve, z: complex) -> np.ndarray:
    """Plucker lift (1, F_2(z), -F_1(z), (F_1 ^ F_2)(z)) of length C(n+2, 2)."""
    F = evaluate(c, z)
    w12 = wedge2(F[0], F[1])
    return np.concatenate([[1.0 + 0.0j], F[1], -F[0], w12])


def plucker_norm_sq(c: Curve, z: complex) -> float:
    v = plucker(c, z)
    return float(np.real(np.vdot(v, v)))


# ---------------------------------------------------------------------------
# JSON persistence.  Schema: {"schema_version": 1, "n": int, "d": int,
# "coeffs": [[[ [re, im] x n ] x 2] x deg_max]} with alpha ascending from 1.
# ---------------------------------------------------------------------------


class CurveFormatError(ValueError):
    """Raised when a curve payload does not match the schema."""


def curve_to_dict(c: Curve) -> dict:
    coeffs = [
        [[[float(x.real), float(x.imag)] for x in row] for row in c.A[a]]
        for a in range(c.deg_max)
    ]
    return {"schema_version": SCHEMA_VERSION, "n": c.n, "d": c.d, "coeffs": coeffs}


def curve_from_dict(payload: dict) -> Curve:
    if not isinstance(payload, dict):
        raise CurveFormatError("curve payload must be a JSON object")
    try:
        n = int(payload["n"])
        d = int(payload["d"])
        coeffs = payload["coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CurveFormatError(f"missing or malformed curve field: {exc}") from exc
    version = payload.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise CurveFormatError(f"unsupported schema_version {version}")
    A = np.zeros((len(coeffs), 2, n), dtype=complex)
    for a, mat in enumerate(coeffs):
        if len(mat) != 2:
            raise CurveFormatError(f"coefficient {a + 1}: expected 2 rows, got {len(mat)}")
        for r, row in enumerate(mat):
            if len(row) != n:
                raise CurveFormatError(f"coefficient {a + 1}: expected {n} entries per row")
            for i, pair in enumerate(row):
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise CurveFormatError("entries must be [re, im] pairs")
                A[a, r, i] = complex(pair[0], pair[1])
    try:
        return Curve(n, d, A)
    except ValueError as exc:
        raise CurveFormatError(str(exc)) from exc


def curve_dumps(c: Curve, indent: int | None = None) -> str:
    return json.dumps(curve_to_dict(c), indent=indent)


def curve_loads(text: str) -> Curve:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveFormatError(f"invalid JSON: {exc}") from exc
    return curve_from_dict(payload)


def save_curve(c: Curve, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(curve_dumps(c, indent=2))
        fh.write("\n")


def load_curve(path) -> Curve:
    with open(path, encoding="utf-8") as fh:
        return curve_loads(fh.read())
