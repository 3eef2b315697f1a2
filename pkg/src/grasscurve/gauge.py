"""Congruence moves: the GL(2) frame change, the block unitary action on C^n,
Mobius reparametrization of the sphere, and SVD canonicalization of A_1.

Only rotations of the round sphere (coefficient matrices proportional to a
unitary) preserve the chart-normalized constant-curvature identity; a general
invertible Mobius map still produces a valid curve whenever the moved curve
leaves the coordinate chart at infinity alone, and is rejected with a
diagnostic otherwise.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .curve import Curve

MOBIUS_DET_TOL = 1e-12
UNITARY_TOL = 1e-10


class GaugeError(ValueError):
    """A congruence move could not be carried out on the given curve."""


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d) with ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if abs(self.det) <= MOBIUS_DET_TOL * scale**2:
            raise ValueError("mobius transformation is (numerically) singular")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    @property
    def is_rotation(self) -> bool:
        """True when the matrix is proportional to a unitary (sphere rotation)."""
        m = np.array([[self.a, self.b], [self.c, self.d]])
        g = m.conj().T @ m
        lam = np.trace(g).real / 2
        return bool(np.abs(g - lam * np.eye(2)).max() <= 1e-12 * max(lam, 1.0))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def random_rotation(cls, rng: np.random.Generator) -> "Mobius":
        """Haar-ish random rotation of S^2 (an SU(2) matrix)."""
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        a = complex(v[0], v[1])
        b = complex(v[2], v[3])
        return cls(a, b, -np.conj(b), np.conj(a))


def apply_gl2(c: Curve, M) -> Curve:
    """Frame move F -> M F; the Grassmannian-valued map is unchanged."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise ValueError(f"M must be 2x2, got {M.shape}")
    scale = max(float(np.abs(M).max()), 1e-300)
    if abs(np.linalg.det(M)) <= 1e-12 * scale**2:
        raise GaugeError("frame matrix is (numerically) singular")
    if c.deg_max == 0:
        return Curve(c.n, c.d, c.A.copy())
    return Curve(c.n, c.d, np.einsum("ij,ajk->aik", M, c.A))


def apply_unitary(c: Curve, U) -> Curve:
    """Ambient unitary preserving the chart splitting: each A_a -> A_a U."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (c.n, c.n):
        raise ValueError(f"U must be {c.n}x{c.n}, got {U.shape}")
    if np.abs(U.conj().T @ U - np.eye(c.n)).max() > UNITARY_TOL:
        raise GaugeError("matrix is not unitary within tolerance")
    if c.deg_max == 0:
        return Curve(c.n, c.d, c.A.copy())
    return Curve(c.n, c.d, np.einsum("aij,jk->aik", c.A, U))


def _poly_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.convolve(p, q)


def _mobius_frame(c: Curve, m: Mobius) -> np.ndarray:
    """Coefficients of (cz+d)^D [I_2, F(m(z))], shape (D+1, 2, n+2)."""
    D = c.deg_max
    num = np.array([m.b, m.a], dtype=complex)  # a z + b, ascending
    den = np.array([m.d, m.c], dtype=complex)  # c z + d
    num_pow = [np.array([1.0 + 0j])]
    den_pow = [np.array([1.0 + 0j])]
    for _ in range(D):
        num_pow.append(_poly_mul(num_pow[-1], num))
        den_pow.append(_poly_mul(den_pow[-1], den))
    H = np.zeros((D + 1, 2, c.n + 2), dtype=complex)
    H[: D + 1, 0, 0] = den_pow[D]
    H[: D + 1, 1, 1] = den_pow[D]
    for a in range(1, D + 1):
        basis = _poly_mul(num_pow[a], den_pow[D - a])  # length D+1
        H[:, :, 2:] += basis[:, None, None] * c.A[a - 1][None, :, :]
    return H


def _reduce_at_origin(H: np.ndarray) -> np.ndarray:
    """Polynomial row reduction until the frame has rank 2 at z = 0."""
    H = H.copy()
    scale = max(float(np.abs(H).max()), 1e-300)
    for _ in range(4 * H.shape[0] + 8):
        u, s, _ = np.linalg.svd(H[0])
        if s[1] > 1e-12 * scale:
            return H
        kappa = u[:, 1].conj()
        row = np.einsum("i,lic->lc", kappa, H)
        row[0] = 0.0  # vanishes at 0 by construction
        pivot = int(np.argmax(np.abs(kappa)))
        H[:-1, pivot, :] = row[1:]
        H[-1, pivot, :] = 0.0
    raise GaugeError("frame row reduction at z=0 did not terminate")


def apply_mobius(c: Curve, m: Mobius) -> Curve:
    """Reparametrize by z -> m(z) and renormalize to chart form with F'(0) = 0.

    The homogeneous frame is cleared of denominators, row-reduced at the new
    basepoint, rotated by a constant ambient unitary so the basepoint plane
    becomes the chart origin, and divided back to [I_2, F'].  Raises GaugeError
    when the transformed curve exits the chart at a finite point (then no
    polynomial chart representation with this basepoint exists).
    """
    H = _mobius_frame(c, m)
    H = _reduce_at_origin(H)
    _, _, vh = np.linalg.svd(H[0], full_matrices=True)
    Hrot = H @ vh.conj().T
    B = Hrot[:, :, :2]
    C = Hrot[:, :, 2:]
    scale = max(float(np.abs(Hrot).max()), 1e-300)

    L = H.shape[0] - 1
    kmax = L + c.d + 16
    B0inv = np.linalg.inv(B[0])
    Fp = np.zeros((kmax + 1, 2, c.n), dtype=complex)
    for k in range(kmax + 1):
        rhs = C[k].copy() if k <= L else np.zeros((2, c.n), dtype=complex)
        for j in range(1, min(k, L) + 1):
            rhs -= B[j] @ Fp[k - j]
        Fp[k] = B0inv @ rhs

    # Exactness check: B * F' must reproduce C with no truncated tail.
    prod = np.zeros((kmax + L + 1, 2, c.n), dtype=complex)
    for j in range(L + 1):
        prod[j : j + kmax + 1] += np.einsum("rs,ksc->krc", B[j], Fp)
    resid = prod.copy()
    resid[: L + 1] -= C
    if float(np.abs(resid).max()) > 1e-8 * scale:
        raise GaugeError(
            "transformed curve leaves the coordinate chart at a finite point; "
            "no polynomial chart representation with this basepoint"
        )
    tail = np.abs(Fp).max(axis=(1, 2))
    keep = np.where(tail > 1e-11 * max(np.abs(Fp).max(), 1.0))[0]
    deg = int(keep[-1]) if keep.size else 0
    if deg > kmax - 8:
        raise GaugeError("chart representation does not truncate to a polynomial")
    if np.abs(Fp[0]).max() > 1e-9 * scale:
        raise GaugeError("basepoint renormalization failed: F'(0) != 0")
    return Curve(c.n, c.d, Fp[1 : deg + 1] if deg >= 1 else np.zeros((0, 2, c.n)))


def canonicalize_a1(c: Curve) -> Curve:
    """Congruent curve with A_1 in diagonal SVD form, phases pinned.

    a_1^(1) becomes (s_1, 0, ..., 0) and a_2^(1) becomes (0, s_2, 0, ..., 0)
    with s_1 >= s_2 >= 0.  The leftover torus freedom is spent making the
    first nonzero entry of each column (scanning coefficients upward) real
    and nonnegative, so the form is deterministic and idempotent up to phase.
    """
    if c.deg_max == 0 or np.abs(c.A[0]).max() == 0:
        raise GaugeError("A_1 vanishes; the curve is not immersive at the chart origin")
    A1 = c.A[0]
    u, s, vh = np.linalg.svd(A1, full_matrices=True)
    out = apply_unitary(apply_gl2(c, u.conj().T), vh.conj().T)

    # Residual torus: row phases theta_r, column phases xi_j, tied by
    # theta_r + xi_r = 0 whenever s_r > 0 so A_1 stays fixed.
    n = c.n
    A = out.A.copy()
    scale = float(np.abs(A).max())
    tol = 1e-12 * max(scale, 1.0)
    ngen = 2 + n  # (theta_1, theta_2, xi_1..xi_n)
    rows: list[np.ndarray] = []
    targets: list[float] = []

    def try_add(w: np.ndarray, target: float) -> None:
        if rows:
            M = np.array(rows)
            resid = w - M.T @ np.linalg.lstsq(M.T, w, rcond=None)[0]
        else:
            resid = w
        if np.linalg.norm(resid) > 1e-9:
            rows.append(w)
            targets.append(target)

    for r in range(2):
        if s[r] > tol:
            w = np.zeros(ngen)
            w[r] = 1.0
            w[2 + r] = 1.0
            try_add(w, 0.0)

    for j in range(n):
        for a in range(1, A.shape[0]):
            for r in range(2):
                e = A[a, r, j]
                if abs(e) > tol:
                    w = np.zeros(ngen)
                    w[r] = 1.0
                    w[2 + j] = 1.0
                    try_add(w, -np.angle(e))
                    break
            else:
                continue
            break

    if rows:
        M = np.array(rows)
        sol, *_ = np.linalg.lstsq(M, np.array(targets), rcond=None)
        theta = sol[:2]
        xi = sol[2:]
        phase_rows = np.exp(1j * theta)
        phase_cols = np.exp(1j * xi)
        A = A * phase_rows[None, :, None] * phase_cols[None, None, :]

    return Curve(c.n, c.d, A)
