"""Analytic invariants of a curve: the g-vector, |det A_1|^2, ramification,
pointwise Gauss curvature, the Gauss-equation slack, and the two linear-algebra
probes behind the degree bounds.

The g-vector stacks the grade-2/3/4 coefficient polynomials of
dF_1 ^ dF_2, dF_1 ^ dF_2 ^ F_1, dF_1 ^ dF_2 ^ F_2 and dF_1 ^ dF_2 ^ F_1 ^ F_2,
truncated at degree 2d-4; its squared norm over d^2 (1+|z|^2)^{2d-4} is the
globally defined function |det A_1|^2 whose zeros are the ramification points.
"""

from dataclasses import dataclass, field
from math import ceil, comb

import numpy as np

from .curve import Curve, fullness_rank, gram_actual, wv_arrays
from .exterior import MultiVec, wedge_coeffs, wedge2

DEGENERACY_TOL = 1e-10
CLUSTER_RADIUS = 1e-6


class NonImmersionError(ValueError):
    """The induced metric density vanishes (or worse) at the requested point."""


@dataclass(frozen=True, eq=False)
class PolyVec:
    """Vector-valued polynomial in one complex variable.

    coeffs[m] is the length-L coefficient vector of z^m.
    """

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError(f"coeffs must be 2-D (degree, L), got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def length(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        """Highest index with a nonzero coefficient block (-1 if identically 0)."""
        nz = np.where(np.abs(self.coeffs).max(axis=1) > 0)[0]
        return int(nz[-1]) if nz.size else -1

    def __call__(self, z: complex) -> np.ndarray:
        out = np.zeros(self.length, dtype=complex)
        for m in range(self.coeffs.shape[0] - 1, -1, -1):
            out = out * z + self.coeffs[m]
        return out

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0


def g_vector(c: Curve) -> PolyVec:
    """The C(n+2, 4)-component polynomial vector (R | S | T | X blocks).

    Coefficient of z^m (m = 0..2d-4) in block order: grade-2 pairs, grade-3
    triples (first-row then second-row factor), grade-4 quadruples, each in
    lexicographic tuple order.
    """
    n, d = c.n, c.d
    if n < 2:
        raise ValueError("g_vector requires n >= 2")
    m2, m3, m4 = comb(n, 2), comb(n, 3), comb(n, 4)
    L = m2 + 2 * m3 + m4
    top = max(2 * d - 4, 0)
    out = np.zeros((top + 1, L), dtype=complex)
    D = c.deg_max
    if D == 0 or 2 * d - 4 < 0:
        return PolyVec(out)

    a1 = c.A[:, 0, :]
    a2 = c.A[:, 1, :]

    # R(z) = dF_1 ^ dF_2 = sum alpha*beta a_1^(a) ^ a_2^(b) z^{a+b-2}.
    R = np.zeros((top + 1, m2), dtype=complex)
    pair = wedge2(a1[:, None, :], a2[None, :, :])
    for al in range(1, D + 1):
        for be in range(1, D + 1):
            m = al + be - 2
            if m <= top:
                R[m] += al * be * pair[al - 1, be - 1]
    out[:, :m2] = R

    # S = R ^ F_1 and T = R ^ F_2 (grade 3).
    if m3:
        S = np.zeros((top + 1, m3), dtype=complex)
        T = np.zeros((top + 1, m3), dtype=complex)
        for m in range(top + 1):
            if not np.abs(R[m]).max():
                continue
            for ga in range(1, min(D, top - m) + 1):
                S[m + ga] += wedge_coeffs(R[m], a1[ga - 1], n, 2, 1)
                T[m + ga] += wedge_coeffs(R[m], a2[ga - 1], n, 2, 1)
        out[:, m2 : m2 + m3] = S
        out[:, m2 + m3 : m2 + 2 * m3] = T

    # X = R ^ (F_1 ^ F_2) (grade 4), with F_1 ^ F_2 = sum V_p z^p.
    if m4:
        _, V = wv_arrays(c)
        X = np.zeros((top + 1, m4), dtype=complex)
        for m in range(top + 1):
            if not np.abs(R[m]).max():
                continue
            for p in range(2, min(V.shape[0] - 1, top - m) + 1):
                if np.abs(V[p]).max():
                    X[m + p] += wedge_coeffs(R[m], V[p], n, 2, 2)
        out[:, m2 + 2 * m3 :] = X

    return PolyVec(out)


def coefficient_scale(c: Curve) -> float:
    """Largest |A_alpha| entry; the degeneracy threshold scales with its square."""
    return float(np.abs(c.A).max()) if c.A.size else 0.0


def det_a1_sq(c: Curve, z: complex, g: PolyVec | None = None) -> float:
    """|det A_1|^2 (z) = |g(z)|^2 / (d^2 (1+|z|^2)^{2d-4})."""
    if c.d < 2:
        raise ValueError("det_a1_sq requires d >= 2")
    if g is None:
        g = g_vector(c)
    val = g(z)
    return float(np.real(np.vdot(val, val))) / (c.d**2 * (1 + abs(z) ** 2) ** (2 * c.d - 4))


@dataclass(frozen=True)
class RamificationReport:
    """Zeros of dF_1 ^ dF_2 counted with multiplicity.

    For non-degenerate curves r_index = (2d-4) - deg([g]) where [g] is the
    projectivized g-vector after removing its common polynomial content.
    """

    degenerate: bool
    r_index: int | None
    deg_g: int | None
    finite_zeros: list
    zero_at_infinity_mult: int | None
    condition: float
    ill_conditioned: bool

    def as_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "r_index": self.r_index,
            "deg_g": self.deg_g,
            "finite_zeros": [
                {"re": float(z.real), "im": float(z.imag), "multiplicity": m}
                for z, m in self.finite_zeros
            ],
            "zero_at_infinity_mult": self.zero_at_infinity_mult,
            "condition": self.condition,
            "ill_conditioned": self.ill_conditioned,
        }


def _component_roots(coeffs: np.ndarray, tol: float) -> np.ndarray:
    """Roots of a scalar polynomial given ascending coefficients."""
    c = np.asarray(coeffs, dtype=complex)
    nz = np.where(np.abs(c) > tol)[0]
    if nz.size == 0 or nz[-1] == 0:
        return np.zeros(0, dtype=complex)
    c = c[: nz[-1] + 1]
    return np.roots(c[::-1])


def analyze_g(g: PolyVec, top_degree: int, tol: float) -> RamificationReport:
    """Ramification bookkeeping for a g-vector with expected degree cap.

    tol is the absolute coefficient threshold below which entries are treated
    as zero.  The common content across components is found by clustering the
    per-component roots with radius CLUSTER_RADIUS * max(1, |root|).
    """
    arr = g.coeffs
    if arr.size == 0 or np.abs(arr).max() <= tol:
        return RamificationReport(True, None, None, [], None, np.inf, False)

    comps = [arr[:, i] for i in range(arr.shape[1]) if np.abs(arr[:, i]).max() > tol]
    degs = []
    all_roots = []
    for comp in comps:
        nz = np.where(np.abs(comp) > tol)[0]
        degs.append(int(nz[-1]))
        all_roots.append(_component_roots(comp, tol))
    max_deg = max(degs)
    inf_mult = top_degree - max_deg

    pivot = int(np.argmin([r.size for r in all_roots]))
    pivot_roots = list(all_roots[pivot])

    # Greedy clustering of the pivot component's roots.
    clusters: list[list[complex]] = []
    for r in sorted(pivot_roots, key=lambda w: (w.real, w.imag)):
        placed = False
        for cl in clusters:
            center = np.mean(cl)
            if abs(r - center) <= CLUSTER_RADIUS * max(1.0, abs(center)):
                cl.append(r)
                placed = True
                break
        if not placed:
            clusters.append([r])

    finite = []
    content_deg = 0
    condition = np.inf
    for cl in clusters:
        center = complex(np.mean(cl))
        radius = CLUSTER_RADIUS * max(1.0, abs(center))
        counts = []
        for roots in all_roots:
            inside = np.abs(roots - center) <= radius
            counts.append(int(inside.sum()))
            outside = np.abs(roots[~inside] - center)
            if outside.size:
                condition = min(condition, float(outside.min() / radius))
        mult = min(counts)
        if mult >= 1:
            finite.append((center, mult))
            content_deg += mult

    deg_g = max_deg - content_deg
    r_index = inf_mult + content_deg
    return RamificationReport(
        degenerate=False,
        r_index=r_index,
        deg_g=deg_g,
        finite_zeros=finite,
        zero_at_infinity_mult=inf_mult,
        condition=condition,
        ill_conditioned=bool(condition < 10.0),
    )


def ramification(c: Curve, tol: float = DEGENERACY_TOL) -> RamificationReport:
    """Ramification report of a curve; degenerate means g identically zero."""
    if c.d < 2:
        raise ValueError("ramification requires d >= 2")
    g = g_vector(c)
    thr = tol * max(coefficient_scale(c) ** 2, np.finfo(float).tiny)
    return analyze_g(g, 2 * c.d - 4, thr)


# ---------------------------------------------------------------------------
# Curvature via exact differentiation of the bivariate Hermitian polynomial
# P(z, zbar) = 1 + |F_1|^2 + |F_2|^2 + |F_1 ^ F_2|^2.
# ---------------------------------------------------------------------------


def _dz(C: np.ndarray) -> np.ndarray:
    if C.shape[0] <= 1:
        return np.zeros((1, C.shape[1]), dtype=complex)
    return C[1:, :] * np.arange(1, C.shape[0])[:, None]


def _dzbar(C: np.ndarray) -> np.ndarray:
    if C.shape[1] <= 1:
        return np.zeros((C.shape[0], 1), dtype=complex)
    return C[:, 1:] * np.arange(1, C.shape[1])[None, :]


def _mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1), dtype=complex)
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            if A[i, j] != 0:
                out[i : i + B.shape[0], j : j + B.shape[1]] += A[i, j] * B
    return out


def _sub(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    rows = max(A.shape[0], B.shape[0])
    cols = max(A.shape[1], B.shape[1])
    out = np.zeros((rows, cols), dtype=complex)
    out[: A.shape[0], : A.shape[1]] = A
    out[: B.shape[0], : B.shape[1]] -= B
    return out


def _eval(C: np.ndarray, z: complex) -> complex:
    zp = z ** np.arange(C.shape[0])
    zq = z ** np.arange(C.shape[1])
    return complex(zp @ C @ np.conj(zq))


@dataclass(frozen=True, eq=False)
class CurvatureModel:
    """Precomputed polynomial data for sampling K(z) on one curve."""

    P: np.ndarray = field(repr=False)
    N: np.ndarray = field(repr=False)
    Nz: np.ndarray = field(repr=False)
    Nzz: np.ndarray = field(repr=False)

    def density(self, z: complex) -> float:
        """Metric density lambda^2 = d_z d_zbar log P at z."""
        p = np.real(_eval(self.P, z))
        nv = np.real(_eval(self.N, z))
        if p <= 0:
            raise NonImmersionError(f"lift norm non-positive at z={z}")
        return nv / p**2

    def k_at(self, z: complex) -> float:
        p = np.real(_eval(self.P, z))
        nv = np.real(_eval(self.N, z))
        if p <= 0 or nv <= 0:
            raise NonImmersionError(f"metric density non-positive at z={z}")
        nz = _eval(self.Nz, z)
        nzz = np.real(_eval(self.Nzz, z))
        return float(4.0 - 2.0 * p**2 * (nzz * nv - abs(nz) ** 2) / nv**3)


def curvature_model(c: Curve) -> CurvatureModel:
    P = gram_actual(c)
    N = _sub(_mul(_dz(_dzbar(P)), P), _mul(_dz(P), _dzbar(P)))
    Nz = _dz(N)
    Nzz = _dzbar(Nz)
    return CurvatureModel(P, N, Nz, Nzz)


def curvature_at(c: Curve, z: complex) -> float:
    """Gauss curvature of the induced metric, K = -(2/lam^2) d_z d_zbar log lam^2."""
    return curvature_model(c).k_at(z)


def gauss_slack(c: Curve, z: complex, model: CurvatureModel | None = None, g: PolyVec | None = None) -> float:
    """4 - K(z) - 8 |det A_1|^2 (z); equals |A|^2 / 2 >= 0 on actual immersions."""
    if model is None:
        model = curvature_model(c)
    return 4.0 - model.k_at(z) - 8.0 * det_a1_sq(c, z, g=g)


# ---------------------------------------------------------------------------
# Degree-bound probes.
# ---------------------------------------------------------------------------


def _indexed(values):
    """Accept dict-like or sequence keyed by the subscript used in formulas."""
    if hasattr(values, "keys"):
        return dict(values)
    return {i: v for i, v in enumerate(values)}


def lemma_q(d: int, rho: int, lam, a1) -> MultiVec:
    """The telescoping double sum sum_k sum_j lam_{d-j} a_1^{(rho+k)} ^ a_1^{(d-k+j)}.

    Mathematically zero for every choice of constants and vectors; exposed so
    the cancellation can be checked numerically.  lam and a1 are indexed by
    their formula subscripts (dicts, or sequences where position = subscript).
    """
    if not 1 <= rho <= d:
        raise ValueError(f"rho must satisfy 1 <= rho <= d, got rho={rho}, d={d}")
    lam_map = _indexed(lam)
    a1_map = _indexed(a1)
    vecs = {k: np.asarray(v, dtype=complex).reshape(-1) for k, v in a1_map.items() if v is not None}
    if not vecs:
        raise ValueError("no coefficient vectors supplied")
    n = len(next(iter(vecs.values())))
    out = np.zeros(comb(n, 2), dtype=complex)
    for k in range(1, d - rho):
        for j in range(k):
            try:
                lam_dj = complex(lam_map[d - j])
                u = vecs[rho + k]
                v = vecs[d - k + j]
            except KeyError as exc:
                raise ValueError(f"missing index {exc} in lemma inputs") from exc
            out += lam_dj * wedge2(u, v)
    return MultiVec(n, 2, out)


@dataclass(frozen=True)
class TailProbeReport:
    """Result of resolving the lambda-chain a_2^(rho) = sum_j lam_{tau-j} a_1^(rho+j).

    residual is the worst deviation of the chain identity; tail_violation is
    the largest |W_beta| left above the chosen tau.
    """

    tau: int | None
    lam: dict
    residual: float
    tail_violation: float
    dim_bound_ok: bool
    flagged: bool
    message: str
    frame_moved: bool

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "lam": {str(k): [v.real, v.imag] for k, v in self.lam.items()},
            "residual": self.residual,
            "tail_violation": self.tail_violation,
            "dim_bound_ok": self.dim_bound_ok,
            "flagged": self.flagged,
            "message": self.message,
            "frame_moved": self.frame_moved,
        }


def _chain_fit(a1: np.ndarray, a2: np.ndarray, d: int, tau: int):
    """Solve the lambda-chain for one candidate tau; returns (lam, residual)."""
    piv = a1[tau]
    piv_sq = float(np.real(np.vdot(piv, piv)))
    lam: dict[int, complex] = {}
    for rho in range(tau, d - tau, -1):
        rhs = a2[rho].astype(complex)
        for j in range(tau - rho):
            rhs = rhs - lam[tau - j] * a1[rho + j]
        lam[rho] = complex(np.vdot(piv, rhs) / piv_sq) if piv_sq > 0 else 0.0
    residual = 0.0
    for rho in range(tau, d - tau, -1):
        lhs = a2[rho].astype(complex)
        for j in range(tau - rho + 1):
            lhs = lhs - lam[tau - j] * a1[rho + j]
        residual = max(residual, float(np.linalg.norm(lhs)))
    return lam, residual


def tail_probe(c: Curve, tol: float = 1e-8) -> TailProbeReport:
    """Recover the lambda-chain forced on constant-curvature curves.

    Candidate cut indices tau (largest index with |W_tau| > tol * scale, down
    to ceil(d/2)) are each fitted by back-substitution from rho = tau to
    d - tau + 1, least squares against a_1^(tau); the reported tau minimizes
    max(chain residual, tail violation), which on exact curves is exactly the
    largest nonzero index.  A near-zero pivot a_1^(tau) is first repaired by
    the frame move F_1 <- F_1 + F_2, which leaves the chain hypotheses intact.
    """
    d = c.d
    n = c.n
    W, _ = wv_arrays(c)
    norms = np.linalg.norm(W, axis=1)
    scale = norms.max()
    dim_ok = fullness_rank(c) <= d
    if scale == 0:
        return TailProbeReport(None, {}, 0.0, 0.0, dim_ok, True, "all W_alpha vanish", False)
    thr = tol * max(1.0, scale)
    nz = np.where(norms > thr)[0]
    if nz.size == 0:
        return TailProbeReport(None, {}, 0.0, 0.0, dim_ok, True, "all W_alpha below tolerance", False)
    top = int(nz[-1])
    if top > d:
        return TailProbeReport(
            top, {}, 0.0, 0.0, dim_ok, True, f"W_{top} nonzero beyond claimed degree {d}", False
        )
    lo = ceil(d / 2)
    if top < lo:
        return TailProbeReport(
            top, {}, 0.0, 0.0, dim_ok, True, f"tau={top} < ceil(d/2)={lo}; chain assumption violated", False
        )

    best = None
    for tau in range(top, lo - 1, -1):
        if norms[tau] <= thr:
            continue
        a1 = W[: d + 1, :n]
        a2 = W[: d + 1, n:]
        # The chain divides by a_1^(tau); a shear F_1 <- F_1 + t F_2 keeps the
        # hypotheses intact and can make the pivot well conditioned.
        shears = (0.0, 1.0, -1.0, 1.0j, -1.0j)
        t_best = max(shears, key=lambda t: np.linalg.norm(a1[tau] + t * a2[tau]))
        moved = False
        if np.linalg.norm(a1[tau]) < 0.8 * np.linalg.norm(a1[tau] + t_best * a2[tau]):
            a1 = a1 + t_best * a2
            moved = True
        lam, chain_res = _chain_fit(a1, a2, d, tau)
        tail = float(norms[tau + 1 : d + 1].max()) if tau < d else 0.0
        total = max(chain_res, tail)
        if best is None or total < best[0]:
            best = (total, tau, lam, chain_res, tail, moved)

    if best is None:
        return TailProbeReport(top, {}, 0.0, 0.0, dim_ok, True, "no admissible tau", False)
    _, tau, lam, chain_res, tail, moved = best
    return TailProbeReport(tau, lam, chain_res, tail, dim_ok, False, "", moved)
