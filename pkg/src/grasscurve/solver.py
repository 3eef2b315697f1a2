"""Gauge-fixed nonlinear least-squares feasibility search for the
constant-curvature constraint system at prescribed (n, d).

The unknowns are the d ordered vectors W_a in C^{2n}.  The residual vector
stacks, as separate real and imaginary parts:

  cc1:  every entry of V_beta for beta in {1} u {d+1..2d},
  cc2:  |W_a|^2 + |V_a|^2 - C(d, a) for a = 1..d,
  cc3:  <W_a, W_b> + <V_a, V_b> for 1 <= a < b <= d,

with V_p = sum_{a+b=p} a_1^(a) ^ a_2^(b).  Feasibility is declared only when
a restart reaches the residual tolerance AND the coefficient span is full;
absence of a solution is never claimed, only "no solution found under budget".
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .curve import Curve, fullness_rank
from .exterior import pair_indices

EVIDENCE_LABEL = "search evidence, not proof"

# The fullness filter deliberately uses a coarser rank cutoff than the curve
# module default: near a rank-deficient solution branch LM can park the small
# singular value anywhere below the residual floor, and 1e-8 would let such
# ghosts count as full.
SOLVER_RANK_TOL = 1e-4


@dataclass(frozen=True)
class SearchProblem:
    """Search configuration for one (n, d) cell."""

    n: int
    d: int
    restarts: int = 200
    max_iters: int = 500
    tol_feasible: float = 1e-10
    gauge_fix: frozenset = frozenset({"fix_a1_svd", "fix_scale"})
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        object.__setattr__(self, "gauge_fix", frozenset(self.gauge_fix))


@dataclass(frozen=True)
class SearchReport:
    """Outcome of a multi-restart search.

    best_residual is the best final residual norm among restarts whose end
    point passed the fullness filter (None if no restart ended full);
    best_any_residual ignores fullness.  feasible implies best_residual is
    at most tol_feasible and the reported curve is full.
    """

    n: int
    d: int
    feasible: bool
    best_curve: Curve | None
    best_residual: float | None
    full: bool
    best_any_residual: float
    restart_stats: dict
    restarts_run: int
    restarts_to_hit: int | None
    wall_time: float
    evidence: str

    def as_dict(self) -> dict:
        from .curve import curve_to_dict

        return {
            "n": self.n,
            "d": self.d,
            "feasible": self.feasible,
            "best_curve": curve_to_dict(self.best_curve) if self.best_curve else None,
            "best_residual": self.best_residual,
            "full": self.full,
            "best_any_residual": self.best_any_residual,
            "restart_stats": self.restart_stats,
            "restarts_run": self.restarts_run,
            "restarts_to_hit": self.restarts_to_hit,
            "wall_time": self.wall_time,
            "evidence": self.evidence,
        }


def _as_w(W) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[1] % 2:
        raise ValueError(f"W must have shape (d, 2n), got {W.shape}")
    return W


def _v_array(W: np.ndarray) -> np.ndarray:
    """V_p rows (subscript-indexed, shape (2d+1, C(n,2)))."""
    d, two_n = W.shape
    n = two_n // 2
    m2 = comb(n, 2)
    a1 = W[:, :n]
    a2 = W[:, n:]
    V = np.zeros((2 * d + 1, m2), dtype=complex)
    if m2 == 0:
        return V
    ii, jj = pair_indices(n)
    i0, j0 = ii - 1, jj - 1
    pair = a1[:, None, i0] * a2[None, :, j0] - a1[:, None, j0] * a2[None, :, i0]
    idx = (np.arange(1, d + 1)[:, None] + np.arange(1, d + 1)[None, :]).reshape(-1)
    np.add.at(V, idx, pair.reshape(d * d, m2))
    return V


def _cc1_subscripts(d: int) -> list:
    return [1] + list(range(d + 1, 2 * d + 1))


def residuals(W) -> np.ndarray:
    """Real residual vector of (cc1), (cc2), (cc3) for W of shape (d, 2n).

    Order: per beta in {1, d+1..2d} the Re then Im parts of V_beta; then the
    d diagonal defects; then per pair (a, b) lexicographic the Re and Im of
    the Hermitian defect.
    """
    W = _as_w(W)
    d = W.shape[0]
    V = _v_array(W)
    out = []
    for b in _cc1_subscripts(d):
        out.append(V[b].real)
        out.append(V[b].imag)
    gram = W @ W.conj().T + V[1 : d + 1] @ V[1 : d + 1].conj().T
    diag = np.real(np.diag(gram)) - np.array(
        [comb(d, a) for a in range(1, d + 1)], dtype=float
    )
    out.append(diag)
    ia, ib = np.triu_indices(d, k=1)
    offs = gram[ia, ib]
    inter = np.empty(2 * offs.size)
    inter[0::2] = offs.real
    inter[1::2] = offs.imag
    out.append(inter)
    return np.concatenate(out) if out else np.zeros(0)


def _dv_tensor(W: np.ndarray) -> np.ndarray:
    """DV[p, t, a-1, comp] = dV_p[t] / dW[a, comp] (complex Wirtinger)."""
    d, two_n = W.shape
    n = two_n // 2
    m2 = comb(n, 2)
    DV = np.zeros((2 * d + 1, m2, d, two_n), dtype=complex)
    if m2 == 0:
        return DV
    ii, jj = pair_indices(n)
    i0, j0 = ii - 1, jj - 1
    a1 = W[:, :n]
    a2 = W[:, n:]
    t_idx = np.arange(m2)
    # E1[b-1, t, i] = (e_i ^ a_2^(b))[t] and E2[a-1, t, j] = (a_1^(a) ^ e_j)[t];
    # V_{a+b} is bilinear, so these are the two Wirtinger blocks.
    E1 = np.zeros((d, m2, n), dtype=complex)
    E1[:, t_idx, i0] += a2[:, j0]
    E1[:, t_idx, j0] -= a2[:, i0]
    E2 = np.zeros((d, m2, n), dtype=complex)
    E2[:, t_idx, j0] += a1[:, i0]
    E2[:, t_idx, i0] -= a1[:, j0]
    for a in range(1, d + 1):
        DV[a + 1 : a + d + 1, :, a - 1, :n] = E1  # p = a + b over b = 1..d
        DV[a + 1 : a + d + 1, :, a - 1, n:] = E2  # p = b + a over b = 1..d
    return DV


def jacobian(W) -> np.ndarray:
    """Exact Jacobian of residuals(W) with respect to (Re W, Im W) flattened.

    Columns are ordered: all Re entries of W row-major, then all Im entries.
    Row order matches residuals().
    """
    W = _as_w(W)
    d, two_n = W.shape
    K = d * two_n
    V = _v_array(W)
    DV = _dv_tensor(W).reshape(2 * d + 1, -1, K)
    m2 = DV.shape[1]

    blocks = []

    # cc1: holomorphic rows, per beta all Re parts then all Im parts.
    if m2:
        for b in _cc1_subscripts(d):
            G = DV[b]
            blocks.append(np.concatenate([G.real, -G.imag], axis=1))
            blocks.append(np.concatenate([G.imag, G.real], axis=1))

    # cc2: real rows 2 Re(G), G = conj(W_a) (at block a) + conj(V_a) . DV_a.
    Vd = V[1 : d + 1]
    DVd = DV[1 : d + 1]
    G2 = np.einsum("at,atk->ak", Vd.conj(), DVd) if m2 else np.zeros((d, K), dtype=complex)
    for a in range(d):
        G2[a, a * two_n : (a + 1) * two_n] += np.conj(W[a])
    blocks.append(np.concatenate([2 * G2.real, -2 * G2.imag], axis=1))

    # cc3: mixed rows, Wirtinger pair (G, H), interleaved Re/Im per (a, b).
    ia, ib = np.triu_indices(d, k=1)
    if ia.size:
        if m2:
            Ga = np.einsum("pt,ptk->pk", Vd.conj()[ib], DVd[ia])
            Hb = np.einsum("pt,ptk->pk", Vd[ia], DVd.conj()[ib])
        else:
            Ga = np.zeros((ia.size, K), dtype=complex)
            Hb = np.zeros((ia.size, K), dtype=complex)
        for r in range(ia.size):
            a, b = ia[r], ib[r]
            Ga[r, a * two_n : (a + 1) * two_n] += np.conj(W[b])
            Hb[r, b * two_n : (b + 1) * two_n] += W[a]
        GHp = Ga + Hb
        GHm = Ga - Hb
        re_rows = np.concatenate([GHp.real, -GHm.imag], axis=1)
        im_rows = np.concatenate([GHp.imag, GHm.real], axis=1)
        inter = np.empty((2 * ia.size, 2 * K))
        inter[0::2] = re_rows
        inter[1::2] = im_rows
        blocks.append(inter)

    return np.vstack(blocks) if blocks else np.zeros((0, 2 * K))


# ---------------------------------------------------------------------------
# Gauge-fixed parametrization and the LM core.
# ---------------------------------------------------------------------------


def _gauge_mask(n: int, d: int, pin_a1: bool) -> np.ndarray:
    """Boolean mask over (Re W | Im W) flattened; True = free parameter."""
    two_n = 2 * n
    K = d * two_n
    mask = np.ones(2 * K, dtype=bool)
    if pin_a1 and d >= 1:
        mask[:two_n] = False
        mask[K : K + two_n] = False
        mask[0] = True  # Re a_1^(1)[1] = s
        mask[n + 1] = True  # Re a_2^(1)[2] = t
    return mask


def _w_from_x(x: np.ndarray, mask: np.ndarray, n: int, d: int) -> np.ndarray:
    full = np.zeros(mask.shape[0])
    full[mask] = x
    K = d * 2 * n
    return (full[:K] + 1j * full[K:]).reshape(d, 2 * n)


def _x_from_w(W: np.ndarray, mask: np.ndarray) -> np.ndarray:
    flat = np.concatenate([W.real.reshape(-1), W.imag.reshape(-1)])
    return flat[mask]


@dataclass
class _RestartResult:
    residual: float
    full: bool
    W: np.ndarray = field(repr=False)
    iters: int = 0


def _restart_rank(W: np.ndarray, n: int) -> int:
    rows = np.concatenate([W[:, :n], W[:, n:]], axis=0)
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > SOLVER_RANK_TOL * s[0]))


def _lm_minimize(x0: np.ndarray, mask: np.ndarray, n: int, d: int, max_iters: int) -> tuple:
    x = x0.copy()
    W = _w_from_x(x, mask, n, d)
    r = residuals(W)
    cost = float(r @ r)
    J = jacobian(W)[:, mask]
    mu = 1e-3 * max(float(np.mean(np.sum(J * J, axis=0))), 1e-12)
    eye = np.eye(mask.sum())
    rejects = 0
    it = 0
    for it in range(1, max_iters + 1):
        g = J.T @ r
        if float(np.abs(g).max()) <= 1e-12:
            break  # first-order stationary: converged or stalled in a local min
        try:
            step = np.linalg.solve(J.T @ J + mu * eye, -g)
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        x_new = x + step
        W_new = _w_from_x(x_new, mask, n, d)
        r_new = residuals(W_new)
        cost_new = float(r_new @ r_new)
        if cost_new < cost:
            x, W, r, cost = x_new, W_new, r_new, cost_new
            J = jacobian(W)[:, mask]
            mu = max(mu * 0.1, 1e-14)
            rejects = 0
            if cost <= 1e-30:
                break
            if float(np.linalg.norm(step)) <= 1e-13 * (1.0 + float(np.linalg.norm(x))):
                break
        else:
            mu *= 10.0
            rejects += 1
            if mu > 1e14 or rejects >= 25:
                break
    return W, float(np.sqrt(cost)), it


def _init_w(rng: np.random.Generator, n: int, d: int, gauge: frozenset) -> np.ndarray:
    W = rng.standard_normal((d, 2 * n)) + 1j * rng.standard_normal((d, 2 * n))
    if "fix_scale" in gauge:
        norms = np.linalg.norm(W, axis=1)
        targets = np.array([np.sqrt(comb(d, a)) for a in range(1, d + 1)])
        W *= (targets / np.maximum(norms, 1e-30))[:, None]
    if "fix_a1_svd" in gauge:
        u = rng.random()
        s = np.sqrt(d) * np.cos(0.5 * np.pi * u)
        t = np.sqrt(d) * np.sin(0.5 * np.pi * u)
        W[0] = 0.0
        W[0, 0] = s
        W[0, n + 1] = t
    return W


def _gn_polish(x: np.ndarray, mask: np.ndarray, n: int, d: int, iters: int = 100):
    """Local Gauss-Newton refinement with minimal-norm steps and backtracking.

    Much faster than damped LM in the nearly-flat valleys the constraint
    manifold produces; only used to polish points that are already close.
    """
    W = _w_from_x(x, mask, n, d)
    r = residuals(W)
    cost = float(r @ r)
    for _ in range(iters):
        if cost <= 1e-28:
            break
        J = jacobian(W)[:, mask]
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-10)
        t = 1.0
        accepted = False
        for _ in range(30):
            x_new = x + t * step
            W_new = _w_from_x(x_new, mask, n, d)
            r_new = residuals(W_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        x, W, r, cost = x_new, W_new, r_new, cost_new
    return W, float(np.sqrt(cost))


def _cleanup_w(W: np.ndarray, res: float, n: int, d: int, gauge: frozenset, tol: float):
    """Prefer the representative with exactly-zero tiny W rows.

    LM can park in nearly-flat directions, leaving ~1e-4 coefficients whose
    exact counterpart is zero; they poison the conditioning of downstream
    probes.  Rows below 1e-3 of scale are zeroed and frozen, the rest
    re-polished; the cleaned point is kept only if it is again feasible and
    full, otherwise the original is returned untouched.
    """
    norms = np.linalg.norm(W, axis=1)
    scale = norms.max()
    if scale == 0:
        return W, res
    drop = norms <= 1e-3 * scale
    two_n = 2 * n
    K = d * two_n
    mask = _gauge_mask(n, d, "fix_a1_svd" in gauge)
    if drop.any():
        W2 = W.copy()
        W2[drop] = 0.0
        freeze = np.zeros(2 * K, dtype=bool)
        for a in np.where(drop)[0]:
            freeze[a * two_n : (a + 1) * two_n] = True
            freeze[K + a * two_n : K + (a + 1) * two_n] = True
        mask2 = mask & ~freeze
        W3, r3 = _gn_polish(_x_from_w(W2, mask2), mask2, n, d)
        if r3 <= tol and _restart_rank(W3, n) == n:
            return W3, r3
        return W, res
    W3, r3 = _gn_polish(_x_from_w(W, mask), mask, n, d, iters=30)
    if r3 <= min(res, tol) and _restart_rank(W3, n) == n:
        return W3, r3
    return W, res


def _run_restart(args) -> _RestartResult:
    n, d, seed, ridx, max_iters, gauge, tol = args
    rng = np.random.default_rng([seed, ridx])
    mask = _gauge_mask(n, d, "fix_a1_svd" in gauge)
    W0 = _init_w(rng, n, d, gauge)
    x0 = _x_from_w(W0, mask)
    W, res, iters = _lm_minimize(x0, mask, n, d, max_iters)
    full = _restart_rank(W, n) == n
    if full and res <= tol:
        W, res = _cleanup_w(W, res, n, d, gauge, tol)
    return _RestartResult(res, full, W, iters)


def curve_from_w(W, n: int, d: int) -> Curve:
    """Inverse of the coefficient-vector map: W rows become the A_alpha."""
    W = _as_w(W)
    A = np.stack([W[:, :n], W[:, n:]], axis=1)
    return Curve(n, d, A)


def _threads_from_env() -> int:
    try:
        return max(1, int(os.environ.get("GRASSCURVE_THREADS", "1")))
    except ValueError:
        return 1


def search(p: SearchProblem, threads: int | None = None) -> SearchReport:
    """Multi-restart damped least-squares search; deterministic given rng_seed.

    Restart k uses the RNG stream seeded by (rng_seed, k), so serial and
    parallel runs see identical starts.  The report covers restarts
    0..restarts_to_hit when a feasible point is found.
    """
    t0 = time.perf_counter()
    threads = _threads_from_env() if threads is None else max(1, threads)
    args = [
        (p.n, p.d, p.rng_seed, k, p.max_iters, p.gauge_fix, p.tol_feasible)
        for k in range(p.restarts)
    ]
    results: list[_RestartResult] = []
    hit = None
    if threads == 1:
        for k, a in enumerate(args):
            res = _run_restart(a)
            results.append(res)
            if res.residual <= p.tol_feasible and res.full:
                hit = k
                break
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(2 * threads, 8)
            k0 = 0
            while k0 < len(args) and hit is None:
                batch = list(pool.map(_run_restart, args[k0 : k0 + chunk]))
                for off, res in enumerate(batch):
                    results.append(res)
                    if res.residual <= p.tol_feasible and res.full:
                        hit = k0 + off
                        break
                k0 += chunk
        if hit is not None:
            results = results[: hit + 1]

    finals = np.array([r.residual for r in results])
    full_finals = [r for r in results if r.full]
    best_any = float(finals.min()) if finals.size else np.inf
    best_full = min((r.residual for r in full_finals), default=None)
    feasible = hit is not None
    best_curve = None
    best_is_full = False
    if feasible:
        best_curve = curve_from_w(results[hit].W, p.n, p.d)
        best_is_full = True
    elif full_finals:
        bw = min(full_finals, key=lambda r: r.residual)
        best_curve = curve_from_w(bw.W, p.n, p.d)
        best_is_full = True

    hist: dict[str, int] = {}
    for r in results:
        key = "<=1e-12" if r.residual <= 1e-12 else f"1e{int(np.ceil(np.log10(max(r.residual, 1e-300))))}"
        hist[key] = hist.get(key, 0) + 1

    return SearchReport(
        n=p.n,
        d=p.d,
        feasible=feasible,
        best_curve=best_curve,
        best_residual=best_full,
        full=best_is_full,
        best_any_residual=best_any,
        restart_stats=hist,
        restarts_run=len(results),
        restarts_to_hit=hit,
        wall_time=time.perf_counter() - t0,
        evidence="feasible point found" if feasible else EVIDENCE_LABEL,
    )


@dataclass(frozen=True)
class ScanRow:
    n: int
    d: int
    feasible: bool
    best_residual: float | None
    best_any_residual: float
    full: bool
    restarts_run: int
    restarts_to_hit: int | None
    wall_time: float
    evidence: str

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "feasible": self.feasible,
            "best_residual": self.best_residual,
            "best_any_residual": self.best_any_residual,
            "full": self.full,
            "restarts_run": self.restarts_run,
            "restarts_to_hit": self.restarts_to_hit,
            "wall_time": self.wall_time,
            "evidence": self.evidence,
        }


def feasibility_scan(
    n: int,
    d_min: int,
    d_max: int,
    template: SearchProblem | None = None,
    threads: int | None = None,
    keep_curves: bool = False,
):
    """Independent search per degree; returns (rows, reports)."""
    rows = []
    reports = {}
    for d in range(d_min, d_max + 1):
        base = template or SearchProblem(n=n, d=d)
        problem = SearchProblem(
            n=n,
            d=d,
            restarts=base.restarts,
            max_iters=base.max_iters,
            tol_feasible=base.tol_feasible,
            gauge_fix=base.gauge_fix,
            rng_seed=base.rng_seed,
        )
        rep = search(problem, threads=threads)
        rows.append(
            ScanRow(
                n=n,
                d=d,
                feasible=rep.feasible,
                best_residual=rep.best_residual,
                best_any_residual=rep.best_any_residual,
                full=rep.full,
                restarts_run=rep.restarts_run,
                restarts_to_hit=rep.restarts_to_hit,
                wall_time=rep.wall_time,
                evidence=rep.evidence,
            )
        )
        if keep_curves:
            reports[d] = rep
    return rows, reports
