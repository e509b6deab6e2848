"""Conjugate gradient and restarted GMRES with a multigrid preconditioner."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .sparse import spmv


@dataclass
class KrylovConfig:
    method: str = "pcg"
    rel_tol: float = 1e-10
    max_iters: int = 500
    restart: int = 30

    def __post_init__(self):
        if self.method not in ("pcg", "gmres"):
            raise ValueError(f"unknown Krylov method {self.method!r}")
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if self.restart < 1 or self.max_iters < 1:
            raise ValueError("restart and max_iters must be >= 1")


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``residual_history[0]`` is the initial residual norm and one entry is
    appended per iteration. ``failure`` names what went wrong, if anything.
    """

    iterations: int
    residual_history: np.ndarray
    converged: bool
    operator_complexity: float = 1.0
    failure: str = None
    skipped_lumping_rows: int = 0
    solution: np.ndarray = field(default=None, repr=False)
    levels: list = field(default_factory=list, repr=False)


def _preconditioner(h):
    if h is None:
        return lambda r: r.copy()
    if callable(h) and not hasattr(h, "precondition"):
        return h
    return h.precondition


def _report(h, **kw):
    if h is not None and hasattr(h, "operator_complexity"):
        kw.setdefault("operator_complexity", h.operator_complexity)
        kw.setdefault("skipped_lumping_rows", h.skipped_lumping_rows)
        kw.setdefault("levels", h.summary()["levels"])
    kw["residual_history"] = np.asarray(kw["residual_history"])
    return SolveReport(**kw)


def pcg(A, f, h=None, cfg=None):
    """Preconditioned CG from a zero initial guess.

    ``h`` is a :class:`~saamg.hierarchy.Hierarchy` (one V-cycle per
    application), any callable ``r -> z``, or ``None`` for no
    preconditioning. Stops when ``||r_k|| <= rel_tol ||r_0||``.
    """
    cfg = KrylovConfig() if cfg is None else cfg
    M = _preconditioner(h)
    f = np.asarray(f, dtype=np.float64)
    x = np.zeros_like(f)
    r = f.copy()
    r0 = np.linalg.norm(r)
    history = [r0]
    if r0 == 0.0:
        return _report(h, iterations=0, residual_history=history, converged=True, solution=x)
    z = M(r)
    p = z.copy()
    rz = r @ z
    for k in range(1, cfg.max_iters + 1):
        Ap = spmv(A, p)
        pAp = p @ Ap
        if not pAp > 0.0:
            return _report(h, iterations=k - 1, residual_history=history, converged=False,
                           failure=f"breakdown: p^T A p = {pAp:.3e}", solution=x)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rn = np.linalg.norm(r)
        history.append(rn)
        if rn <= cfg.rel_tol * r0:
            return _report(h, iterations=k, residual_history=history, converged=True, solution=x)
        z = M(r)
        rz_new = r @ z
        if not rz_new > 0.0:
            return _report(h, iterations=k, residual_history=history, converged=False,
                           failure=f"breakdown: indefinite preconditioner (r^T z = {rz_new:.3e})",
                           solution=x)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return _report(h, iterations=cfg.max_iters, residual_history=history, converged=False,
                   failure="max_iters reached", solution=x)


def gmres(A, f, h=None, cfg=None):
    """Right-preconditioned restarted GMRES from a zero initial guess.

    With right preconditioning the minimized residual is the true one, so
    the stopping test matches :func:`pcg`'s.
    """
    cfg = KrylovConfig(method="gmres") if cfg is None else cfg
    M = _preconditioner(h)
    f = np.asarray(f, dtype=np.float64)
    n = f.size
    x = np.zeros_like(f)
    r = f.copy()
    beta = np.linalg.norm(r)
    r0 = beta
    history = [r0]
    if r0 == 0.0:
        return _report(h, iterations=0, residual_history=history, converged=True, solution=x)
    target = cfg.rel_tol * r0
    m = cfg.restart
    its = 0
    failure = "max_iters reached"
    while its < cfg.max_iters:
        V = np.zeros((m + 1, n))
        Z = np.zeros((m, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        k = 0
        for j in range(m):
            Z[j] = M(V[j])
            w = spmv(A, Z[j])
            for i in range(j + 1):
                H[i, j] = w @ V[i]
                w -= H[i, j] * V[i]
            h_next = np.linalg.norm(w)
            H[j + 1, j] = h_next
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], h_next)
            if denom == 0.0:
                break
            cs[j] = H[j, j] / denom
            sn[j] = h_next / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            its += 1
            k = j + 1
            history.append(abs(g[j + 1]))
            # lucky breakdown: the Krylov space is invariant
            if abs(g[j + 1]) <= target or h_next <= 1e-14 * denom or its >= cfg.max_iters:
                break
            V[j + 1] = w / h_next
        if k == 0:
            failure = "stagnation"
            break
        y = scipy.linalg.solve_triangular(H[:k, :k], g[:k])
        x += y @ Z[:k]
        r = f - spmv(A, x)
        beta = np.linalg.norm(r)
        if beta <= target:
            return _report(h, iterations=its, residual_history=history, converged=True, solution=x)
    return _report(h, iterations=its, residual_history=history, converged=False,
                   failure=failure, solution=x)


def solve(A, f, h=None, cfg=None):
    cfg = KrylovConfig() if cfg is None else cfg
    if cfg.method == "pcg":
        return pcg(A, f, h, cfg)
    return gmres(A, f, h, cfg)
