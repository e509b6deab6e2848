"""Multigrid hierarchy construction and the V-cycle."""
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .aggregation import aggregate, tentative_prolongator
from .errors import NegativeEigenvalueError, SetupError, ZeroDiagonalError
from .filtering import (
    diag_one_norm,
    diag_standard,
    filter_offlmp,
    filter_standard,
    safeguard,
    sprsfy,
)
from .prolongator import (
    RowFix,
    SmootherConfig,
    constrain_rows_report,
    estimate_lambda_max,
    smooth_prolongator,
)
from .sparse import diagonal, galerkin, spmv, transpose
from .strength import classic_strength, distance_laplacian

# above this size the coarsest level uses a sparse LU instead of a dense one
DENSE_COARSE_LIMIT = 4000


@dataclass
class SetupConfig:
    """Hierarchy construction options.

    The Chebyshev relaxation runs on ``D^-1 A`` with the interval
    ``[lmax / cheby_ratio, lmax]``, ``lmax`` being ``cheby_boost`` times a
    power-method estimate. ``cheby_on_raw_matrix`` drops the diagonal
    scaling.
    """

    theta: float = 0.0
    strength_source: str = "matrix"
    coarse_size: int = 1000
    max_levels: int = 10
    smoother: str = "chebyshev"
    cheby_degree: int = 2
    cheby_sweeps: int = 1
    cheby_ratio: float = 10.0
    cheby_boost: float = 1.1
    cheby_power_iters: int = 10
    cheby_on_raw_matrix: bool = False
    jacobi_omega: float = 2.0 / 3.0
    jacobi_sweeps: int = 1
    prolongator: SmootherConfig = field(default_factory=SmootherConfig)

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.strength_source not in ("matrix", "distance_laplacian"):
            raise ValueError(f"unknown strength_source {self.strength_source!r}")
        if self.coarse_size < 1:
            raise ValueError("coarse_size must be >= 1")
        if self.max_levels < 2:
            raise ValueError("max_levels must be >= 2")
        if self.smoother not in ("chebyshev", "jacobi"):
            raise ValueError(f"unknown smoother {self.smoother!r}")
        if self.cheby_degree < 0 or self.cheby_sweeps < 0:
            raise ValueError("Chebyshev degree and sweeps must be nonnegative")
        if self.cheby_ratio <= 1.0:
            raise ValueError("cheby_ratio must exceed 1")


@dataclass
class Level:
    A: object
    P: object = None
    R: object = None
    dinv: np.ndarray = None
    cheby_interval: tuple = None
    coarse_solver: object = None
    stats: dict = field(default_factory=dict)


@dataclass
class Hierarchy:
    levels: list
    config: SetupConfig

    @property
    def operator_complexity(self):
        return sum(lvl.A.nnz for lvl in self.levels) / self.levels[0].A.nnz

    @property
    def num_levels(self):
        return len(self.levels)

    @property
    def skipped_lumping_rows(self):
        return sum(lvl.stats.get("skipped_rows", 0) for lvl in self.levels)

    def vcycle(self, f, u=None, level=0):
        return vcycle(self, f, u, level)

    def precondition(self, r):
        """One V-cycle from a zero initial guess."""
        return vcycle(self, r, None, 0)

    def summary(self):
        rows = []
        for k, lvl in enumerate(self.levels):
            row = {"level": k, "n": lvl.A.nrows, "nnz": lvl.A.nnz}
            row.update(lvl.stats)
            rows.append(row)
        return {
            "levels": rows,
            "operator_complexity": self.operator_complexity,
            "variants": list(self.config.prolongator.variants),
        }

    def summary_text(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)


# ------------------------------------------------------------------ smoothers

def chebyshev_smoother(A, x, f, degree, interval, dinv=None):
    """Chebyshev iteration of the given degree on ``D^-1 A``.

    ``interval = (lo, hi)`` bounds the part of the spectrum of ``D^-1 A``
    to damp. Returns the updated iterate; ``x`` is not modified.
    """
    lo, hi = interval
    if not (lo > 0.0 and hi > lo):
        raise ValueError(f"invalid Chebyshev interval {interval}")
    x = np.array(x, dtype=np.float64)
    if degree == 0:
        return x
    if dinv is None:
        dinv = np.ones(A.nrows)
    theta = 0.5 * (hi + lo)
    delta = 0.5 * (hi - lo)
    sigma = theta / delta
    rho = 1.0 / sigma
    r = dinv * (f - spmv(A, x))
    d = r / theta
    for k in range(degree):
        x += d
        if k == degree - 1:
            break
        r -= dinv * spmv(A, d)
        rho_new = 1.0 / (2.0 * sigma - rho)
        d = (rho_new * rho) * d + (2.0 * rho_new / delta) * r
        rho = rho_new
    return x


def jacobi_smoother(A, x, f, omega, dinv, sweeps=1):
    x = np.array(x, dtype=np.float64)
    for _ in range(sweeps):
        x += omega * dinv * (f - spmv(A, x))
    return x


def _smooth(h, lvl, x, f):
    cfg = h.config
    if cfg.smoother == "chebyshev":
        for _ in range(cfg.cheby_sweeps):
            x = chebyshev_smoother(lvl.A, x, f, cfg.cheby_degree, lvl.cheby_interval, lvl.dinv)
        return x
    return jacobi_smoother(lvl.A, x, f, cfg.jacobi_omega, lvl.dinv, cfg.jacobi_sweeps)


def vcycle(h, f, u=None, level=0):
    """Recursive V-cycle on ``A_level u = f``; returns the new iterate."""
    lvl = h.levels[level]
    f = np.asarray(f, dtype=np.float64)
    if lvl.P is None:
        return lvl.coarse_solver(f)
    u = np.zeros(lvl.A.nrows) if u is None else np.array(u, dtype=np.float64)
    u = _smooth(h, lvl, u, f)
    rc = spmv(lvl.R, f - spmv(lvl.A, u))
    uc = vcycle(h, rc, None, level + 1)
    u += spmv(lvl.P, uc)
    return _smooth(h, lvl, u, f)


# ---------------------------------------------------------------------- setup

def _coarse_solver(A):
    if A.nrows <= DENSE_COARSE_LIMIT:
        factor = scipy.linalg.lu_factor(A.to_dense(), check_finite=False)
        return lambda f: scipy.linalg.lu_solve(factor, f, check_finite=False)
    lu = scipy.sparse.linalg.splu(A.to_scipy().tocsc())
    return lu.solve


def _smoother_state(A, cfg, level):
    if cfg.cheby_on_raw_matrix:
        d = np.ones(A.nrows)
    else:
        d = diagonal(A)
        if np.any(d == 0.0):
            raise ZeroDiagonalError("zero diagonal entry in relaxation operator", level)
    dinv = 1.0 / d
    interval = None
    if cfg.smoother == "chebyshev":
        lam = cfg.cheby_boost * estimate_lambda_max(A, d, cfg.cheby_power_iters)
        if not lam > 0.0:
            raise SetupError(f"nonpositive smoother eigenvalue estimate {lam:.6g}", level)
        interval = (lam / cfg.cheby_ratio, lam)
    return dinv, interval


def _centroids(coords, agg):
    counts = np.bincount(agg.vertex_to_aggregate, minlength=agg.num_aggregates)
    out = np.empty((agg.num_aggregates, coords.shape[1]))
    for k in range(coords.shape[1]):
        out[:, k] = np.bincount(agg.vertex_to_aggregate, weights=coords[:, k],
                                minlength=agg.num_aggregates) / counts
    return out


def build_prolongator(A, mask, agg, pcfg, level=None):
    """Tentative prolongator, filtering, diagonal choice, smoothing, constraints.

    Returns ``(P, stats)``.
    """
    Pt = tentative_prolongator(agg, A.nrows)
    if pcfg.offlmp:
        Abar = filter_offlmp(A, mask, pcfg.tau)
    else:
        Abar = filter_standard(A, mask)
    stats = {"skipped_rows": int(Abar.skipped_rows.size), "filtered_nnz": Abar.matrix.nnz}
    if pcfg.use_sprsfy:
        Abar = sprsfy(A, Abar, mask, agg)
        stats["sprsfy_nnz"] = Abar.matrix.nnz
    M = Abar.matrix

    if pcfg.diag_kind == "standard":
        d = diag_standard(M)
    else:
        d = diag_one_norm(M)
        if pcfg.diag_kind == "one_norm_safeguarded":
            d = safeguard(d, M)

    if pcfg.omega_rule == "fixed":
        lam = None
        omega = pcfg.omega
    else:
        if pcfg.lambda_estimate == "unit":
            lam = 1.0
        else:
            try:
                lam = estimate_lambda_max(M, d, pcfg.power_iters, pcfg.seed)
            except ZeroDiagonalError as exc:
                raise ZeroDiagonalError(str(exc), level) from None
        if not lam > 0.0:
            if pcfg.diag_kind == "standard":
                raise NegativeEigenvalueError(lam, level)
            # the 1-norm diagonal bounds the spectrum by one in magnitude
            stats["lambda_power"] = lam
            lam = 1.0
        omega = 4.0 / (3.0 * lam)
    stats["lambda"] = lam
    stats["omega"] = omega

    P = smooth_prolongator(M, d, Pt, omega=omega)
    if pcfg.use_constraints:
        P, status = constrain_rows_report(P, Pt)
        stats["constrained_rows"] = int(np.count_nonzero(status == RowFix.ADJUSTED))
        stats["tentative_rows"] = int(np.count_nonzero(status == RowFix.TENTATIVE))
    return P, stats


def setup(A, coords=None, cfg=None):
    """Build the hierarchy for ``A``.

    Coarsening stops when a level has at most ``cfg.coarse_size`` unknowns,
    ``cfg.max_levels`` is reached, or aggregation no longer reduces the
    size. Raises :class:`SetupError` (with the failing level) when the
    prolongator cannot be formed.
    """
    cfg = SetupConfig() if cfg is None else cfg
    if A.nrows != A.ncols:
        raise ValueError("A must be square")
    if cfg.strength_source == "distance_laplacian":
        if coords is None:
            raise ValueError("distance Laplacian strength needs coordinates")
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
    pcfg = cfg.prolongator

    levels = []
    Ak = A
    for k in range(cfg.max_levels - 1):
        if Ak.nrows <= cfg.coarse_size:
            break
        if cfg.strength_source == "distance_laplacian":
            S = distance_laplacian(Ak, coords)
        else:
            S = Ak
        mask = classic_strength(S, cfg.theta)
        agg = aggregate(S, mask)
        if agg.num_aggregates >= Ak.nrows:
            break
        P, stats = build_prolongator(Ak, mask, agg, pcfg, level=k)
        dinv, interval = _smoother_state(Ak, cfg, k)
        stats["aggregates"] = agg.num_aggregates
        R = transpose(P)
        levels.append(Level(Ak, P, R, dinv, interval, stats=stats))
        Ak = galerkin(P, Ak)
        if coords is not None and cfg.strength_source == "distance_laplacian":
            coords = _centroids(coords, agg)

    levels.append(Level(Ak, coarse_solver=_coarse_solver(Ak), stats={"coarse_solve": "lu"}))
    return Hierarchy(levels, cfg)
