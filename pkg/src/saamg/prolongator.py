"""Prolongator smoothing, damping eigenvalue estimate and row constraints."""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ._jit import dispatch, njit
from .errors import NegativeEigenvalueError, ZeroDiagonalError
from .filtering import DiagonalApprox
from .sparse import add, scale_rows, spmm, spmv

VARIANTS = ("OneNorm", "OffLmp", "Cnstrnt", "Sprsfy")


@dataclass
class SmootherConfig:
    """Options of the prolongator smoothing step.

    ``diag_kind`` is ``"standard"`` (stored diagonal of the filtered matrix),
    ``"one_norm"`` or ``"one_norm_safeguarded"``. ``lambda_estimate`` is
    ``"power"`` or ``"unit"``; the latter is only sound with a 1-norm
    diagonal, whose scaled operator has spectral radius at most one.
    """

    diag_kind: str = "standard"
    omega_rule: str = "chebyshev_4_3"
    omega: float = 2.0 / 3.0
    lambda_estimate: str = "power"
    power_iters: int = 10
    seed: int = 42
    use_constraints: bool = False
    use_sprsfy: bool = False
    offlmp: bool = False
    tau: float = 1.1

    def __post_init__(self):
        if self.diag_kind not in ("standard", "one_norm", "one_norm_safeguarded"):
            raise ValueError(f"unknown diag_kind {self.diag_kind!r}")
        if self.omega_rule not in ("chebyshev_4_3", "fixed"):
            raise ValueError(f"unknown omega_rule {self.omega_rule!r}")
        if self.lambda_estimate not in ("power", "unit"):
            raise ValueError(f"unknown lambda_estimate {self.lambda_estimate!r}")
        if self.lambda_estimate == "unit" and self.diag_kind != "one_norm_safeguarded":
            raise ValueError("lambda_estimate='unit' requires diag_kind='one_norm_safeguarded'")
        if self.power_iters < 1:
            raise ValueError("power_iters must be >= 1")
        if self.tau < 1.0:
            raise ValueError("tau must be >= 1")

    @classmethod
    def from_variants(cls, variants=(), **kwargs):
        """Build from the variant names OneNorm, OffLmp, Cnstrnt, Sprsfy."""
        variants = set(variants)
        unknown = variants - set(VARIANTS)
        if unknown:
            raise ValueError(f"unknown variants {sorted(unknown)}")
        if "OneNorm" in variants:
            kwargs.setdefault("diag_kind", "one_norm_safeguarded")
        return cls(
            use_constraints="Cnstrnt" in variants,
            use_sprsfy="Sprsfy" in variants,
            offlmp="OffLmp" in variants,
            **kwargs,
        )

    @property
    def variants(self):
        names = []
        if self.diag_kind != "standard":
            names.append("OneNorm")
        if self.offlmp:
            names.append("OffLmp")
        if self.use_constraints:
            names.append("Cnstrnt")
        if self.use_sprsfy:
            names.append("Sprsfy")
        return tuple(names)


def _diag_values(d):
    return d.values if isinstance(d, DiagonalApprox) else np.asarray(d, dtype=np.float64)


def estimate_lambda_max(Abar, d, iters=10, seed=42):
    """Power-method estimate of the dominant eigenvalue of ``D^-1 Abar``.

    The start vector is drawn from a seeded generator. The final estimate
    is the Rayleigh quotient in the ``D`` inner product when ``D`` is
    positive (so it never exceeds the true maximum for symmetric ``Abar``)
    and the Euclidean Rayleigh quotient of ``D^-1 Abar`` otherwise. A
    negative result is returned as is.
    """
    dv = _diag_values(d)
    if np.any(dv == 0.0):
        raise ZeroDiagonalError(f"zero diagonal entry in row {int(np.argmax(dv == 0.0))}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(Abar.nrows)
    x /= np.linalg.norm(x)
    for _ in range(iters):
        y = spmv(Abar, x) / dv
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
    ax = spmv(Abar, x)
    if np.all(dv > 0.0):
        return float(x @ ax) / float(x @ (dv * x))
    return float(x @ (ax / dv))


def smooth_prolongator(Abar, d, Pt, lambda_m=None, omega=None):
    """One damped Jacobi step ``(I - omega D^-1 Abar) Pt``.

    ``omega`` defaults to ``4 / (3 lambda_m)``. A non-positive eigenvalue
    estimate raises :class:`NegativeEigenvalueError`.
    """
    dv = _diag_values(d)
    if np.any(dv == 0.0):
        raise ZeroDiagonalError(f"zero diagonal entry in row {int(np.argmax(dv == 0.0))}")
    if omega is None:
        if lambda_m is None:
            raise ValueError("need lambda_m or omega")
        if not lambda_m > 0.0:
            raise NegativeEigenvalueError(lambda_m)
        omega = 4.0 / (3.0 * lambda_m)
    if Abar.ncols != Pt.nrows or Abar.nrows != Pt.nrows or dv.size != Pt.nrows:
        raise ValueError("inconsistent dimensions in prolongator smoothing")
    return add(Pt, spmm(scale_rows(Abar, 1.0 / dv), Pt), 1.0, -omega)


# --------------------------------------------------------------- constraints

class RowFix(IntEnum):
    FEASIBLE = 0  # already in [0, 1]
    ADJUSTED = 1  # pin-and-spread loop ran
    ZEROED = 2  # row sum zero: the only feasible row is zero
    TENTATIVE = 3  # infeasible: replaced by the tentative row


_SPREAD_TOL = 1e-13


@njit
def _constrain_loop(row_offsets, values, fallback):
    n = row_offsets.shape[0] - 1
    out = values.copy()
    status = np.zeros(n, dtype=np.int64)
    work = np.zeros(values.shape[0], dtype=np.bool_)
    for i in range(n):
        s = row_offsets[i]
        e = row_offsets[i + 1]
        total = 0.0
        nz = 0
        violated = False
        for p in range(s, e):
            v = out[p]
            total += v
            if v != 0.0:
                nz += 1
                work[p] = True
            if v < 0.0 or v > 1.0:
                violated = True
        if not violated:
            continue
        if total < 0.0 or total > nz:
            for p in range(s, e):
                out[p] = fallback[p]
            status[i] = 3
            continue
        if total == 0.0:
            for p in range(s, e):
                out[p] = 0.0
            status[i] = 2
            continue
        nw = nz
        status[i] = 1
        while True:
            kmin = -1
            kmax = -1
            for p in range(s, e):
                if not work[p]:
                    continue
                if kmin == -1 or out[p] < out[kmin]:
                    kmin = p
                if kmax == -1 or out[p] > out[kmax]:
                    kmax = p
            if kmin == -1 or (out[kmin] >= 0.0 and out[kmax] <= 1.0):
                break
            delta = 0.0
            if out[kmin] < 0.0:
                delta += out[kmin]
                out[kmin] = 0.0
                work[kmin] = False
                nw -= 1
            if out[kmax] > 1.0:
                delta += out[kmax] - 1.0
                out[kmax] = 1.0
                work[kmax] = False
                nw -= 1
            if nw == 0:
                if abs(delta) > _SPREAD_TOL * max(1.0, total):
                    for p in range(s, e):
                        out[p] = fallback[p]
                    status[i] = 3
                break
            share = delta / nw
            for p in range(s, e):
                if work[p]:
                    out[p] += share
    return out, status


def _constrain_numpy(row_offsets, values, fallback):
    return _constrain_loop.py_func(row_offsets, values, fallback)


_constrain_kernel = dispatch(_constrain_loop, _constrain_numpy)


def constrain_rows_report(P, Pt):
    """Project prolongator rows into ``[0, 1]`` keeping row sums.

    Returns ``(P_bar, status)`` with a :class:`RowFix` code per row. The
    pattern of ``P`` is kept; pinned entries stay stored as zeros.
    """
    if P.shape != Pt.shape:
        raise ValueError(f"shape mismatch: {P.shape} vs {Pt.shape}")
    union = add(P, Pt, 0.0, 1.0)
    if union.nnz != P.nnz:
        raise ValueError("tentative prolongator pattern must lie inside P's pattern")
    out, status = _constrain_kernel(P.row_offsets, P.values, union.values)
    return P.with_values(out), status


def constrain_rows(P, Pt):
    return constrain_rows_report(P, Pt)[0]
