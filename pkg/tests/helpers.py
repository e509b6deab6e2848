"""Test problem builders and dense reference implementations."""
import numpy as np

from saamg.sparse import SparseMatrix, add, kron

BACKENDS = ("numba", "numpy")

# 6x6 SPD matrix whose standard filtered operator (theta = 0.4, matrix
# strength) yields a negative power-method eigenvalue estimate
NEGEIG_MATRIX = np.array([
    [6.5, -2.0, -1.0, 3.0, -4.0, 0.0],
    [-2.0, 12.0, 0.0, -4.0, 3.0, -4.0],
    [-1.0, 0.0, 3.5, -2.0, -1.0, 3.0],
    [3.0, -4.0, -2.0, 8.5, -2.0, -2.0],
    [-4.0, 3.0, -1.0, -2.0, 6.0, 0.0],
    [0.0, -4.0, 3.0, -2.0, 0.0, 8.5],
])
NEGEIG_THETA = 0.4


def tridiag(n, lo=-1.0, mid=2.0, hi=-1.0):
    dense = np.diag(np.full(n, mid)) + np.diag(np.full(n - 1, lo), -1) + np.diag(np.full(n - 1, hi), 1)
    return SparseMatrix.from_dense(dense)


def poisson1d(n):
    return tridiag(n)


def poisson2d(n):
    T = tridiag(n)
    I = SparseMatrix.identity(n)
    return add(kron(T, I), kron(I, T))


def periodic_laplacian2d(n):
    """5-point Laplacian on an n x n torus (circulant)."""
    rows, cols, vals = [], [], []
    for j in range(n):
        for i in range(n):
            k = i + n * j
            rows.append(k)
            cols.append(k)
            vals.append(4.0)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rows.append(k)
                cols.append((i + di) % n + n * ((j + dj) % n))
                vals.append(-1.0)
    N = n * n
    return SparseMatrix.from_coo(np.array(rows), np.array(cols), np.array(vals), (N, N))


def convection_diffusion1d(n, peclet=0.5):
    """Upwind 1D convection-diffusion, nonsymmetric."""
    return tridiag(n, lo=-1.0 - peclet, mid=2.0 + peclet, hi=-1.0)


def random_symmetric(rng, n, density=0.2, spd=False):
    """Random symmetric sparse matrix with a stored diagonal."""
    mask = np.triu(rng.random((n, n)) < density, 1)
    W = np.where(mask, rng.normal(size=(n, n)), 0.0)
    W = W + W.T
    diag = rng.normal(size=n)
    if spd:
        diag = np.abs(W).sum(axis=1) + rng.uniform(0.1, 1.0, n)
    dense = W + np.diag(diag)
    A = SparseMatrix.from_dense(dense)
    # keep the diagonal stored even when it is zero
    return add(A, SparseMatrix.identity(n), 1.0, 0.0) if np.any(diag == 0) else A


def anisotropic_links(nx, ny, eps, links=()):
    """2D grid with strong vertical and weak horizontal couplings.

    ``links`` is a set of horizontal ``(a, b)`` vertex pairs that get a
    strong coupling. The diagonal is ``2 + 2 eps`` plus ``1 - eps`` per link
    end, so the matrix is a Dirichlet-like M-matrix.
    """
    rows, cols, vals = [], [], []
    diag = np.full(nx * ny, 2.0 + 2.0 * eps)

    def edge(a, b, w):
        rows.extend([a, b])
        cols.extend([b, a])
        vals.extend([-w, -w])

    for j in range(ny):
        for i in range(nx):
            a = i + nx * j
            if i + 1 < nx:
                if (a, a + 1) in links:
                    edge(a, a + 1, 1.0)
                    diag[[a, a + 1]] += 1.0 - eps
                else:
                    edge(a, a + 1, eps)
            if j + 1 < ny:
                edge(a, a + nx, 1.0)
    n = nx * ny
    rows = np.r_[rows, np.arange(n)]
    cols = np.r_[cols, np.arange(n)]
    vals = np.r_[vals, diag]
    return SparseMatrix.from_coo(rows, cols, vals, (n, n))


def hotdog_problem(nx=12, ny=15, eps=0.01, theta=0.1):
    """Vertical aggregates with lone strong horizontal links between non-roots.

    Returns ``(A, theta, links)``. The links are chosen after aggregating
    the link-free grid so that no link touches a root; aggregation of the
    final matrix is the same.
    """
    from saamg.aggregation import aggregate
    from saamg.strength import classic_strength

    base = anisotropic_links(nx, ny, eps)
    roots = set(aggregate(base, classic_strength(base, theta)).roots.tolist())
    links = set()
    for j in range(ny):
        for i in range(nx - 1):
            a = i + nx * j
            if a not in roots and a + 1 not in roots and (i + j) % 3 == 0:
                links.add((a, a + 1))
    return anisotropic_links(nx, ny, eps, links), theta, links


# ---------------------------------------------------------------- oracles

def qp_project(p, lo=0.0, hi=1.0, iters=200):
    """argmin ||x - p|| s.t. lo <= x <= hi, sum(x) = sum(p), by bisection on the multiplier."""
    target = p.sum()
    a = p.min() - hi - 1.0
    b = p.max() - lo + 1.0
    for _ in range(iters):
        mu = 0.5 * (a + b)
        if np.clip(p - mu, lo, hi).sum() > target:
            a = mu
        else:
            b = mu
    return np.clip(p - 0.5 * (a + b), lo, hi)


def bisect_root(f, a, b, tol=1e-14, iters=300):
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < tol * max(1.0, abs(a)):
            break
    return 0.5 * (a + b)


def dense_pcg(A, f, M, tol, maxit=500):
    """Textbook PCG returning the residual-norm history."""
    x = np.zeros_like(f)
    r = f.copy()
    z = M(r)
    p = z.copy()
    rz = r @ z
    hist = [np.linalg.norm(r)]
    for _ in range(maxit):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        hist.append(np.linalg.norm(r))
        if hist[-1] <= tol * hist[0]:
            break
        z = M(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, np.array(hist)


def hex_element_quadrature(hx, hy, hz, npts=2):
    """Trilinear box element stiffness and mass by Gauss quadrature."""
    g, w = np.polynomial.legendre.leggauss(npts)
    corners = [(a, b, c) for c in (0, 1) for b in (0, 1) for a in (0, 1)]
    K = np.zeros((8, 8))
    M = np.zeros((8, 8))
    for xi, wx in zip(g, w):
        for eta, wy in zip(g, w):
            for zeta, wz in zip(g, w):
                s = np.array([(1 + xi) / 2, (1 + eta) / 2, (1 + zeta) / 2])
                N = np.empty(8)
                dN = np.empty((8, 3))
                for k, c in enumerate(corners):
                    f = [s[d] if c[d] else 1 - s[d] for d in range(3)]
                    sg = [1.0 if c[d] else -1.0 for d in range(3)]
                    N[k] = f[0] * f[1] * f[2]
                    dN[k] = [sg[0] * f[1] * f[2] / hx, f[0] * sg[1] * f[2] / hy, f[0] * f[1] * sg[2] / hz]
                jw = wx * wy * wz * hx * hy * hz / 8.0
                K += jw * dN @ dN.T
                M += jw * np.outer(N, N)
    return K, M, corners


def assemble_by_elements(mesh, sigma=None):
    """Element-by-element assembly of the full (no boundary) operator."""
    nx, ny, nz = mesh.shape
    n = nx * ny * nz
    A = np.zeros((n, n))
    for k in range(nz - 1):
        for j in range(ny - 1):
            for i in range(nx - 1):
                K, M, corners = hex_element_quadrature(
                    mesh.x[i + 1] - mesh.x[i], mesh.y[j + 1] - mesh.y[j], mesh.z[k + 1] - mesh.z[k]
                )
                E = K if sigma is None else K + M / sigma
                ids = [(i + a) + nx * ((j + b) + ny * (k + c)) for a, b, c in corners]
                A[np.ix_(ids, ids)] += E
    return A
