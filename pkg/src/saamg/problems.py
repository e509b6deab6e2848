"""Trilinear hexahedral FEM test problems on tensor-product meshes."""
from dataclasses import dataclass, field

import numpy as np

from .sparse import SparseMatrix, add, kron, spmv, submatrix


@dataclass
class TensorMesh:
    """Tensor-product mesh given by its node positions per direction."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "z"):
            c = np.asarray(getattr(self, name), dtype=np.float64)
            if c.ndim != 1 or c.size < 2:
                raise ValueError(f"{name}: need at least 2 nodes")
            if np.any(np.diff(c) <= 0.0):
                raise ValueError(f"{name}: degenerate or inverted element")
            setattr(self, name, c)

    @property
    def shape(self):
        """Number of nodes per direction."""
        return (self.x.size, self.y.size, self.z.size)

    @property
    def num_elements(self):
        return (self.x.size - 1, self.y.size - 1, self.z.size - 1)

    def nodes(self):
        """Node coordinates, x index fastest."""
        Z, Y, X = np.meshgrid(self.z, self.y, self.x, indexing="ij")
        return np.column_stack((X.ravel(), Y.ravel(), Z.ravel()))

    def boundary_mask(self):
        nx, ny, nz = self.shape
        k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        on = (i == 0) | (i == nx - 1) | (j == 0) | (j == ny - 1) | (k == 0) | (k == nz - 1)
        return on.ravel()

    def to_csv(self, path):
        """Debug dump of node coordinates."""
        np.savetxt(path, self.nodes(), delimiter=",", header="x,y,z", comments="")


def trilinear_ud(p):
    """1 + x + y + z + xy + xz + yz + xyz."""
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    return 1 + x + y + z + x * y + x * z + y * z + x * y * z


def _zero(p):
    return np.zeros(p.shape[0])


@dataclass
class ProblemSpec:
    """``-lap u (+ u / sigma) = f`` with ``u = u_D`` on the boundary."""

    kind: str = "poisson"
    sigma: float = None
    dirichlet: object = field(default=trilinear_ud)
    rhs: object = field(default=_zero)

    def __post_init__(self):
        if self.kind not in ("poisson", "reaction_diffusion"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == "reaction_diffusion" and not (self.sigma and self.sigma > 0):
            raise ValueError("reaction_diffusion needs sigma > 0")


# ---------------------------------------------------------------------- meshes

def mesh_random_cube(n, seed):
    """Unit-spaced cube with each node line shifted by up to 20% of a cell.

    Node ``i`` sits at ``(i + 0.2 u_i) / n`` in x and y and at
    ``100 (i + 0.2 w_i) / n`` in z, with independent uniform draws per
    direction from a generator seeded by ``seed``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    i = np.arange(n + 1)
    x = (i + 0.2 * rng.random(n + 1)) / n
    y = (i + 0.2 * rng.random(n + 1)) / n
    z = 100.0 * (i + 0.2 * rng.random(n + 1)) / n
    return TensorMesh(x, y, z)


def graded_nodes(n, k):
    """Nodes of ``n`` elements whose sizes vary linearly from 0.1 to k/10."""
    if n < 2:
        raise ValueError("n must be >= 2")
    sizes = np.linspace(0.1, k / 10.0, n)
    if np.any(sizes <= 0.0):
        raise ValueError(f"nonpositive element size for k={k}")
    return np.concatenate(([0.0], np.cumsum(sizes)))


def mesh_stretched_cube(n, kx, ky, kz):
    return TensorMesh(graded_nodes(n, kx), graded_nodes(n, ky), graded_nodes(n, kz))


# ------------------------------------------------------------------- assembly

def line_matrices(c):
    """1D linear-element stiffness and consistent mass on nodes ``c``."""
    h = np.diff(c)
    m = c.size
    e = np.arange(h.size)
    rows = np.concatenate((e, e, e + 1, e + 1))
    cols = np.concatenate((e, e + 1, e, e + 1))
    k = np.concatenate((1 / h, -1 / h, -1 / h, 1 / h))
    mass = np.concatenate((h / 3, h / 6, h / 6, h / 3))
    K = SparseMatrix.from_coo(rows, cols, k, (m, m))
    M = SparseMatrix.from_coo(rows, cols, mass, (m, m))
    return K, M


def stiffness_and_mass(mesh):
    """Global trilinear stiffness and mass matrices (no boundary handling).

    Exact for box elements: the element matrices are tensor products of 1D
    matrices, hence so are the assembled ones (x index fastest).
    """
    Kx, Mx = line_matrices(mesh.x)
    Ky, My = line_matrices(mesh.y)
    Kz, Mz = line_matrices(mesh.z)
    MyMx = kron(My, Mx)
    K = add(
        add(kron(Mz, kron(My, Kx)), kron(Mz, kron(Ky, Mx))),
        kron(Kz, MyMx),
    )
    return K, kron(Mz, MyMx)


def assemble(mesh, spec=None, dirichlet=True):
    """Assemble the linear system of ``spec`` on ``mesh``.

    Returns ``(A, b, coords)``. With ``dirichlet=True`` boundary unknowns
    are eliminated and their ``u_D`` values moved to the right-hand side;
    otherwise the full (Neumann) operator and load are returned.
    """
    spec = ProblemSpec() if spec is None else spec
    K, M = stiffness_and_mass(mesh)
    A = K if spec.kind == "poisson" else add(K, M, 1.0, 1.0 / spec.sigma)
    nodes = mesh.nodes()
    load = spmv(M, spec.rhs(nodes))
    if not dirichlet:
        return A, load, nodes
    bnd = mesh.boundary_mask()
    interior = np.flatnonzero(~bnd)
    boundary = np.flatnonzero(bnd)
    A_ii = submatrix(A, interior, interior)
    A_ib = submatrix(A, interior, boundary)
    b = load[interior] - spmv(A_ib, spec.dirichlet(nodes[boundary]))
    return A_ii, b, nodes[interior]
