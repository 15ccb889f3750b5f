"""Sparse 2D effective-mass Schrodinger solver on the potential grid.

Five-point finite differences with Dirichlet conditions one spacing outside
the stored nodes.  The lowest-k eigenpairs are obtained with an implicitly
restarted Lanczos iteration started from a fixed sinusoidal seed, so results
are deterministic run to run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constants import HBAR2_OVER_2ME
from .device import MaterialParams, PotentialGrid
from .errors import ConvergenceError

# Energy gap below which two levels are treated as degenerate when fixing
# a deterministic ordering and orientation.
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class DiscretizedHamiltonian:
    """H = -(hbar^2 / 2 m*) Laplacian_5pt + diag(V) on the grid nodes."""

    nx: int
    ny: int
    spacing: float
    kinetic_prefactor: float  # hbar^2 / (2 m*), meV nm^2
    potential: np.ndarray = field(repr=False)  # (nx, ny) meV
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def size(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True)
class OrbitalSet:
    """Lowest single-particle orbitals, normalized so sum |psi|^2 h^2 = 1."""

    energies: np.ndarray              # (k,) meV, ascending
    wavefunctions: np.ndarray = field(repr=False)  # (k, nx, ny), real
    spacing: float = 1.0

    @property
    def count(self) -> int:
        return len(self.energies)

    def overlap_matrix(self) -> np.ndarray:
        flat = self.wavefunctions.reshape(self.count, -1)
        return (flat @ flat.T) * self.spacing ** 2


def build_hamiltonian(grid: PotentialGrid,
                      material: MaterialParams) -> DiscretizedHamiltonian:
    """Assemble the sparse symmetric Hamiltonian for the given potential."""
    t = HBAR2_OVER_2ME / material.effective_mass
    h = grid.spacing
    v = grid.values

    hop = t / h ** 2
    cell_var = 0.0
    if grid.nx > 1:
        cell_var = float(np.abs(np.diff(v, axis=0)).max())
    if grid.ny > 1:
        cell_var = max(cell_var, float(np.abs(np.diff(v, axis=1)).max()))
    if cell_var > hop:
        warnings.warn(
            f"grid spacing {h} nm is coarse for this potential "
            f"(kinetic scale {hop:.3g} meV < per-cell potential variation "
            f"{cell_var:.3g} meV); eigenvalues may be inaccurate",
            stacklevel=2,
        )

    lap_x = _lap1d(grid.nx)
    lap_y = _lap1d(grid.ny)
    lap = sp.kron(lap_x, sp.identity(grid.ny, format="csr")) + \
        sp.kron(sp.identity(grid.nx, format="csr"), lap_y)
    ham = (-hop) * lap + sp.diags(v.ravel())
    return DiscretizedHamiltonian(
        nx=grid.nx, ny=grid.ny, spacing=h, kinetic_prefactor=t,
        potential=v, matrix=ham.tocsr(),
    )


def _lap1d(n: int) -> sp.csr_matrix:
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _seed_vector(nx: int, ny: int) -> np.ndarray:
    """Fixed starting vector mixing the lowest box modes.

    The two-mode admixture breaks every mirror parity so the Krylov space
    reaches both even and odd eigenstates of symmetric potentials.  A small
    fixed-seed random component is added so the start vector overlaps every
    eigenvector: a purely structured seed can be exactly orthogonal to some
    eigenspaces (it spans only four modes of the empty box), and a Lanczos
    iteration cannot leave the orthogonal complement of its start vector.
    """
    ix = (np.arange(nx) + 1) / (nx + 1)
    iy = (np.arange(ny) + 1) / (ny + 1)
    sx = np.sin(np.pi * ix) + 0.5 * np.sin(2.0 * np.pi * ix)
    sy = np.sin(np.pi * iy) + 0.5 * np.sin(2.0 * np.pi * iy)
    v = np.outer(sx, sy).ravel()
    v = v / np.linalg.norm(v)
    noise = np.random.default_rng(1318).standard_normal(nx * ny)
    v = v + 1e-2 * noise / np.linalg.norm(noise)
    return v / np.linalg.norm(v)


def lowest_eigenpairs(ham: DiscretizedHamiltonian, k: int,
                      tol: float = 1e-10, maxiter: int = 100000) -> OrbitalSet:
    """Lowest k eigenpairs of the discretized Hamiltonian.

    Raises ConvergenceError if the residual contract
    ||H psi - E psi|| <= tol * max(|E|, 1) cannot be met.
    """
    n = ham.size
    if not (1 <= k < n):
        raise ValueError(f"need 1 <= k < {n}, got {k}")
    v0 = _seed_vector(ham.nx, ham.ny)
    try:
        energies, vecs = spla.eigsh(
            ham.matrix, k=k, which="SA", v0=v0, tol=tol, maxiter=maxiter,
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"eigensolver did not converge within {maxiter} iterations",
            achieved_residual=None,
        ) from exc

    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    vecs = vecs[:, order]

    # Residual check against the stated contract; the bound is relative to
    # the operator norm since ARPACK's tol is a backward-error tolerance.
    res = ham.matrix @ vecs - vecs * energies[None, :]
    res_norms = np.linalg.norm(res, axis=0)
    ninf = float(abs(ham.matrix).sum(axis=1).max())
    bounds = max(tol, 1e-14) * 10.0 * max(ninf, 1.0)
    if np.any(res_norms > bounds):
        raise ConvergenceError(
            "eigenpair residual exceeds tolerance",
            achieved_residual=float(res_norms.max()),
        )

    psi = vecs.T.reshape(k, ham.nx, ham.ny) / ham.spacing
    energies, psi = _fix_degenerate_order(energies, psi)
    psi = _fix_signs(psi)
    return OrbitalSet(energies=energies, wavefunctions=psi, spacing=ham.spacing)


def _fix_degenerate_order(energies: np.ndarray, psi: np.ndarray):
    """Deterministic ordering inside degenerate groups.

    Within a group of (numerically) equal energies, orbitals are sorted by
    lexicographic comparison of their rounded grid values so that the
    returned order does not depend on solver internals.
    """
    k = len(energies)
    i = 0
    while i < k:
        j = i + 1
        while j < k and energies[j] - energies[i] < DEGENERACY_TOL * max(1.0, abs(energies[i])):
            j += 1
        if j - i > 1:
            block = psi[i:j].reshape(j - i, -1)
            keys = [tuple(np.round(row, 6)) for row in block]
            order = sorted(range(j - i), key=lambda m: keys[m])
            psi[i:j] = psi[i:j][order]
            energies[i:j] = energies[i:j][order]
        i = j
    return energies, psi


def _fix_signs(psi: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each orbital positive."""
    flat = psi.reshape(psi.shape[0], -1)
    idx = np.argmax(np.abs(flat), axis=1)
    signs = np.sign(flat[np.arange(len(idx)), idx])
    signs[signs == 0] = 1.0
    return psi * signs[:, None, None]


def check_orthonormality(orbitals: OrbitalSet) -> float:
    """Max deviation |<psi_i|psi_j> - delta_ij| over all orbital pairs."""
    s = orbitals.overlap_matrix()
    return float(np.abs(s - np.eye(orbitals.count)).max())


def orbital_to_text(orbitals: OrbitalSet, i: int) -> str:
    """Plain-text export of one orbital, same matrix format as PotentialGrid."""
    psi = orbitals.wavefunctions[i]
    lines = [f"# orbital {i} energy_meV {orbitals.energies[i]:.17g}"]
    for row in psi:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"
