"""Two-electron exchange splitting via configuration interaction.

The interaction is the 3D Coulomb kernel evaluated in-plane with a
softening length modeling the finite vertical extent of the electron
layer:  K(r) = e^2 / (4 pi eps_0 eps_r sqrt(r^2 + lambda^2)).

Spin enters only through spatial symmetry: spatially symmetric pair
states are singlets, antisymmetric ones triplets, which is exact for two
electrons without a magnetic field.  J = E_T0 - E_S0, reported in ueV.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.signal import fftconvolve

from .constants import COULOMB_CONSTANT
from .device import MaterialParams, PotentialGrid
from .errors import ConfigError, ConvergenceError, ResourceError
from .eigensolver import (
    DiscretizedHamiltonian,
    OrbitalSet,
    build_hamiltonian,
    lowest_eigenpairs,
)

# Largest single-particle grid accepted by the brute-force two-particle
# solver; beyond this the product grid no longer fits a desk-scale solve.
BRUTE_FORCE_MAX_NODES = 1300


def coulomb_kernel(r: np.ndarray, material: MaterialParams,
                   scale: float = 1.0) -> np.ndarray:
    """Softened in-plane Coulomb energy (meV) at separation r (nm)."""
    lam = material.softening_length
    return scale * COULOMB_CONSTANT / (
        material.relative_permittivity * np.sqrt(r * r + lam * lam)
    )


def _displacement_kernel(nx: int, ny: int, spacing: float,
                         material: MaterialParams,
                         scale: float = 1.0) -> np.ndarray:
    """Kernel K(r_i - r_j) tabulated on the (2nx-1, 2ny-1) displacement grid."""
    dx = spacing * np.arange(-(nx - 1), nx)
    dy = spacing * np.arange(-(ny - 1), ny)
    r = np.hypot(dx[:, None], dy[None, :])
    return coulomb_kernel(r, material, scale)


def _pair_density_potential(rho: np.ndarray, kernel: np.ndarray,
                            spacing: float) -> np.ndarray:
    """Potential sum_j K(r_i - r_j) rho(r_j) h^2, exact linear convolution."""
    if not rho.any():
        return np.zeros_like(rho)
    return fftconvolve(rho, kernel, mode="valid") * spacing ** 2


@dataclass(frozen=True)
class CoulombTensor:
    """Chemist-notation interaction elements (ij|kl) in meV.

    (ij|kl) = integral psi_i(r1) psi_j(r2) K(|r1-r2|) psi_k(r1) psi_l(r2);
    all eight real-orbital permutation symmetries hold by construction.
    """

    n: int
    elements: np.ndarray = field(repr=False)  # (n, n, n, n)

    def __getitem__(self, idx):
        return self.elements[idx]


def coulomb_element(orbitals: OrbitalSet, i: int, j: int, k: int, l: int,
                    material: MaterialParams, scale: float = 1.0) -> float:
    """Single interaction element (ij|kl) in meV by direct grid summation."""
    n = orbitals.count
    if max(i, j, k, l) >= n:
        raise ConfigError("orbital index out of range")
    psi = orbitals.wavefunctions
    h = orbitals.spacing
    kernel = _displacement_kernel(psi.shape[1], psi.shape[2], h, material, scale)
    phi = _pair_density_potential(psi[i] * psi[k], kernel, h)
    return float(np.sum(phi * psi[j] * psi[l]) * h ** 2)


def coulomb_tensor(orbitals: OrbitalSet, material: MaterialParams,
                   scale: float = 1.0) -> CoulombTensor:
    """All (ij|kl) for the orbital set, via per-pair-density convolutions."""
    n = orbitals.count
    psi = orbitals.wavefunctions
    h = orbitals.spacing
    kernel = _displacement_kernel(psi.shape[1], psi.shape[2], h, material, scale)

    pairs = [(i, k) for i in range(n) for k in range(i, n)]
    index = {p: m for m, p in enumerate(pairs)}
    rho = np.array([psi[i] * psi[k] for i, k in pairs])
    phi = np.array([_pair_density_potential(r, kernel, h) for r in rho])
    flat_rho = rho.reshape(len(pairs), -1)
    flat_phi = phi.reshape(len(pairs), -1)
    # g[p, q] = <phi_p, rho_q> h^2, symmetric up to FFT round-off.
    g = flat_phi @ flat_rho.T * h ** 2
    g = 0.5 * (g + g.T)

    elems = np.empty((n, n, n, n))
    for i in range(n):
        for k in range(n):
            p = index[(min(i, k), max(i, k))]
            for j in range(n):
                for l in range(n):
                    q = index[(min(j, l), max(j, l))]
                    elems[i, j, k, l] = g[p, q]
    return CoulombTensor(n=n, elements=elems)


def orbital_fingerprint(orbitals: OrbitalSet) -> str:
    """Content hash of an orbital set, used to key tensor caches."""
    m = hashlib.sha256()
    m.update(np.ascontiguousarray(orbitals.energies).tobytes())
    m.update(np.ascontiguousarray(orbitals.wavefunctions).tobytes())
    m.update(repr(orbitals.spacing).encode())
    return m.hexdigest()


def save_tensor_cache(tensor: CoulombTensor, orbitals: OrbitalSet,
                      cache_dir) -> Path:
    path = Path(cache_dir) / f"coulomb-{orbital_fingerprint(orbitals)}.npz"
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, elements=tensor.elements)
    return path


def load_tensor_cache(orbitals: OrbitalSet, cache_dir) -> CoulombTensor | None:
    path = Path(cache_dir) / f"coulomb-{orbital_fingerprint(orbitals)}.npz"
    if not path.exists():
        return None
    with np.load(path) as data:
        elements = data["elements"]
    return CoulombTensor(n=elements.shape[0], elements=elements)


@dataclass(frozen=True)
class CISector:
    """One spin sector of the two-electron CI problem."""

    spin: str  # "singlet" or "triplet"
    basis: tuple[tuple[int, int], ...]
    hamiltonian: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TwoElectronSpectrum:
    """Singlet/triplet spectra (meV, ascending) and the exchange splitting."""

    singlet_energies: np.ndarray
    triplet_energies: np.ndarray

    @property
    def exchange_ueV(self) -> float:
        """J = E_T0 - E_S0 in ueV."""
        return float(
            (self.triplet_energies[0] - self.singlet_energies[0]) * 1000.0
        )


def build_ci_sectors(orbitals: OrbitalSet, coulomb: CoulombTensor,
                     one_body: np.ndarray | None = None):
    """Assemble the singlet and triplet CI matrices.

    Basis functions are symmetrized orbital-pair products; with N orbitals
    the singlet sector has N(N+1)/2 states and the triplet N(N-1)/2.
    ``one_body`` defaults to diag(single-particle energies), which is exact
    when the orbitals diagonalize the one-electron Hamiltonian.
    """
    n = orbitals.count
    if coulomb.n != n:
        raise ConfigError(
            f"coulomb tensor built for {coulomb.n} orbitals, got {n}"
        )
    if n < 2:
        raise ConfigError("need at least 2 orbitals for a two-electron basis")
    t = np.diag(orbitals.energies) if one_body is None else np.asarray(one_body)

    sectors = []
    for spin, sign in (("singlet", 1.0), ("triplet", -1.0)):
        if sign > 0:
            basis = [(a, b) for a in range(n) for b in range(a, n)]
        else:
            basis = [(a, b) for a in range(n) for b in range(a + 1, n)]
        dim = len(basis)
        norm = np.array([1.0 / np.sqrt(2.0 * (1.0 + (a == b))) for a, b in basis])
        ham = np.empty((dim, dim))
        v = coulomb.elements
        for p, (a, b) in enumerate(basis):
            for q in range(p, dim):
                c, d = basis[q]
                one = 2.0 * (
                    t[a, c] * (b == d) + t[b, d] * (a == c)
                    + sign * (t[a, d] * (b == c) + t[b, c] * (a == d))
                )
                two = 2.0 * (v[a, b, c, d] + sign * v[a, b, d, c])
                ham[p, q] = ham[q, p] = norm[p] * norm[q] * (one + two)
        sectors.append(CISector(spin=spin, basis=tuple(basis), hamiltonian=ham))
    return sectors[0], sectors[1]


def diagonalize_ci(sector: CISector) -> np.ndarray:
    """Eigenvalues of one CI sector, ascending, in meV."""
    return np.linalg.eigvalsh(sector.hamiltonian)


def one_body_matrix(orbitals: OrbitalSet,
                    ham: DiscretizedHamiltonian) -> np.ndarray:
    """t_ab = <psi_a| H |psi_b> on the grid, in meV."""
    flat = orbitals.wavefunctions.reshape(orbitals.count, -1)
    t = flat @ (ham.matrix @ flat.T) * orbitals.spacing ** 2
    return 0.5 * (t + t.T)


def hartree_fock_refine(grid: PotentialGrid, material: MaterialParams,
                        k: int, max_iter: int = 60, mix: float = 0.5,
                        interaction_scale: float = 1.0,
                        energy_tol: float = 1e-8,
                        eig_tol: float = 1e-10) -> tuple[OrbitalSet, int]:
    """Mean-field refinement: each orbital feels the other electron's charge.

    Iterates single-particle solves in V + Hartree(|psi_0|^2) with linear
    density mixing until the orbital energies settle.  Returns the refined
    orbitals and the iteration count.
    """
    if not (0.0 < mix <= 1.0):
        raise ConfigError("mix must lie in (0, 1]")
    kernel = _displacement_kernel(grid.nx, grid.ny, grid.spacing, material,
                                  interaction_scale)
    ham0 = build_hamiltonian(grid, material)
    orbitals = lowest_eigenpairs(ham0, k, tol=eig_tol)
    density = orbitals.wavefunctions[0] ** 2
    prev_energies = orbitals.energies.copy()

    for iteration in range(1, max_iter + 1):
        v_hartree = _pair_density_potential(density, kernel, grid.spacing)
        if not v_hartree.any():
            return orbitals, iteration
        eff = PotentialGrid(
            nx=grid.nx, ny=grid.ny, spacing=grid.spacing, origin=grid.origin,
            values=grid.values + v_hartree, provenance=grid.provenance,
        )
        orbitals = lowest_eigenpairs(build_hamiltonian(eff, material), k,
                                     tol=eig_tol)
        change = float(np.abs(orbitals.energies - prev_energies).max())
        if change < energy_tol:
            return orbitals, iteration
        prev_energies = orbitals.energies.copy()
        new_density = orbitals.wavefunctions[0] ** 2
        density = mix * new_density + (1.0 - mix) * density

    raise ConvergenceError(
        f"Hartree-Fock refinement did not settle in {max_iter} iterations; "
        f"try a smaller mix (last energy change {change:.3e} meV)",
        achieved_residual=change,
    )


def exchange_splitting(grid: PotentialGrid, material: MaterialParams,
                       n_orbitals: int = 8, eig_tol: float = 1e-10,
                       hf_refine: bool = False, hf_mix: float = 0.5,
                       hf_max_iter: int = 60,
                       interaction_scale: float = 1.0) -> TwoElectronSpectrum:
    """Full CI pipeline from a confinement potential to the exchange J.

    Solves the lowest ``n_orbitals`` single-particle states, builds the
    Coulomb tensor and both spin sectors, and exactly diagonalizes them.
    """
    if n_orbitals < 2:
        raise ConfigError("n_orbitals must be >= 2")
    ham = build_hamiltonian(grid, material)
    if hf_refine:
        orbitals, _ = hartree_fock_refine(
            grid, material, n_orbitals, max_iter=hf_max_iter, mix=hf_mix,
            interaction_scale=interaction_scale, eig_tol=eig_tol,
        )
        t = one_body_matrix(orbitals, ham)
    else:
        orbitals = lowest_eigenpairs(ham, n_orbitals, tol=eig_tol)
        t = None
    tensor = coulomb_tensor(orbitals, material, scale=interaction_scale)
    singlet, triplet = build_ci_sectors(orbitals, tensor, one_body=t)
    return TwoElectronSpectrum(
        singlet_energies=diagonalize_ci(singlet),
        triplet_energies=diagonalize_ci(triplet),
    )


def brute_force_two_electron(grid: PotentialGrid, material: MaterialParams,
                             k: int = 4, interaction_scale: float = 1.0,
                             eig_tol: float = 0.0,
                             maxiter: int = 20000) -> TwoElectronSpectrum:
    """Exact two-electron solve on the tensor-product grid (small grids only).

    Diagonalizes h x 1 + 1 x h + K(|r1 - r2|) with no basis truncation and
    classifies eigenstates by coordinate-swap parity: symmetric spatial
    states are singlets, antisymmetric ones triplets.
    """
    n = grid.nx * grid.ny
    if n > BRUTE_FORCE_MAX_NODES:
        raise ResourceError(
            f"product grid would have {n * n:.3g} nodes; use a grid with at "
            f"most {BRUTE_FORCE_MAX_NODES} single-particle nodes (got {n})"
        )
    h1 = build_hamiltonian(grid, material).matrix
    eye = sp.identity(n, format="csr")
    xs, ys = grid.axes()
    px = np.repeat(xs, grid.ny)
    py = np.tile(ys, grid.nx)
    dist = np.hypot(px[:, None] - px[None, :], py[:, None] - py[None, :])
    interaction = coulomb_kernel(dist, material, interaction_scale).ravel()
    h2 = sp.kron(h1, eye) + sp.kron(eye, h1) + sp.diags(interaction)

    # Seed with mixed swap parity so both sectors appear in the Krylov space.
    sx = np.sin(np.pi * (np.arange(n) + 1) / (n + 1))
    sy = sx + 0.3 * np.sin(2.0 * np.pi * (np.arange(n) + 1) / (n + 1))
    v0 = np.outer(sx, sy).ravel()
    v0 /= np.linalg.norm(v0)

    singlets: list[float] = []
    triplets: list[float] = []
    k_solve = max(k, 4)
    while not (singlets and triplets):
        try:
            energies, vecs = spla.eigsh(h2, k=k_solve, which="SA", v0=v0,
                                        tol=eig_tol, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                "brute-force two-electron solve did not converge"
            ) from exc
        order = np.argsort(energies)
        singlets, triplets = [], []
        for idx in order:
            mat = vecs[:, idx].reshape(n, n)
            parity = float(np.sum(mat * mat.T))
            (singlets if parity >= 0.0 else triplets).append(float(energies[idx]))
        if singlets and triplets:
            break
        k_solve += 4
        if k_solve > 24:
            raise ConvergenceError(
                "could not resolve both spin sectors in the lowest 24 states"
            )
    return TwoElectronSpectrum(
        singlet_energies=np.array(singlets),
        triplet_energies=np.array(triplets),
    )


def two_site_exchange_closed_form(t: float, u: float) -> float:
    """Closed-form exchange of the two-site model: (U/2)(sqrt(1+16t^2/U^2)-1).

    Inputs in meV, result in ueV.
    """
    return 1000.0 * (u / 2.0) * (np.sqrt(1.0 + 16.0 * t * t / (u * u)) - 1.0)


def two_site_exchange_numeric(t: float, u: float) -> float:
    """Two-site exchange from explicit diagonalization of the singlet block.

    Basis {LL, RR, (LR+RL)/sqrt 2}; the triplet (LR-RL)/sqrt 2 sits at zero.
    Result in ueV.
    """
    ham = np.array([
        [u, 0.0, -np.sqrt(2.0) * t],
        [0.0, u, -np.sqrt(2.0) * t],
        [-np.sqrt(2.0) * t, -np.sqrt(2.0) * t, 0.0],
    ])
    singlet_ground = np.linalg.eigvalsh(ham)[0]
    return 1000.0 * (0.0 - singlet_ground)
