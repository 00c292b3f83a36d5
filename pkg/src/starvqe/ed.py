"""Exact-diagonalization references: sector ground states, moments, Lehmann poles.

This module works directly on fermionic operators and bitmask bases, fully
independent of the Jordan-Wigner/statevector route it benchmarks.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from .fermion import FermionOperator
from .greens import HOLE, PARTICLE, PoleRepresentation
from .sectors import SectorBasis

_DENSE_MODE_LIMIT = 8
_RESIDUAL_TOL = 1e-9
_DEGENERACY_TOL = 1e-8


def exact_ground_state(h: FermionOperator,
                       sector: SectorBasis) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the sector-projected Hamiltonian.

    Dense diagonalization for small mode counts, Lanczos (eigsh) otherwise.
    The eigenpair residual is verified to 1e-9.
    """
    mat = sector.fermion_matrix(h)
    if sector.n_modes <= _DENSE_MODE_LIMIT or sector.dim <= 256:
        vals, vecs = np.linalg.eigh(mat.toarray())
        energy, vec = float(vals[0]), vecs[:, 0]
    else:
        vals, vecs = spla.eigsh(mat, k=1, which="SA",
                                v0=np.ones(sector.dim), maxiter=5000)
        energy, vec = float(vals[0]), vecs[:, 0]
    residual = np.linalg.norm(mat @ vec - energy * vec)
    if residual > _RESIDUAL_TOL * max(1.0, abs(energy)):
        raise RuntimeError(f"eigenpair residual {residual:g} too large")
    return energy, vec


def _excited_sector(sector: SectorBasis, s: int,
                    sector_type: str) -> SectorBasis:
    n, tsz = _sector_quantum_numbers(sector)
    dsz = 1 if s % 2 == 0 else -1
    if sector_type == "particle":
        return SectorBasis.for_sector(sector.n_modes, n + 1, tsz + dsz)
    if sector_type == "hole":
        return SectorBasis.for_sector(sector.n_modes, n - 1, tsz - dsz)
    raise ValueError(f"unknown sector type {sector_type!r}")


def _sector_quantum_numbers(sector: SectorBasis) -> tuple[int, int]:
    from .sectors import sector_of_index
    return sector_of_index(int(sector.states[0]))


def exact_moments(h: FermionOperator, ground: np.ndarray, sector: SectorBasis,
                  s: int, sector_type: str, n_mom: int,
                  tracked_modes=None) -> np.ndarray:
    """Operator-convention moment rows by repeated application of H - E0.

    Particle rows: <G| c_r (H-E0)^m c_s^dag |G>; hole rows use c^dag_r ... c_s.
    Returns a complex array of shape (n_mom + 1, n_tracked). Rows for modes
    of the opposite spin to s vanish by symmetry and are returned as zeros.
    """
    if tracked_modes is None:
        tracked_modes = list(range(sector.n_modes))
    mat = sector.fermion_matrix(h)
    e0 = float(np.real(np.vdot(ground, mat @ ground)))
    excited = _excited_sector(sector, s, sector_type)
    h_exc = excited.fermion_matrix(h)

    create = sector_type == "particle"
    t_source = excited.transfer_matrix(((s, create),), sector)
    vec = t_source @ ground

    rows = np.zeros((n_mom + 1, len(tracked_modes)), dtype=np.complex128)
    probes = {}
    for j, r in enumerate(tracked_modes):
        if r % 2 != s % 2:
            continue  # opposite spin: different sector, exact zero
        probes[j] = excited.transfer_matrix(((r, create),), sector) @ ground
    for m in range(n_mom + 1):
        if m > 0:
            vec = h_exc @ vec - e0 * vec
        for j, probe in probes.items():
            rows[m, j] = np.vdot(probe, vec)
    return rows


def exact_lehmann_gf(h: FermionOperator, sector: SectorBasis,
                     tracked_modes=None,
                     weight_floor: float = 1e-14) -> PoleRepresentation:
    """All Green's-function poles from full diagonalization of the N+-1 sectors.

    Pole energies are E_m - E0 (particle, >= 0) and E0 - E_m (hole, <= 0);
    residues are outer products of ground-to-excited matrix elements,
    averaged over a degenerate ground multiplet when present.
    """
    if tracked_modes is None:
        tracked_modes = list(range(sector.n_modes))
    tracked_modes = list(tracked_modes)
    mat = sector.fermion_matrix(h).toarray()
    vals, vecs = np.linalg.eigh(mat)
    e0 = float(vals[0])
    ground_states = [vecs[:, i] for i in range(len(vals))
                     if vals[i] - e0 <= _DEGENERACY_TOL]
    n, tsz = _sector_quantum_numbers(sector)
    d = len(tracked_modes)

    energies, residues, sectors = [], [], []
    for sector_type, sign in (("particle", PARTICLE), ("hole", HOLE)):
        create = sector_type == "particle"
        dn = 1 if create else -1
        for dsz in (+1, -1):
            modes = [r for r in tracked_modes
                     if (r % 2 == 0) == (dsz == (1 if create else -1))]
            if not modes:
                continue
            try:
                exc = SectorBasis.for_sector(sector.n_modes, n + dn, tsz + dsz)
            except ValueError:
                continue  # sector empty (band edge)
            h_exc = exc.fermion_matrix(h).toarray()
            evals, evecs = np.linalg.eigh(h_exc)
            for g in ground_states:
                # amps[m, j] = <m| op_r |G>, op = c^dag (particle) or c (hole)
                cols = np.stack([
                    exc.transfer_matrix(((r, create),), sector) @ g
                    for r in modes], axis=1)
                amps = evecs.conj().T @ cols
                for m in range(len(evals)):
                    a = amps[m]
                    if np.sum(np.abs(a) ** 2) < weight_floor:
                        continue
                    w = np.zeros((d, d), dtype=np.complex128)
                    idx = [tracked_modes.index(r) for r in modes]
                    if create:
                        # residue v v^dag with v_r = <G| c_r |m> = conj(amps)
                        block = np.outer(a.conj(), a)
                    else:
                        # residue with u_r = <G| c_r^dag |m>: w = B B^dag pattern
                        block = np.outer(a, a.conj())
                    for bi, i in enumerate(idx):
                        for bj, j in enumerate(idx):
                            w[i, j] = block[bi, bj]
                    energies.append(sign * abs(evals[m] - e0)
                                    if abs(evals[m] - e0) > 1e-14
                                    else 0.0 * sign)
                    residues.append(w / len(ground_states))
                    sectors.append(sign)
    return PoleRepresentation(np.array(energies),
                              np.array(residues).reshape(-1, d, d),
                              np.array(sectors, dtype=np.int8))
