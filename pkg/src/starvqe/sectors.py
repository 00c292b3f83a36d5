"""Occupation-number bases restricted to (N, S_z) symmetry sectors.

A :class:`SectorBasis` carries an ordered list of Fock bitmasks plus index
lookup, and can project fermionic or qubit operators to sparse matrices on
that basis. The full 2^n basis is available through :meth:`SectorBasis.full`
so the same machinery drives both exact-diagonalization references and the
dense circuit route.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fermion import FermionOperator, Term, act_product
from .pauli import QubitOperator

_EVEN_BITS = 0x5555555555555555


def sector_of_index(index: int) -> tuple[int, int]:
    """Return (n_electrons, 2*S_z) of a Fock bitmask (up spins on even bits)."""
    n_up = bin(index & _EVEN_BITS).count("1")
    n_dn = bin(index & ~_EVEN_BITS & ((1 << 64) - 1)).count("1")
    return n_up + n_dn, n_up - n_dn


class SectorBasis:
    """Ordered basis of Fock bitmasks with O(1) index lookup."""

    def __init__(self, n_modes: int, states: np.ndarray):
        if n_modes <= 0 or n_modes > 24:
            raise ValueError("n_modes out of supported range")
        self.n_modes = int(n_modes)
        self.states = np.sort(np.asarray(states, dtype=np.uint64))
        if len(np.unique(self.states)) != len(self.states):
            raise ValueError("duplicate basis states")
        self._lookup = np.full(1 << n_modes, -1, dtype=np.int64)
        self._lookup[self.states] = np.arange(len(self.states))

    @classmethod
    def full(cls, n_modes: int) -> "SectorBasis":
        return cls(n_modes, np.arange(1 << n_modes, dtype=np.uint64))

    @classmethod
    def for_sector(cls, n_modes: int, n_electrons: int,
                   twice_sz: int) -> "SectorBasis":
        """All bitmasks with the given electron count and 2*S_z (interleaved spins)."""
        idx = np.arange(1 << n_modes, dtype=np.uint64)
        even = np.uint64(_EVEN_BITS & ((1 << n_modes) - 1))
        n_up = np.bitwise_count(idx & even).astype(np.int64)
        n_dn = np.bitwise_count(idx & ~even).astype(np.int64)
        mask = (n_up + n_dn == n_electrons) & (n_up - n_dn == twice_sz)
        states = idx[mask]
        if len(states) == 0:
            raise ValueError(
                f"empty sector N={n_electrons}, 2Sz={twice_sz} on {n_modes} modes")
        return cls(n_modes, states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def key(self) -> tuple:
        first = int(self.states[0]) if self.dim else -1
        return (self.n_modes, self.dim, first)

    def index_of(self, bitmasks: np.ndarray) -> np.ndarray:
        """Positions of bitmasks in this basis (-1 when absent)."""
        return self._lookup[np.asarray(bitmasks, dtype=np.int64)]

    def basis_index(self, bitmask: int) -> int:
        pos = int(self._lookup[bitmask])
        if pos < 0:
            raise ValueError(f"state {bitmask:#x} not in sector")
        return pos

    # -- dense embedding --------------------------------------------------------
    def embed(self, coeffs: np.ndarray) -> np.ndarray:
        """Scatter sector coefficients into a dense 2^n amplitude array."""
        out = np.zeros(1 << self.n_modes, dtype=np.complex128)
        out[self.states] = coeffs
        return out

    def project(self, amplitudes: np.ndarray) -> np.ndarray:
        return np.asarray(amplitudes, dtype=np.complex128)[self.states]

    def projection_weight(self, amplitudes: np.ndarray) -> float:
        """Squared norm of the component inside this sector."""
        return float(np.sum(np.abs(self.project(amplitudes)) ** 2))

    # -- operator matrices -------------------------------------------------------
    def fermion_matrix(self, f: FermionOperator) -> sp.csr_matrix:
        """Sector-projected matrix of a (sector-conserving) fermionic operator."""
        rows, cols, data = [], [], []
        for coeff, term in f.terms():
            valid, targets, signs = act_product(self.states, term)
            src = np.nonzero(valid)[0]
            tgt = self.index_of(targets[valid])
            inside = tgt >= 0
            rows.append(tgt[inside])
            cols.append(src[inside])
            data.append(coeff * signs[valid][inside])
        if not rows:
            return sp.csr_matrix((self.dim, self.dim), dtype=np.complex128)
        return sp.csr_matrix(
            (np.concatenate(data).astype(np.complex128),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim))

    def qubit_matrix(self, q: QubitOperator) -> sp.csr_matrix:
        """Sector projection P O P of a qubit operator (exact when O conserves
        the sector, which holds for all mapped Hamiltonians here)."""
        rows, cols, data = [], [], []
        idx = self.states
        for coeff, string in q.terms():
            xm, ym, zm = string.masks()
            parity = (np.bitwise_count(idx & np.uint64(ym | zm))
                      & np.uint64(1)).astype(np.int64)
            phases = (1j) ** bin(ym).count("1") * np.where(parity, -1.0, 1.0)
            targets = idx ^ np.uint64(xm | ym)
            tgt = self.index_of(targets)
            inside = tgt >= 0
            rows.append(tgt[inside])
            cols.append(np.nonzero(inside)[0])
            data.append(coeff * phases[inside])
        return sp.csr_matrix(
            (np.concatenate(data).astype(np.complex128),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim))

    def transfer_matrix(self, term: Term,
                        source: "SectorBasis") -> sp.csr_matrix:
        """Matrix of a ladder product mapping `source` coefficients into this basis."""
        valid, targets, signs = act_product(source.states, term)
        src = np.nonzero(valid)[0]
        tgt = self.index_of(targets[valid])
        inside = tgt >= 0
        return sp.csr_matrix(
            (signs[valid][inside].astype(np.complex128),
             (tgt[inside], src[inside])),
            shape=(self.dim, source.dim))


def dominant_sector(amplitudes: np.ndarray, tol: float = 1e-9) -> tuple[int, int]:
    """(N, 2*S_z) of a sector-pure dense state; raises if weight leaks sectors."""
    amps = np.asarray(amplitudes)
    nz = np.nonzero(np.abs(amps) ** 2 > tol)[0]
    if len(nz) == 0:
        raise ValueError("state has no significant amplitudes")
    sectors = {sector_of_index(int(i)) for i in nz}
    if len(sectors) != 1:
        raise ValueError(f"state is not sector-pure: {sorted(sectors)}")
    return sectors.pop()
