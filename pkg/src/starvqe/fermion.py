"""Second-quantized fermionic operators and the Jordan-Wigner transformation.

Mode ordering convention: spin-orbitals are interleaved, spatial orbital p
with spin up mapping to mode 2p and spin down to mode 2p+1. Fock states are
bitmasks with bit m giving the occupation of mode m, and the reference
ordering |n> = (c0^dag)^{n_0} (c1^dag)^{n_1} ... |vac>, which matches the
little-endian Jordan-Wigner chain used by :mod:`starvqe.statevector`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .pauli import PauliString, QubitOperator

# A term is a tuple of (mode, dagger) pairs, applied right-to-left to kets.
Term = tuple[tuple[int, bool], ...]


class FermionOperator:
    """Weighted sum of products of creation/annihilation operators."""

    def __init__(self, n_modes: int,
                 terms: Iterable[tuple[complex, Term]] = ()):
        if n_modes <= 0:
            raise ValueError("n_modes must be positive")
        self.n_modes = int(n_modes)
        self._terms: dict[Term, complex] = {}
        for coeff, term in terms:
            self.add_term(coeff, term)

    @classmethod
    def zero(cls, n_modes: int) -> "FermionOperator":
        return cls(n_modes)

    def add_term(self, coeff: complex, term: Term) -> None:
        term = tuple((int(m), bool(d)) for m, d in term)
        for mode, _ in term:
            if not 0 <= mode < self.n_modes:
                raise ValueError(f"mode {mode} out of range")
        self._terms[term] = self._terms.get(term, 0.0) + complex(coeff)

    def terms(self) -> Iterator[tuple[complex, Term]]:
        for term in sorted(self._terms):
            yield self._terms[term], term

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        if other.n_modes != self.n_modes:
            raise ValueError("mode-count mismatch")
        out = FermionOperator(self.n_modes)
        out._terms = dict(self._terms)
        for term, coeff in other._terms.items():
            out._terms[term] = out._terms.get(term, 0.0) + coeff
        return out

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            if other.n_modes != self.n_modes:
                raise ValueError("mode-count mismatch")
            out = FermionOperator(self.n_modes)
            for t1, c1 in self._terms.items():
                for t2, c2 in other._terms.items():
                    out._terms[t1 + t2] = out._terms.get(t1 + t2, 0.0) + c1 * c2
            return out
        out = FermionOperator(self.n_modes)
        out._terms = {t: c * complex(other) for t, c in self._terms.items()}
        return out

    def __rmul__(self, other) -> "FermionOperator":
        return self * other

    def dagger(self) -> "FermionOperator":
        out = FermionOperator(self.n_modes)
        for term, coeff in self._terms.items():
            conj = tuple((m, not d) for m, d in reversed(term))
            out._terms[conj] = out._terms.get(conj, 0.0) + np.conjugate(coeff)
        return out

    def simplify(self, tol: float = 1e-12) -> "FermionOperator":
        out = FermionOperator(self.n_modes)
        out._terms = {t: c for t, c in self._terms.items() if abs(c) > tol}
        return out

    def normal_order(self) -> "FermionOperator":
        """Canonical form: creations (descending mode) then annihilations
        (descending mode), generated via the anticommutation relations."""
        out = FermionOperator(self.n_modes)
        stack = list(self._terms.items())
        while stack:
            term, coeff = stack.pop()
            if abs(coeff) == 0.0:
                continue
            swapped = False
            for i in range(len(term) - 1):
                (m1, d1), (m2, d2) = term[i], term[i + 1]
                if not d1 and d2:
                    # c_m1 c^dag_m2 = delta - c^dag_m2 c_m1
                    rest_front, rest_back = term[:i], term[i + 2:]
                    if m1 == m2:
                        stack.append((rest_front + rest_back, coeff))
                    stack.append(
                        (rest_front + ((m2, d2), (m1, d1)) + rest_back, -coeff))
                    swapped = True
                    break
                if d1 == d2 and m1 < m2:
                    rest_front, rest_back = term[:i], term[i + 2:]
                    stack.append(
                        (rest_front + ((m2, d2), (m1, d1)) + rest_back, -coeff))
                    swapped = True
                    break
                if d1 == d2 and m1 == m2:
                    swapped = True  # nilpotent: drop the term
                    break
            if not swapped:
                out._terms[term] = out._terms.get(term, 0.0) + coeff
        return out

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        diff = (self - self.dagger()).normal_order().simplify(tol)
        return len(diff) == 0

    def __str__(self) -> str:
        def fmt(term):
            if not term:
                return "1"
            return " ".join(f"c{m}^" if d else f"c{m}" for m, d in term)

        return " + ".join(f"({c:.6g}) {fmt(t)}" for c, t in self.terms()) or "0"


@dataclass(frozen=True)
class SpinOrbitalLayout:
    """Bijection between (spatial orbital, spin) and interleaved mode indices."""

    n_spatial: int

    @property
    def n_modes(self) -> int:
        return 2 * self.n_spatial

    def mode(self, spatial: int, spin: str) -> int:
        if not 0 <= spatial < self.n_spatial:
            raise ValueError(f"spatial orbital {spatial} out of range")
        if spin not in ("up", "down"):
            raise ValueError("spin must be 'up' or 'down'")
        return 2 * spatial + (0 if spin == "up" else 1)

    def spatial(self, mode: int) -> int:
        return mode // 2

    def spin(self, mode: int) -> str:
        return "up" if mode % 2 == 0 else "down"

    def sz_of_mode(self, mode: int) -> float:
        return 0.5 if mode % 2 == 0 else -0.5

    def up_modes(self) -> list[int]:
        return [2 * p for p in range(self.n_spatial)]

    def down_modes(self) -> list[int]:
        return [2 * p + 1 for p in range(self.n_spatial)]


# -- Jordan-Wigner -------------------------------------------------------------

def _jw_ladder(mode: int, dagger: bool, n_modes: int) -> QubitOperator:
    """JW image of a single ladder operator with a Z string on modes < mode."""
    z_factors = tuple((q, "Z") for q in range(mode))
    x_string = PauliString(z_factors + ((mode, "X"),))
    y_string = PauliString(z_factors + ((mode, "Y"),))
    y_coeff = -0.5j if dagger else 0.5j
    return QubitOperator(n_modes, [(0.5, x_string), (y_coeff, y_string)])


def jordan_wigner(f: FermionOperator) -> QubitOperator:
    """Map a fermionic operator to a canonicalized QubitOperator.

    Uses c_j^dag -> (X_j - iY_j)/2 Z_0...Z_{j-1} (0-based chain), the
    little-endian counterpart of the standard 1-based convention.
    """
    out = QubitOperator(f.n_modes)
    for coeff, term in f.terms():
        acc = QubitOperator.identity(f.n_modes, coeff)
        for mode, dagger in term:
            acc = acc * _jw_ladder(mode, dagger, f.n_modes)
        out = out + acc
    return out.simplify()


# -- common operators ----------------------------------------------------------

def number_operator(mode: int, n_modes: int) -> FermionOperator:
    return FermionOperator(n_modes, [(1.0, ((mode, True), (mode, False)))])


def total_number(n_modes: int) -> FermionOperator:
    out = FermionOperator.zero(n_modes)
    for m in range(n_modes):
        out = out + number_operator(m, n_modes)
    return out


def total_sz(layout: SpinOrbitalLayout) -> FermionOperator:
    out = FermionOperator.zero(layout.n_modes)
    for p in range(layout.n_spatial):
        out = out + 0.5 * number_operator(layout.mode(p, "up"), layout.n_modes)
        out = out - 0.5 * number_operator(layout.mode(p, "down"), layout.n_modes)
    return out


# -- vectorized Fock-space action ----------------------------------------------

def act_product(states: np.ndarray, term: Term):
    """Apply a ladder-operator product to an array of Fock bitmasks.

    Returns (valid, targets, signs): boolean mask of states not annihilated,
    the resulting bitmasks, and the accumulated fermionic signs (+-1) from
    the occupations below each acted mode. Operators apply right-to-left.
    """
    cur = np.asarray(states, dtype=np.uint64).copy()
    valid = np.ones(cur.shape, dtype=bool)
    signs = np.ones(cur.shape, dtype=np.int8)
    for mode, dagger in reversed(term):
        bit = (cur >> np.uint64(mode)) & np.uint64(1)
        ok = (bit == 0) if dagger else (bit == 1)
        valid &= ok
        below = np.uint64((1 << mode) - 1)
        parity = (np.bitwise_count(cur & below) & np.uint64(1)).astype(np.int8)
        signs = np.where(parity == 1, -signs, signs)
        cur = np.where(valid, cur ^ np.uint64(1 << mode), cur)
    return valid, cur, signs
