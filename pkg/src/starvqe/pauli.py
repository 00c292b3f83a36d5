"""Pauli strings and weighted Pauli-string operators.

Qubit ordering is little-endian throughout the package: qubit ``j``
corresponds to bit ``j`` of the computational basis index, so basis state
``n`` has qubit ``j`` in state ``(n >> j) & 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

_VALID_OPS = ("X", "Y", "Z")

# Single-qubit Pauli product table: (left, right) -> (phase, result)
# e.g. X*Y = iZ. Identity handled separately.
_PRODUCT = {
    ("X", "X"): (1.0, None),
    ("Y", "Y"): (1.0, None),
    ("Z", "Z"): (1.0, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit X/Y/Z factors (identity elsewhere).

    Coefficient-free and therefore Hermitian. Stored as a sorted tuple of
    ``(qubit, op)`` pairs with distinct qubit indices.
    """

    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        seen = set()
        for q, op in self.factors:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if op not in _VALID_OPS:
                raise ValueError(f"invalid Pauli op {op!r}")
            if q in seen:
                raise ValueError(f"duplicate qubit index {q}")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def from_map(cls, ops: Mapping[int, str]) -> "PauliString":
        return cls(tuple(ops.items()))

    @property
    def is_identity(self) -> bool:
        return not self.factors

    def max_qubit(self) -> int:
        return max((q for q, _ in self.factors), default=-1)

    def masks(self) -> tuple[int, int, int]:
        """Bit masks (x_mask, y_mask, z_mask) of the qubits carrying X/Y/Z."""
        xm = ym = zm = 0
        for q, op in self.factors:
            if op == "X":
                xm |= 1 << q
            elif op == "Y":
                ym |= 1 << q
            else:
                zm |= 1 << q
        return xm, ym, zm

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product self*other as (phase, string)."""
        ops = dict(self.factors)
        phase = 1.0 + 0j
        for q, op in other.factors:
            if q not in ops:
                ops[q] = op
                continue
            ph, res = _PRODUCT[(ops[q], op)]
            phase *= ph
            if res is None:
                del ops[q]
            else:
                ops[q] = res
        return phase, PauliString(tuple(ops.items()))

    def __str__(self) -> str:
        if not self.factors:
            return "I"
        return " ".join(f"{op}{q}" for q, op in self.factors)


class QubitOperator:
    """Weighted sum of Pauli strings on a fixed number of qubits.

    Terms are kept canonical: one entry per distinct string, coefficients
    merged, and (on :meth:`simplify`) negligible terms dropped.
    """

    def __init__(self, n_qubits: int,
                 terms: Iterable[tuple[complex, PauliString]] = ()):
        if n_qubits <= 0:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = int(n_qubits)
        self._terms: dict[PauliString, complex] = {}
        for coeff, string in terms:
            self.add_term(coeff, string)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "QubitOperator":
        return cls(n_qubits, [(coeff, PauliString())])

    @classmethod
    def zero(cls, n_qubits: int) -> "QubitOperator":
        return cls(n_qubits)

    def add_term(self, coeff: complex, string: PauliString) -> None:
        if string.max_qubit() >= self.n_qubits:
            raise ValueError(
                f"string {string} exceeds {self.n_qubits} qubits")
        self._terms[string] = self._terms.get(string, 0.0) + complex(coeff)

    # -- inspection ------------------------------------------------------------
    def terms(self) -> Iterator[tuple[complex, PauliString]]:
        """Iterate (coeff, string) in a deterministic canonical order."""
        for string in sorted(self._terms, key=lambda s: s.factors):
            yield self._terms[string], string

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0.0)

    def simplify(self, tol: float = 1e-12) -> "QubitOperator":
        out = QubitOperator(self.n_qubits)
        for string, coeff in self._terms.items():
            if abs(coeff) > tol:
                out._terms[string] = coeff
        return out

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        """Pauli strings are Hermitian, so Hermiticity == real coefficients."""
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def norm(self) -> float:
        """Sum of coefficient magnitudes (an upper bound on the operator norm)."""
        return float(sum(abs(c) for c in self._terms.values()))

    # -- algebra ---------------------------------------------------------------
    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit-count mismatch")
        out = QubitOperator(self.n_qubits)
        out._terms = dict(self._terms)
        for string, coeff in other._terms.items():
            out._terms[string] = out._terms.get(string, 0.0) + coeff
        return out

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit-count mismatch")
            out = QubitOperator(self.n_qubits)
            for s1, c1 in self._terms.items():
                for s2, c2 in other._terms.items():
                    phase, s12 = s1 * s2
                    out._terms[s12] = out._terms.get(s12, 0.0) + c1 * c2 * phase
            return out
        out = QubitOperator(self.n_qubits)
        out._terms = {s: c * complex(other) for s, c in self._terms.items()}
        return out

    def __rmul__(self, other) -> "QubitOperator":
        return self * other

    def dagger(self) -> "QubitOperator":
        out = QubitOperator(self.n_qubits)
        out._terms = {s: np.conjugate(c) for s, c in self._terms.items()}
        return out

    def __str__(self) -> str:
        parts = [f"({c:.6g}) {s}" for c, s in self.terms()]
        return " + ".join(parts) if parts else "0"
