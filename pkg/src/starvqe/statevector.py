"""Dense state vectors with Pauli operations and a shot-noise measurement model.

Basis convention is little-endian: amplitude index ``n`` encodes qubit ``j``
in bit ``j``. All operations are pure functions; sampled estimators own their
RNG through an explicit :class:`ShotConfig` seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, QubitOperator

_NORM_TOL = 1e-12
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class ShotConfig:
    """Measurement budget for sampled estimators.

    ``shots_per_term`` is the number of projective measurements allotted to
    each Pauli term of each observable (the 30,000-shot budget is applied
    per term; this choice is recorded in run metadata).
    """

    shots_per_term: int = 30_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.shots_per_term < 1:
            raise ValueError("shots_per_term must be >= 1")


@dataclass
class StateVector:
    """Normalized complex amplitudes over the 2^n computational basis."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude length must be 2**n_qubits")

    @classmethod
    def zero_state(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_qubits)


def _check_indices(state: StateVector, p: PauliString) -> None:
    if p.max_qubit() >= state.n_qubits:
        raise ValueError(
            f"Pauli string {p} out of range for {state.n_qubits} qubits")


def _pauli_action(p: PauliString, n_qubits: int):
    """Return (flip_mask, phases) with P|n> = phases[n] |n ^ flip_mask>."""
    xm, ym, zm = p.masks()
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(ym | zm)) & 1
    n_y = bin(ym).count("1")
    phases = (1j) ** n_y * np.where(parity, -1.0, 1.0)
    return xm | ym, phases.astype(np.complex128)


def apply_pauli_string(state: StateVector, p: PauliString) -> StateVector:
    """Return P|psi>. Norm preserved; Y factors contribute their +-i phases."""
    _check_indices(state, p)
    flip, phases = _pauli_action(p, state.n_qubits)
    out = np.empty_like(state.amplitudes)
    idx = np.arange(len(out)) ^ flip
    out[idx] = phases * state.amplitudes
    return StateVector(out, state.n_qubits)


def apply_pauli_rotation(state: StateVector, p: PauliString,
                         angle: float) -> StateVector:
    """Return exp(-i*angle*P/2)|psi> = cos(a/2)|psi> - i sin(a/2) P|psi>."""
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    _check_indices(state, p)
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    p_psi = apply_pauli_string(state, p)
    return StateVector(c * state.amplitudes - 1j * s * p_psi.amplitudes,
                       state.n_qubits)


def apply_number_diagonal(state: StateVector,
                          diag_generator: QubitOperator) -> StateVector:
    """Apply exp(G) exactly for an anti-Hermitian Z/identity generator G.

    Each term must contain only Z factors with a purely imaginary
    coefficient, so exp(G) is a per-basis-state phase (no Trotter error).
    """
    if diag_generator.n_qubits != state.n_qubits:
        raise ValueError("qubit-count mismatch")
    exponent = np.zeros(len(state.amplitudes))
    idx = np.arange(len(state.amplitudes), dtype=np.uint64)
    for coeff, string in diag_generator.terms():
        xm, ym, zm = string.masks()
        if xm or ym:
            raise ValueError("diagonal generator contains X or Y factors")
        if abs(coeff.real) > 1e-12 * max(1.0, abs(coeff)):
            raise ValueError("diagonal generator is not anti-Hermitian")
        parity = np.bitwise_count(idx & np.uint64(zm)) & 1
        exponent += coeff.imag * np.where(parity, -1.0, 1.0)
    return StateVector(np.exp(1j * exponent) * state.amplitudes,
                       state.n_qubits)


def expectation(state: StateVector, op: QubitOperator) -> float:
    """<psi|O|psi> for Hermitian O; the residual imaginary part is asserted small."""
    if not op.is_hermitian():
        raise ValueError("expectation requires a Hermitian operator")
    value = transition_amplitude(state, op, state)
    if abs(value.imag) >= _IMAG_TOL:
        raise ValueError(f"expectation has imaginary part {value.imag:g}")
    return float(value.real)


def transition_amplitude(bra: StateVector, op: QubitOperator,
                         ket: StateVector) -> complex:
    """<bra|O|ket> computed exactly."""
    if bra.n_qubits != ket.n_qubits or op.n_qubits != ket.n_qubits:
        raise ValueError("qubit-count mismatch")
    acc = np.zeros_like(ket.amplitudes)
    for coeff, string in op.terms():
        acc += coeff * apply_pauli_string(ket, string).amplitudes
    return complex(np.vdot(bra.amplitudes, acc))


def _binomial_signal(rng: np.random.Generator, shots: int, value: float) -> float:
    """Sample the +-1 measurement average for an exact signal in [-1, 1]."""
    p0 = min(1.0, max(0.0, (1.0 + value) / 2.0))
    k = rng.binomial(shots, p0)
    return 2.0 * k / shots - 1.0


def sample_expectation(state: StateVector, op: QubitOperator,
                       cfg: ShotConfig) -> float:
    """Shot-noise estimate of <psi|O|psi>.

    Each Pauli term with (real) coefficient c and exact expectation e is
    estimated from Binomial(shots, (1+e)/2) counts; the estimator is
    unbiased and deterministic for a fixed seed.
    """
    if not op.is_hermitian():
        raise ValueError("sample_expectation requires a Hermitian operator")
    rng = np.random.default_rng(cfg.rng_seed)
    total = 0.0
    for coeff, string in op.terms():
        e = transition_amplitude(state, QubitOperator(op.n_qubits, [(1.0, string)]),
                                 state).real
        total += coeff.real * _binomial_signal(rng, cfg.shots_per_term, e)
    return total


def sample_transition_amplitude(bra: StateVector, op: QubitOperator,
                                ket: StateVector, cfg: ShotConfig) -> complex:
    """Shot-noise estimate of <bra|O|ket> via ancilla-circuit statistics.

    Per term, the ancilla measurement signal p0 - p1 equals Re of the term
    amplitude for phase setting 0 and -Im for phase setting pi/2. Both
    quadratures are sampled from the exact amplitudes (binomial counts),
    reproducing the measurement distribution of the one-ancilla circuit.
    """
    if bra.n_qubits != ket.n_qubits or op.n_qubits != ket.n_qubits:
        raise ValueError("qubit-count mismatch")
    rng = np.random.default_rng(cfg.rng_seed)
    total = 0.0 + 0.0j
    for coeff, string in op.terms():
        amp = complex(np.vdot(bra.amplitudes,
                              apply_pauli_string(ket, string).amplitudes))
        re_est = _binomial_signal(rng, cfg.shots_per_term, amp.real)
        minus_im_est = _binomial_signal(rng, cfg.shots_per_term, -amp.imag)
        total += coeff * (re_est - 1j * minus_im_est)
    return total


def expectation_shot_variance(state: StateVector, op: QubitOperator,
                              shots: int) -> float:
    """Analytic variance of :func:`sample_expectation` for this state and budget."""
    var = 0.0
    for coeff, string in op.terms():
        e = transition_amplitude(
            state, QubitOperator(op.n_qubits, [(1.0, string)]), state).real
        var += (coeff.real ** 2) * max(0.0, 1.0 - e * e) / shots
    return var


def transition_shot_variance(bra: StateVector, op: QubitOperator,
                             ket: StateVector, shots: int) -> tuple[float, float]:
    """Analytic (Re, Im) variances of :func:`sample_transition_amplitude`."""
    var_re = var_im = 0.0
    for coeff, string in op.terms():
        amp = complex(np.vdot(bra.amplitudes,
                              apply_pauli_string(ket, string).amplitudes))
        vre = max(0.0, 1.0 - amp.real ** 2) / shots
        vim = max(0.0, 1.0 - amp.imag ** 2) / shots
        # coeff mixes the quadratures: c*(re - i*(-im_est)) with c complex
        cr, ci = coeff.real, coeff.imag
        var_re += cr * cr * vre + ci * ci * vim
        var_im += ci * ci * vre + cr * cr * vim
    return var_re, var_im
