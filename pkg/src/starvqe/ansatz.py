"""Ansatz families: generator enumeration, parameter layout, state preparation.

Two families are provided, each with a sparse variant adapted to the star
bath geometry:

* ``uccgsd``: generalized singles and doubles with complex amplitudes. The
  one-body layer carries independent anti-Hermitian matrices per spin
  (n(n-1)/2 complex off-diagonals plus n imaginary diagonals per spin); the
  two-body layer enumerates Sz-conserving pairs of distinct creation and
  annihilation mode pairs. The sparse variant drops doubles whose four index
  slots touch three or more bath spin-orbitals.
* ``kucj``: an orbital-rotation layer followed by k sandwich layers
  exp(K_i) exp(J_i) exp(-K_i), where each K_i is a spin-shared anti-Hermitian
  orbital matrix (n^2 real parameters) and each J_i a purely imaginary
  density-density coupling with a spin-aligned channel (symmetric, zero
  diagonal) and an opposite-spin channel (symmetric with diagonal), n^2 real
  parameters in total. The sparse variant drops off-diagonal bath-bath J
  elements in both channels.

Parameter ordering is the circuit application order and is fixed: block by
block, off-diagonal (real, imag) slots in lexicographic index order, then
diagonal slots. Exponentials of sums of non-commuting generators are taken
as a first-order product over parameter slots in this order; each slot's own
exponential is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .fermion import SpinOrbitalLayout, Term
from .models import SitePartition
from .statevector import StateVector

FAMILY_UCCGSD = "uccgsd"
FAMILY_KUCJ = "kucj"


@dataclass(frozen=True)
class AnsatzSpec:
    family: str
    sparse: bool
    layout: SpinOrbitalLayout
    partition: SitePartition
    k: int = 1

    def __post_init__(self):
        if self.family not in (FAMILY_UCCGSD, FAMILY_KUCJ):
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.partition.layout != self.layout:
            raise ValueError("partition layout does not match spec layout")

    def with_k(self, k: int) -> "AnsatzSpec":
        return replace(self, k=k)


@dataclass(frozen=True)
class ParameterSlot:
    index: int
    role: str            # 'real' | 'imag' | 'phase'
    block: tuple


@dataclass(frozen=True)
class GeneratorTerm:
    """One enumerated generator with its parameter slots.

    kinds and indices:
      single_excitation (I, J): modes, I < J same spin (I == J: diagonal phase)
      double_excitation (I, J, K, L): creation pair (I<J), annihilation (K<L)
      ucj_K_element (p, q): spatial, p <= q (p == q: diagonal phase)
      ucj_J_element (p, q, channel): spatial, channel 'same' or 'anti'
    """

    kind: str
    indices: tuple
    slots: tuple[ParameterSlot, ...]


@dataclass(frozen=True)
class SlotSpec:
    """Executable description of one parameter slot's generator."""

    index: int
    kind: str                      # 'pair' | 'diag'
    role: str                      # 'real' | 'imag' (pair) | 'phase' (diag)
    products: tuple[Term, ...] = ()         # pair: ladder products D
    monomials: tuple[tuple[float, tuple[int, ...]], ...] = ()  # diag: occupancies


@dataclass(frozen=True)
class Segment:
    """One circuit segment: a run of rotations or one exact diagonal layer."""

    kind: str                      # 'rot' | 'diag'
    slots: tuple[SlotSpec, ...]
    scale: float = 1.0
    reverse: bool = False          # rot only: apply slot list in reverse


@dataclass
class ParameterVector:
    """Real parameters plus the block structure of their layout."""

    values: np.ndarray
    blocks: dict[tuple, slice] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)


class _Enumerator:
    def __init__(self):
        self.terms: list[GeneratorTerm] = []
        self.slot_specs: list[SlotSpec] = []
        self.blocks: dict[tuple, slice] = {}
        self._block_start = 0

    @property
    def n_slots(self) -> int:
        return len(self.slot_specs)

    def begin_block(self):
        self._block_start = self.n_slots

    def end_block(self, key: tuple):
        self.blocks[key] = slice(self._block_start, self.n_slots)

    def add_pair(self, kind, indices, block, products):
        i = self.n_slots
        slots = (ParameterSlot(i, "real", block),
                 ParameterSlot(i + 1, "imag", block))
        self.terms.append(GeneratorTerm(kind, indices, slots))
        self.slot_specs.append(SlotSpec(i, "pair", "real", products=products))
        self.slot_specs.append(SlotSpec(i + 1, "pair", "imag", products=products))

    def add_diag(self, kind, indices, block, monomials):
        i = self.n_slots
        slot = ParameterSlot(i, "phase", block)
        self.terms.append(GeneratorTerm(kind, indices, (slot,)))
        self.slot_specs.append(SlotSpec(i, "diag", "phase",
                                        monomials=tuple(monomials)))


def _one_body_block(enum: _Enumerator, layout: SpinOrbitalLayout, block: tuple,
                    per_spin: bool, kind_pair: str, kind_diag: str):
    """Anti-Hermitian one-body layer: off-diagonal (re, im) slots then
    imaginary diagonal phase slots."""
    n = layout.n_spatial
    spins = ("up", "down")
    if per_spin:
        for spin in spins:
            for p in range(n):
                for q in range(p + 1, n):
                    i, j = layout.mode(p, spin), layout.mode(q, spin)
                    products = (((i, True), (j, False)),)
                    enum.add_pair(kind_pair, (i, j), block, products)
    else:
        for p in range(n):
            for q in range(p + 1, n):
                products = tuple(
                    ((layout.mode(q, spin), True), (layout.mode(p, spin), False))
                    for spin in spins)
                enum.add_pair(kind_pair, (p, q), block, products)
    if per_spin:
        for spin in spins:
            for p in range(n):
                m = layout.mode(p, spin)
                enum.add_diag(kind_diag, (m, m), block, [(1.0, (m,))])
    else:
        for p in range(n):
            monos = [(1.0, (layout.mode(p, s),)) for s in spins]
            enum.add_diag(kind_diag, (p, p), block, monos)


def _jastrow_block(enum: _Enumerator, layout: SpinOrbitalLayout,
                   partition: SitePartition, block: tuple, sparse: bool):
    n = layout.n_spatial

    def bath_pair(p, q):
        return partition.is_bath_spatial(p) and partition.is_bath_spatial(q)

    for p in range(n):
        for q in range(p + 1, n):
            if sparse and bath_pair(p, q):
                continue
            monos = [(1.0, (layout.mode(p, "up"), layout.mode(q, "up"))),
                     (1.0, (layout.mode(p, "down"), layout.mode(q, "down")))]
            enum.add_diag("ucj_J_element", (p, q, "same"), block, monos)
    for p in range(n):
        for q in range(p, n):
            if sparse and p != q and bath_pair(p, q):
                continue
            if p == q:
                monos = [(1.0, (layout.mode(p, "up"), layout.mode(p, "down")))]
            else:
                monos = [(1.0, (layout.mode(p, "up"), layout.mode(q, "down"))),
                         (1.0, (layout.mode(q, "up"), layout.mode(p, "down")))]
            enum.add_diag("ucj_J_element", (p, q, "anti"), block, monos)


def _doubles_block(enum: _Enumerator, layout: SpinOrbitalLayout,
                   partition: SitePartition, block: tuple, sparse: bool):
    ups, downs = layout.up_modes(), layout.down_modes()
    pools = [list(combinations(ups, 2)),
             list(combinations(downs, 2)),
             [(u, d) for u in ups for d in downs]]

    def n_bath_slots(pair_a, pair_b):
        return sum(1 for m in (*pair_a, *pair_b) if partition.is_bath_mode(m))

    for pool in pools:
        for pair_a, pair_b in combinations(pool, 2):
            if sparse and n_bath_slots(pair_a, pair_b) >= 3:
                continue
            i, j = pair_a
            k, l = pair_b
            product = ((i, True), (j, True), (l, False), (k, False))
            enum.add_pair("double_excitation", (i, j, k, l), block, (product,))


def _enumerate(spec: AnsatzSpec) -> _Enumerator:
    enum = _Enumerator()
    if spec.family == FAMILY_UCCGSD:
        enum.begin_block()
        _one_body_block(enum, spec.layout, ("singles",), per_spin=True,
                        kind_pair="single_excitation",
                        kind_diag="single_excitation")
        enum.end_block(("singles",))
        enum.begin_block()
        _doubles_block(enum, spec.layout, spec.partition, ("doubles",),
                       spec.sparse)
        enum.end_block(("doubles",))
    else:
        enum.begin_block()
        _one_body_block(enum, spec.layout, ("orb",), per_spin=True,
                        kind_pair="single_excitation",
                        kind_diag="single_excitation")
        enum.end_block(("orb",))
        for i in range(1, spec.k + 1):
            enum.begin_block()
            _one_body_block(enum, spec.layout, ("K", i), per_spin=False,
                            kind_pair="ucj_K_element", kind_diag="ucj_K_element")
            enum.end_block(("K", i))
            enum.begin_block()
            _jastrow_block(enum, spec.layout, spec.partition, ("J", i),
                           spec.sparse)
            enum.end_block(("J", i))
    return enum


_ENUM_CACHE: dict[AnsatzSpec, _Enumerator] = {}


def _enumeration(spec: AnsatzSpec) -> _Enumerator:
    if spec not in _ENUM_CACHE:
        _ENUM_CACHE[spec] = _enumerate(spec)
    return _ENUM_CACHE[spec]


def enumerate_generators(spec: AnsatzSpec) -> list[GeneratorTerm]:
    """Deterministic ordered generator list defining the parameter layout."""
    return list(_enumeration(spec).terms)


def parameter_count(spec: AnsatzSpec) -> int:
    return _enumeration(spec).n_slots


def parameter_blocks(spec: AnsatzSpec) -> dict[tuple, slice]:
    return dict(_enumeration(spec).blocks)


def zero_parameters(spec: AnsatzSpec) -> ParameterVector:
    return ParameterVector(np.zeros(parameter_count(spec)),
                           parameter_blocks(spec))


def random_parameters(spec: AnsatzSpec, rng: np.random.Generator,
                      scale: float = 0.1) -> ParameterVector:
    values = rng.uniform(-scale, scale, parameter_count(spec))
    return ParameterVector(values, parameter_blocks(spec))


def circuit_plan(spec: AnsatzSpec) -> list[Segment]:
    """Ordered circuit segments implementing the ansatz.

    One-body blocks apply their off-diagonal rotations in slot order followed
    by one exact diagonal-phase layer. Each kucj sandwich applies K forward,
    J exactly, then the exact inverse of the K segment (reversed rotations
    with negated angles), so a zero J block reduces the sandwich to identity.
    """
    enum = _enumeration(spec)
    slots = enum.slot_specs
    segments: list[Segment] = []

    def split(block_key):
        sl = enum.blocks[block_key]
        pair = tuple(s for s in slots[sl] if s.kind == "pair")
        diag = tuple(s for s in slots[sl] if s.kind == "diag")
        return pair, diag

    if spec.family == FAMILY_UCCGSD:
        pair, diag = split(("singles",))
        segments.append(Segment("rot", pair))
        segments.append(Segment("diag", diag))
        pair, _ = split(("doubles",))
        segments.append(Segment("rot", pair))
        return segments

    pair, diag = split(("orb",))
    segments.append(Segment("rot", pair))
    segments.append(Segment("diag", diag))
    for i in range(1, spec.k + 1):
        k_pair, k_diag = split(("K", i))
        _, j_diag = split(("J", i))
        segments.append(Segment("rot", k_pair))
        segments.append(Segment("diag", k_diag))
        segments.append(Segment("diag", j_diag))
        segments.append(Segment("diag", k_diag, scale=-1.0))
        segments.append(Segment("rot", k_pair, scale=-1.0, reverse=True))
    return segments


def reference_occupation(n_up: int, n_down: int,
                         layout: SpinOrbitalLayout) -> int:
    """Bitmask filling the lowest spatial orbitals: up spins then down spins."""
    if n_up > layout.n_spatial or n_down > layout.n_spatial:
        raise ValueError("occupation exceeds available orbitals")
    mask = 0
    for p in range(n_up):
        mask |= 1 << layout.mode(p, "up")
    for p in range(n_down):
        mask |= 1 << layout.mode(p, "down")
    return mask


def sector_reference_index(layout: SpinOrbitalLayout, n_electrons: int,
                           twice_sz: int) -> int:
    """Deterministic reference bitmask for an (N, 2Sz) sector."""
    if (n_electrons + twice_sz) % 2:
        raise ValueError("incompatible N and 2Sz")
    n_up = (n_electrons + twice_sz) // 2
    n_down = n_electrons - n_up
    if min(n_up, n_down) < 0:
        raise ValueError("incompatible N and 2Sz")
    return reference_occupation(n_up, n_down, layout)


def reference_state(spec: AnsatzSpec, n_electrons: int,
                    twice_sz: int) -> StateVector:
    idx = sector_reference_index(spec.layout, n_electrons, twice_sz)
    return StateVector.basis_state(spec.layout.n_modes, idx)


def _basis_state_index(reference: StateVector) -> int:
    nz = np.nonzero(np.abs(reference.amplitudes) > 1e-12)[0]
    if len(nz) != 1 or abs(abs(reference.amplitudes[nz[0]]) - 1.0) > 1e-12:
        raise ValueError("reference must be a computational basis state")
    return int(nz[0])


def prepare_state(spec: AnsatzSpec, params, reference: StateVector) -> StateVector:
    """Apply the ansatz circuit to a basis-state reference.

    Particle number and S_z of the reference are conserved exactly: every
    slot exponential commutes with both symmetries.
    """
    from .circuits import compiled_circuit
    from .sectors import SectorBasis

    values = params.values if isinstance(params, ParameterVector) else np.asarray(params)
    n = parameter_count(spec)
    if values.shape != (n,):
        raise ValueError(f"expected {n} parameters, got {values.shape}")
    _basis_state_index(reference)
    circuit = compiled_circuit(spec, SectorBasis.full(spec.layout.n_modes))
    out = circuit.apply(np.asarray(values, dtype=np.float64),
                        reference.amplitudes)
    return StateVector(out, reference.n_qubits)
