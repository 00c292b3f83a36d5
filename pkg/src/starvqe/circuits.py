"""Compiled ansatz circuits over an explicit basis.

A circuit is a flat list of instructions acting on coefficient vectors of a
:class:`~starvqe.sectors.SectorBasis` (the full 2^n basis for the dense
route, a symmetry sector for fast optimization loops; both give identical
states because every slot exponential is evaluated exactly):

* ``PairRotation``: exp(theta G) for a single ladder product D with
  G = D - D^dag (real role) or i(D + D^dag) (imag role). D pairs basis
  states two by two, so the exponential is a set of independent 2x2
  rotations with fermionic sign factors.
* ``DiagBlock``: exp(i * diag(gmat @ theta_block)) for a run of commuting
  diagonal slots, applied as one exact phase layer.

Gradients come either from batched central finite differences (see
:mod:`starvqe.vqe`) or from the reverse-mode sweep implemented here, which
costs O(instructions) state passes per full gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, Segment, SlotSpec, circuit_plan, parameter_count
from .fermion import act_product
from .sectors import SectorBasis


@dataclass
class PairRotation:
    slot: int
    scale: float
    ia: np.ndarray   # target indices of D acting on the source states
    ib: np.ndarray   # source indices
    w: np.ndarray    # complex structure factors, |w| = 1


@dataclass
class DiagBlock:
    start: int
    count: int
    scale: float
    gmat: np.ndarray  # (dim, count) real generator diagonals


class CompiledCircuit:
    def __init__(self, instructions, n_params: int, dim: int):
        self.instructions = instructions
        self.n_params = n_params
        self.dim = dim

    # -- forward -----------------------------------------------------------------
    def apply(self, params: np.ndarray, psi0: np.ndarray) -> np.ndarray:
        psi = np.array(psi0, dtype=np.complex128, copy=True)
        for ins in self.instructions:
            _apply(ins, params, psi)
        return psi

    def apply_batched(self, param_sets: np.ndarray,
                      psi0: np.ndarray) -> np.ndarray:
        """Apply the circuit for many parameter vectors at once.

        ``param_sets`` has shape (n_sets, n_params); returns (dim, n_sets).
        """
        psi = np.repeat(np.asarray(psi0, dtype=np.complex128)[:, None],
                        len(param_sets), axis=1)
        thetas = np.ascontiguousarray(param_sets.T)  # (n_params, n_sets)
        for ins in self.instructions:
            if isinstance(ins, PairRotation):
                th = ins.scale * thetas[ins.slot]
                c, s = np.cos(th), np.sin(th)
                a = psi[ins.ia]
                b = psi[ins.ib]
                ws = ins.w[:, None] * s
                psi[ins.ia] = c * a + ws * b
                psi[ins.ib] = c * b - np.conj(ws) * a
            else:
                block = thetas[ins.start:ins.start + ins.count]
                psi *= np.exp(1j * ins.scale * (ins.gmat @ block))
        return psi

    # -- reverse-mode gradients ----------------------------------------------------
    def expectation_with_gradient(self, params: np.ndarray, psi0: np.ndarray,
                                  h_matvec):
        """(E, dE/dtheta) for E = <psi(theta)|H|psi(theta)> via adjoint sweep."""
        psi = self.apply(params, psi0)
        h_psi = h_matvec(psi)
        energy = float(np.real(np.vdot(psi, h_psi)))
        grad = np.zeros(self.n_params)
        lam = h_psi
        for ins in reversed(self.instructions):
            _accumulate_expectation_grad(ins, params, psi, lam, grad)
            _apply(ins, params, psi, invert=True)
            _apply(ins, params, lam, invert=True)
        return energy, 2.0 * grad

    def overlap_with_gradient(self, params: np.ndarray, psi0: np.ndarray,
                              target: np.ndarray):
        """(o, dC/dtheta) for o = <psi(theta)|target>, C = -|o|^2."""
        psi = self.apply(params, psi0)
        overlap = complex(np.vdot(psi, target))
        grad = np.zeros(self.n_params)
        mu = np.array(target, dtype=np.complex128, copy=True)
        for ins in reversed(self.instructions):
            _accumulate_overlap_grad(ins, params, psi, mu, overlap, grad)
            _apply(ins, params, psi, invert=True)
            _apply(ins, params, mu, invert=True)
        return overlap, grad


def _apply(ins, params, psi, invert: bool = False) -> None:
    sign = -1.0 if invert else 1.0
    if isinstance(ins, PairRotation):
        th = sign * ins.scale * params[ins.slot]
        c, s = np.cos(th), np.sin(th)
        a = psi[ins.ia]
        b = psi[ins.ib]
        psi[ins.ia] = c * a + (ins.w * s) * b
        psi[ins.ib] = c * b - (np.conj(ins.w) * s) * a
    else:
        th = params[ins.start:ins.start + ins.count]
        psi *= np.exp(1j * sign * ins.scale * (ins.gmat @ th))


def _accumulate_expectation_grad(ins, params, psi, lam, grad) -> None:
    # grad contribution (before the factor 2): scale * Re <lam| G |psi>
    if isinstance(ins, PairRotation):
        val = np.sum(np.conj(lam[ins.ia]) * ins.w * psi[ins.ib]) \
            - np.sum(np.conj(lam[ins.ib]) * np.conj(ins.w) * psi[ins.ia])
        grad[ins.slot] += ins.scale * val.real
    else:
        u = np.conj(lam) * psi
        # G_s = i diag(g_s): Re <lam|G_s|psi> = -Im(g_s . u)
        grad[ins.start:ins.start + ins.count] += \
            -ins.scale * (ins.gmat.T @ u).imag


def _accumulate_overlap_grad(ins, params, psi, mu, overlap, grad) -> None:
    # dC contribution for C = -|o|^2: -2 scale Re(conj(o) <G psi|mu>)
    if isinstance(ins, PairRotation):
        # <G psi|mu> = sum conj((G psi)[j]) mu[j] over the pair support
        inner = np.sum(np.conj(ins.w * psi[ins.ib]) * mu[ins.ia]) \
            + np.sum(np.conj(-np.conj(ins.w) * psi[ins.ia]) * mu[ins.ib])
        grad[ins.slot] += -2.0 * ins.scale * np.real(np.conj(overlap) * inner)
    else:
        u = np.conj(psi) * mu
        # (G_s psi)^dag mu = conj(i g_s psi)^T mu = -i (g_s . u)
        inner = -1j * (ins.gmat.T @ u)
        grad[ins.start:ins.start + ins.count] += \
            -2.0 * ins.scale * np.real(np.conj(overlap) * inner)


# -- compilation -------------------------------------------------------------------

def _pair_instruction(slot: SlotSpec, product, basis: SectorBasis,
                      scale: float) -> PairRotation | None:
    valid, targets, signs = act_product(basis.states, product)
    src = np.nonzero(valid)[0]
    if len(src) == 0:
        return None
    tgt = basis.index_of(targets[valid])
    if np.any(tgt < 0):
        raise ValueError("generator leaves the basis sector")
    role_w = 1.0 + 0.0j if slot.role == "real" else 1.0j
    w = role_w * signs[valid].astype(np.complex128)
    return PairRotation(slot=slot.index, scale=scale,
                        ia=tgt.astype(np.int64), ib=src.astype(np.int64), w=w)


def _diag_block(slots: tuple[SlotSpec, ...], basis: SectorBasis,
                scale: float) -> DiagBlock:
    start = slots[0].index
    count = len(slots)
    if [s.index for s in slots] != list(range(start, start + count)):
        raise ValueError("diagonal slots must be contiguous")
    gmat = np.zeros((basis.dim, count))
    states = basis.states
    for j, slot in enumerate(slots):
        col = np.zeros(basis.dim)
        for coeff, modes in slot.monomials:
            occ = np.ones(basis.dim)
            for m in modes:
                occ *= ((states >> np.uint64(m)) & np.uint64(1)).astype(float)
            col += coeff * occ
        gmat[:, j] = col
    return DiagBlock(start=start, count=count, scale=scale, gmat=gmat)


def compile_circuit(spec: AnsatzSpec, basis: SectorBasis) -> CompiledCircuit:
    instructions = []
    for segment in circuit_plan(spec):
        if segment.kind == "diag":
            if segment.slots:
                instructions.append(_diag_block(segment.slots, basis,
                                                segment.scale))
            continue
        slot_list = segment.slots[::-1] if segment.reverse else segment.slots
        for slot in slot_list:
            products = slot.products[::-1] if segment.reverse else slot.products
            for product in products:
                ins = _pair_instruction(slot, product, basis, segment.scale)
                if ins is not None:
                    instructions.append(ins)
    return CompiledCircuit(instructions, parameter_count(spec), basis.dim)


_CIRCUIT_CACHE: dict[tuple, CompiledCircuit] = {}


def compiled_circuit(spec: AnsatzSpec, basis: SectorBasis) -> CompiledCircuit:
    key = (spec, basis.key())
    if key not in _CIRCUIT_CACHE:
        _CIRCUIT_CACHE[key] = compile_circuit(spec, basis)
    return _CIRCUIT_CACHE[key]
