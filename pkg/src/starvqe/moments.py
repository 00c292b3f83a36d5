"""Recursive variational computation of hole/particle spectral moments.

The excited-sector states generated by c_s^dag (or c_s) and repeated
application of H - E0 are each fitted by an ansatz state times a scalar
d_m >= 0; moment rows then factor into the product of the fitted scalars
and one transition amplitude per orbital. An exact-normalization oracle
mode replaces the fit with target/||target||, which reproduces ED moments
to solver precision and anchors the acceptance tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import AnsatzSpec, sector_reference_index
from .circuits import compiled_circuit
from .fermion import FermionOperator, jordan_wigner
from .pauli import QubitOperator
from .sectors import SectorBasis, dominant_sector
from .statevector import (ShotConfig, StateVector, expectation,
                          expectation_shot_variance,
                          sample_expectation, sample_transition_amplitude,
                          transition_shot_variance)
from .vqe import OptimizerConfig, _minimize_one, central_difference_gradient

PARTICLE = "particle"
HOLE = "hole"

FIT_ANSATZ = "ansatz"
FIT_ORACLE = "oracle"

_D_COLLAPSE = 1e-10
_EMPTY_TARGET = 1e-12


class FitError(RuntimeError):
    pass


@dataclass
class MomentRun:
    """One recursion: scalars d_m, fitted states, and moment rows for fixed s."""

    sector: str
    source: int
    n_mom: int
    e_g: float
    tracked_modes: list[int]
    d: list[float] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    theta: list = field(default_factory=list)
    phases: list[complex] = field(default_factory=list)
    rows: np.ndarray | None = None
    truncated_at: int | None = None
    fit_mode: str = FIT_ANSATZ
    metadata: dict = field(default_factory=dict)
    # runtime-only: sector basis and fitted sector vectors (not serialized)
    excited_basis: SectorBasis | None = None
    states: list = field(default_factory=list)

    @property
    def orders_computed(self) -> int:
        return len(self.d) - 1


def _derived_seed(base: int, *path: int) -> int:
    return int(np.random.SeedSequence([base, *path]).generate_state(1)[0])


class _FitProblem:
    def __init__(self, spec: AnsatzSpec, basis: SectorBasis,
                 reference_index: int):
        self.circuit = compiled_circuit(spec, basis)
        self.psi0 = np.zeros(basis.dim, dtype=np.complex128)
        self.psi0[basis.basis_index(reference_index)] = 1.0

    def overlap(self, params: np.ndarray, target: np.ndarray) -> complex:
        return complex(np.vdot(self.circuit.apply(params, self.psi0), target))

    def cost_batch(self, param_sets: np.ndarray, target: np.ndarray):
        phi = self.circuit.apply_batched(param_sets, self.psi0)
        return -np.abs(np.conj(phi.T) @ target) ** 2

    def value_and_grad(self, params, target, cfg: OptimizerConfig):
        if cfg.gradient == "adjoint":
            o, grad = self.circuit.overlap_with_gradient(params, self.psi0,
                                                         target)
            return -abs(o) ** 2, grad
        grad = central_difference_gradient(
            lambda sets: self.cost_batch(sets, target), params, cfg.fd_step)
        return -abs(self.overlap(params, target)) ** 2, grad


def _fit(problem: _FitProblem, target: np.ndarray, cfg: OptimizerConfig,
         warm_init: np.ndarray | None, seed_path: tuple):
    """Best-of-restarts minimization of C = -|<phi(theta)|target>|^2.

    Restart 0 starts from `warm_init` (zeros when absent); the rest are
    random. Returns (theta, overlap, cost).
    """
    n = problem.circuit.n_params
    inits = [warm_init if warm_init is not None else np.zeros(n)]
    for i in range(1, cfg.restarts):
        rng = np.random.default_rng(_derived_seed(cfg.base_seed, *seed_path, i))
        inits.append(rng.uniform(-cfg.init_scale, cfg.init_scale, n))
    best = None
    for theta0 in inits:
        theta, cost, _, status = _minimize_one(
            lambda x: problem.value_and_grad(x, target, cfg), theta0, cfg)
        if status == "diverged":
            continue
        if best is None or cost < best[1]:
            best = (theta, cost)
    if best is None:
        raise FitError("all fit restarts diverged")
    theta, cost = best
    return theta, problem.overlap(theta, target), cost


def fit_target_state(target: StateVector, spec: AnsatzSpec,
                     sector_reference: StateVector, cfg: OptimizerConfig):
    """Fit a known state as (ansatz state) * scalar: returns (theta, d, cost).

    d = |<phi(theta*)|target>| is bounded by ||target||, with equality iff
    the fit is exact. A target orthogonal to the reference's symmetry sector
    gives d = 0; an all-but-empty target raises :class:`FitError`.
    """
    amps = target.amplitudes
    if np.linalg.norm(amps) < _EMPTY_TARGET:
        raise FitError("degenerate fit: target norm below 1e-12")
    nz = np.nonzero(np.abs(sector_reference.amplitudes) > 1e-12)[0]
    if len(nz) != 1:
        raise ValueError("sector_reference must be a computational basis state")
    ref_index = int(nz[0])
    from .sectors import sector_of_index
    n_elec, tsz = sector_of_index(ref_index)
    basis = SectorBasis.for_sector(spec.layout.n_modes, n_elec, tsz)
    target_sec = basis.project(amps)
    if np.linalg.norm(target_sec) < _EMPTY_TARGET:
        return np.zeros(compiled_circuit(spec, basis).n_params), 0.0, 0.0
    problem = _FitProblem(spec, basis, ref_index)
    theta, overlap, cost = _fit(problem, target_sec, cfg, None, (0,))
    return theta, abs(overlap), cost


def recursive_moments(ground: StateVector, e_g: float, h: QubitOperator,
                      spec: AnsatzSpec, s: int, sector: str, n_mom: int,
                      cfg: OptimizerConfig, fit_mode: str = FIT_ANSATZ,
                      tracked_modes=None) -> MomentRun:
    """Hole or particle moment rows M^(m)_{r s} for m = 0..n_mom.

    Step 0 fits c_s^dag|G> (particle) or c_s|G> (hole); step m fits
    (H - E0) applied to the previous fitted state. After each fit the
    overlap phase is absorbed into the stored state so every d_m is real
    and nonnegative; moment rows are invariant under this gauge. A scalar
    collapse d_m < 1e-10 ends the recursion early (recorded, not an error).
    """
    if sector not in (PARTICLE, HOLE):
        raise ValueError(f"unknown sector {sector!r}")
    if fit_mode not in (FIT_ANSATZ, FIT_ORACLE):
        raise ValueError(f"unknown fit mode {fit_mode!r}")
    exact_e = expectation(ground, h)
    if abs(exact_e - e_g) > 1e-6 * max(1.0, abs(exact_e)):
        raise ValueError(f"E_G={e_g} inconsistent with <H>={exact_e}")

    n_modes = spec.layout.n_modes
    if tracked_modes is None:
        tracked_modes = list(range(n_modes))
    n_elec, tsz = dominant_sector(ground.amplitudes)
    ground_basis = SectorBasis.for_sector(n_modes, n_elec, tsz)
    g = ground_basis.project(ground.amplitudes)

    create = sector == PARTICLE
    dsz = (1 if s % 2 == 0 else -1) * (1 if create else -1)
    excited = SectorBasis.for_sector(n_modes, n_elec + (1 if create else -1),
                                     tsz + dsz)
    ref_index = sector_reference_index(
        spec.layout, n_elec + (1 if create else -1), tsz + dsz)
    h_exc = excited.qubit_matrix(h)
    source_op = excited.transfer_matrix(((s, create),), ground_basis)

    # probes for <G| c_r |phi> (particle) / <G| c_r^dag |phi> (hole):
    # row transfer maps the excited sector back onto the ground sector.
    row_ops = {}
    for j, r in enumerate(tracked_modes):
        if r % 2 != s % 2:
            continue
        row_ops[j] = ground_basis.transfer_matrix(((r, not create),), excited)

    problem = _FitProblem(spec, excited, ref_index) if fit_mode == FIT_ANSATZ \
        else None

    run = MomentRun(sector=sector, source=s, n_mom=n_mom, e_g=e_g,
                    tracked_modes=list(tracked_modes), fit_mode=fit_mode,
                    excited_basis=excited,
                    metadata={"restarts": cfg.restarts,
                              "gradient": cfg.gradient,
                              "excited_reference": ref_index})
    rows = np.zeros((n_mom + 1, len(tracked_modes)), dtype=np.complex128)

    target = source_op @ g
    warm = None
    d_product = 1.0
    for m in range(n_mom + 1):
        norm = np.linalg.norm(target)
        if norm < _EMPTY_TARGET:
            raise FitError(f"degenerate fit at order {m}: empty target")
        if fit_mode == FIT_ORACLE:
            theta, overlap, cost = None, complex(norm), -norm ** 2
        else:
            theta, overlap, cost = _fit(problem, target, cfg, warm, (m,))
            warm = theta
        d_m = abs(overlap)
        if d_m < _D_COLLAPSE:
            run.truncated_at = m
            break
        phase = overlap / d_m
        if fit_mode == FIT_ORACLE:
            phi = target / norm
        else:
            phi = phase * problem.circuit.apply(theta, problem.psi0)
        run.d.append(float(d_m))
        run.costs.append(float(cost))
        run.theta.append(None if theta is None else np.array(theta))
        run.phases.append(complex(phase))
        run.states.append(phi)
        d_product *= d_m
        for j, op in row_ops.items():
            rows[m, j] = d_product * complex(np.vdot(g, op @ phi))
        target = h_exc @ phi - e_g * phi

    run.rows = rows[:len(run.d)]
    return run


def _ladder_qubit_op(mode: int, dagger: bool, n_modes: int) -> QubitOperator:
    return jordan_wigner(
        FermionOperator(n_modes, [(1.0, ((mode, dagger),))]))


def noisy_scalar_remeasure(run: MomentRun, ground: StateVector,
                           spec: AnsatzSpec, h: QubitOperator,
                           cfg: ShotConfig) -> MomentRun:
    """Re-measure E_G, every d_m, and every row amplitude with shot noise.

    Optimization is never repeated under noise: the stored states are kept
    and only the scalar measurements are re-drawn, deterministically in the
    configured seed. d_m estimates take the real quadrature (the phase
    gauge makes the exact values real and nonnegative).
    """
    if run.rows is None or run.excited_basis is None:
        raise ValueError("run must be a completed noiseless MomentRun")
    n_modes = spec.layout.n_modes
    create = run.sector == PARTICLE
    dense_states = [StateVector(run.excited_basis.embed(v), n_modes)
                    for v in run.states]

    e_seed = _derived_seed(cfg.rng_seed, 0)
    e_hat = sample_expectation(ground, h,
                               ShotConfig(cfg.shots_per_term, e_seed))

    noisy = MomentRun(sector=run.sector, source=run.source, n_mom=run.n_mom,
                      e_g=e_hat, tracked_modes=list(run.tracked_modes),
                      d=[], costs=list(run.costs), theta=list(run.theta),
                      phases=list(run.phases), truncated_at=run.truncated_at,
                      fit_mode=run.fit_mode, excited_basis=run.excited_basis,
                      states=list(run.states),
                      metadata=dict(run.metadata,
                                    shots_per_term=cfg.shots_per_term,
                                    shot_budget="per_pauli_term",
                                    noise_seed=cfg.rng_seed))

    h_shifted = h + QubitOperator.identity(n_modes, -e_hat)
    source_qop = _ladder_qubit_op(run.source, create, n_modes)
    for m in range(len(run.d)):
        seed = _derived_seed(cfg.rng_seed, 1, m)
        shot = ShotConfig(cfg.shots_per_term, seed)
        if m == 0:
            amp = sample_transition_amplitude(dense_states[0], source_qop,
                                              ground, shot)
        else:
            amp = sample_transition_amplitude(dense_states[m], h_shifted,
                                              dense_states[m - 1], shot)
        noisy.d.append(float(amp.real))

    rows = np.zeros_like(run.rows)
    d_product = 1.0
    for m in range(len(noisy.d)):
        d_product *= noisy.d[m]
        for j, r in enumerate(run.tracked_modes):
            if r % 2 != run.source % 2:
                continue
            row_qop = _ladder_qubit_op(r, not create, n_modes)
            seed = _derived_seed(cfg.rng_seed, 2, m, j)
            amp = sample_transition_amplitude(
                ground, row_qop, dense_states[m],
                ShotConfig(cfg.shots_per_term, seed))
            rows[m, j] = d_product * amp
    noisy.rows = rows
    return noisy


def propagated_moment_std(run: MomentRun, ground: StateVector,
                          spec: AnsatzSpec, h: QubitOperator,
                          shots: int) -> np.ndarray:
    """First-order analytic shot-error estimate for each noisy moment row.

    Treats the sampled scalars as independent; correlations through the
    shared E_G estimate are neglected (the acceptance band allows a factor
    of a few).
    """
    if run.rows is None:
        raise ValueError("run has no rows")
    n_modes = spec.layout.n_modes
    create = run.sector == PARTICLE
    dense_states = [StateVector(run.excited_basis.embed(v), n_modes)
                    for v in run.states]
    var_e = expectation_shot_variance(ground, h, shots)

    d = np.array(run.d)
    var_d = np.zeros(len(d))
    source_qop = _ladder_qubit_op(run.source, create, n_modes)
    h_shifted = h + QubitOperator.identity(n_modes, -run.e_g)
    for m in range(len(d)):
        if m == 0:
            vre, _ = transition_shot_variance(dense_states[0], source_qop,
                                              ground, shots)
        else:
            vre, _ = transition_shot_variance(dense_states[m], h_shifted,
                                              dense_states[m - 1], shots)
            overlap = complex(np.vdot(dense_states[m].amplitudes,
                                      dense_states[m - 1].amplitudes))
            vre += (abs(overlap) ** 2) * var_e
        var_d[m] = vre

    out = np.zeros(run.rows.shape)
    for m in range(run.rows.shape[0]):
        rel_d = np.sum(var_d[:m + 1] / np.maximum(d[:m + 1] ** 2, 1e-30))
        for j, r in enumerate(run.tracked_modes):
            if r % 2 != run.source % 2:
                continue
            row_qop = _ladder_qubit_op(r, not create, n_modes)
            vre, vim = transition_shot_variance(ground, row_qop,
                                                dense_states[m], shots)
            amp = run.rows[m, j] / np.prod(d[:m + 1])
            var_amp = vre + vim
            mag2 = max(abs(amp) ** 2, 1e-30)
            out[m, j] = abs(run.rows[m, j]) * np.sqrt(
                rel_d + var_amp / mag2) if abs(amp) > 1e-12 \
                else np.prod(d[:m + 1]) * np.sqrt(var_amp)
    return out
