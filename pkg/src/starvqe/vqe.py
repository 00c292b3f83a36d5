"""Ground-state energy minimization with restarts and the k-uCJ warm-start schedule.

Optimization runs on a symmetry-sector evaluator (identical states to the
dense route, orders of magnitude fewer amplitudes) with BFGS. Derivatives
default to batched central finite differences; an exact reverse-mode
gradient is available for the large parameter counts where finite
differences are impractical.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .ansatz import (AnsatzSpec, FAMILY_KUCJ, parameter_blocks,
                     parameter_count, prepare_state)
from .circuits import compiled_circuit
from .pauli import QubitOperator
from .sectors import SectorBasis, sector_of_index
from .statevector import StateVector, expectation

GRADIENT_FINITE_DIFFERENCE = "finite_difference"
GRADIENT_ADJOINT = "adjoint"


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 2000
    gradient: str = GRADIENT_FINITE_DIFFERENCE
    fd_step: float = 1e-4
    gtol: float = 1e-7
    energy_tol: float | None = None
    restarts: int = 1
    base_seed: int = 0
    init_scale: float = 0.1
    threads: int = 1

    def __post_init__(self):
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.gradient not in (GRADIENT_FINITE_DIFFERENCE, GRADIENT_ADJOINT):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")


@dataclass
class RestartRecord:
    seed: int
    energy: float
    n_iterations: int
    status: str


@dataclass
class VqeResult:
    best_params: np.ndarray
    best_energy: float
    best_restart: int
    restarts: list[RestartRecord]
    n_params: int
    metadata: dict = field(default_factory=dict)

    @property
    def restart_energies(self) -> list[float]:
        return [r.energy for r in self.restarts]


class SectorEvaluator:
    """Fast energy/overlap evaluation of an ansatz inside one (N, Sz) sector."""

    def __init__(self, spec: AnsatzSpec, h: QubitOperator, reference_index: int):
        n_elec, twice_sz = sector_of_index(reference_index)
        self.spec = spec
        self.h_qubit = h
        self.basis = SectorBasis.for_sector(spec.layout.n_modes, n_elec, twice_sz)
        self.circuit = compiled_circuit(spec, self.basis)
        self.h_mat = self.basis.qubit_matrix(h)
        self.psi0 = np.zeros(self.basis.dim, dtype=np.complex128)
        self.psi0[self.basis.basis_index(reference_index)] = 1.0

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    def state(self, params: np.ndarray) -> np.ndarray:
        return self.circuit.apply(params, self.psi0)

    def energy(self, params: np.ndarray) -> float:
        psi = self.state(params)
        return float(np.real(np.vdot(psi, self.h_mat @ psi)))

    def energy_batch(self, param_sets: np.ndarray) -> np.ndarray:
        psi = self.circuit.apply_batched(param_sets, self.psi0)
        return np.real(np.einsum("is,is->s", np.conj(psi), self.h_mat @ psi))

    def value_and_grad(self, params: np.ndarray, cfg: OptimizerConfig):
        if cfg.gradient == GRADIENT_ADJOINT:
            return self.circuit.expectation_with_gradient(
                params, self.psi0, lambda v: self.h_mat @ v)
        grad = central_difference_gradient(self.energy_batch, params,
                                           cfg.fd_step)
        return self.energy(params), grad


def central_difference_gradient(batch_fn, params: np.ndarray,
                                step: float) -> np.ndarray:
    """Central finite differences, evaluated as one batched sweep."""
    n = len(params)
    probes = np.repeat(params[None, :], 2 * n, axis=0)
    idx = np.arange(n)
    probes[2 * idx, idx] += step
    probes[2 * idx + 1, idx] -= step
    values = batch_fn(probes)
    return (values[0::2] - values[1::2]) / (2.0 * step)


def _minimize_one(value_and_grad, theta0: np.ndarray, cfg: OptimizerConfig):
    """Single BFGS run; returns (params, energy, n_iter, status)."""
    last = {"f": None}

    def fun(x):
        f, g = value_and_grad(x)
        if not np.isfinite(f):
            raise FloatingPointError("non-finite energy")
        return f, g

    callback = None
    if cfg.energy_tol is not None:
        def callback(xk):
            f, _ = value_and_grad(xk)
            prev, last["f"] = last["f"], f
            if prev is not None and abs(prev - f) < cfg.energy_tol:
                raise StopIteration

    try:
        res = scipy.optimize.minimize(
            fun, theta0, jac=True, method="BFGS", callback=callback,
            options={"maxiter": cfg.max_iterations, "gtol": cfg.gtol})
        return res.x, float(res.fun), int(res.nit), "converged" if res.success else "max_iter"
    except FloatingPointError:
        return theta0, np.nan, 0, "diverged"


def _restart_worker(payload):
    """Process-pool entry: rebuild the evaluator and run one restart."""
    spec, h, reference_index, cfg, theta0 = payload
    evaluator = SectorEvaluator(spec, h, reference_index)
    return _minimize_one(lambda x: evaluator.value_and_grad(x, cfg),
                         theta0, cfg)


def run_restarts(evaluator: SectorEvaluator, cfg: OptimizerConfig,
                 init_points: list[np.ndarray], seeds: list[int],
                 reference_index: int | None = None) -> VqeResult:
    """Run BFGS from each initial point; best energy wins.

    Restart outcomes depend only on their initial point, so sequential and
    process-parallel execution produce identical results.
    """
    if cfg.threads > 1 and len(init_points) > 1 and reference_index is not None:
        payloads = [(evaluator.spec, evaluator.h_qubit, reference_index, cfg,
                     theta0) for theta0 in init_points]
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(_restart_worker, payloads))
    else:
        outcomes = [
            _minimize_one(lambda x: evaluator.value_and_grad(x, cfg),
                          theta0, cfg)
            for theta0 in init_points]

    records = [RestartRecord(seed=seeds[i], energy=e, n_iterations=nit,
                             status=status)
               for i, (_, e, nit, status) in enumerate(outcomes)]
    finite = [i for i, r in enumerate(records) if np.isfinite(r.energy)]
    if not finite:
        raise RuntimeError("all restarts diverged")
    best = min(finite, key=lambda i: records[i].energy)
    return VqeResult(
        best_params=np.asarray(outcomes[best][0], dtype=np.float64),
        best_energy=records[best].energy,
        best_restart=best,
        restarts=records,
        n_params=evaluator.n_params,
        metadata={"gradient": cfg.gradient, "fd_step": cfg.fd_step,
                  "restarts": cfg.restarts, "init_scale": cfg.init_scale},
    )


def energy(spec: AnsatzSpec, params, h_qubit: QubitOperator,
           reference: StateVector) -> float:
    """Exact energy of the prepared state through the dense route."""
    return expectation(prepare_state(spec, params, reference), h_qubit)


def minimize_energy(spec: AnsatzSpec, h: QubitOperator,
                    reference: StateVector, cfg: OptimizerConfig,
                    init_points: list[np.ndarray] | None = None) -> VqeResult:
    """Best-of-restarts BFGS minimization of the ansatz energy.

    Restart i draws its initial parameters uniformly from
    [-init_scale, init_scale] with seed base_seed + i.
    """
    ref_index = _reference_index(reference)
    evaluator = SectorEvaluator(spec, h, ref_index)
    seeds = [cfg.base_seed + i for i in range(cfg.restarts)]
    if init_points is None:
        init_points = [
            np.random.default_rng(seed).uniform(
                -cfg.init_scale, cfg.init_scale, evaluator.n_params)
            for seed in seeds]
    if cfg.max_iterations == 0:
        records = [RestartRecord(seed=seeds[i], energy=evaluator.energy(p),
                                 n_iterations=0, status="init_only")
                   for i, p in enumerate(init_points)]
        best = int(np.argmin([r.energy for r in records]))
        return VqeResult(best_params=init_points[best],
                         best_energy=records[best].energy, best_restart=best,
                         restarts=records, n_params=evaluator.n_params,
                         metadata={"gradient": cfg.gradient})
    return run_restarts(evaluator, cfg, init_points, seeds,
                        reference_index=ref_index)


def warm_start_schedule(spec: AnsatzSpec, h: QubitOperator,
                        reference: StateVector, k_max: int,
                        cfg: OptimizerConfig) -> list[VqeResult]:
    """Optimize k-uCJ for k = 1..k_max, reusing the previous optimum.

    For k >= 2, sandwich blocks 2..k start from the optimized blocks 1..k-1
    of the previous result (the orbital rotation is carried over as well)
    while block 1 is randomized. Restart 0 instead zeroes block 1, which
    makes the new sandwich an exact identity and guarantees the best energy
    is non-increasing in k.
    """
    if spec.family != FAMILY_KUCJ:
        raise ValueError("warm_start_schedule applies to the kucj family")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    results: list[VqeResult] = []
    prev: VqeResult | None = None
    for k in range(1, k_max + 1):
        spec_k = spec.with_k(k)
        if prev is None:
            results.append(minimize_energy(spec_k, h, reference, cfg))
            prev = results[-1]
            continue
        blocks = parameter_blocks(spec_k)
        prev_blocks = parameter_blocks(spec_k.with_k(k - 1))
        n = parameter_count(spec_k)
        seeds = [cfg.base_seed + i for i in range(cfg.restarts)]
        init_points = []
        for i, seed in enumerate(seeds):
            theta0 = np.zeros(n)
            theta0[blocks[("orb",)]] = prev.best_params[prev_blocks[("orb",)]]
            for j in range(1, k):
                theta0[blocks[("K", j + 1)]] = prev.best_params[prev_blocks[("K", j)]]
                theta0[blocks[("J", j + 1)]] = prev.best_params[prev_blocks[("J", j)]]
            if i > 0:
                rng = np.random.default_rng(seed)
                for key in (("K", 1), ("J", 1)):
                    sl = blocks[key]
                    theta0[sl] = rng.uniform(-cfg.init_scale, cfg.init_scale,
                                             sl.stop - sl.start)
            init_points.append(theta0)
        results.append(minimize_energy(spec_k, h, reference, cfg,
                                       init_points=init_points))
        prev = results[-1]
    return results


def _reference_index(reference: StateVector) -> int:
    nz = np.nonzero(np.abs(reference.amplitudes) > 1e-12)[0]
    if len(nz) != 1:
        raise ValueError("reference must be a computational basis state")
    return int(nz[0])
