"""Pole representations of zero-temperature Green's functions from spectral moments.

Moment conventions
------------------
Two equivalent conventions appear in this package:

* *operator* moments, produced by the recursive fitting pipeline and the ED
  reference: ``M_op^(m) = <c_r^dag (H - E0)^m c_s>`` (hole) and
  ``<c_r (H - E0)^m c_s^dag>`` (particle). Both sectors use the positive
  semidefinite ``H - E0`` and therefore have nonnegative diagonal moments.
* *spectral* moments, the frequency-power integrals of the spectral function
  over the hole (omega <= 0) and particle (omega >= 0) half-lines, which is
  what the block-Lanczos construction consumes.

The particle sector coincides in both conventions; the hole sector differs
by a factor (-1)^m and elementwise conjugation, which
:func:`spectral_from_operator_moments` applies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HOLE = -1
PARTICLE = +1

_PSD_TOL = 1e-10
_RANK_TOL = 1e-8


class CausalityError(ValueError):
    pass


@dataclass
class SpectralMoments:
    """Per-sector moment matrices, orders 0..(len-1), spectral convention."""

    hole: np.ndarray      # (n_orders, d, d)
    particle: np.ndarray  # (n_orders, d, d)

    def __post_init__(self):
        self.hole = np.atleast_3d(np.asarray(self.hole, dtype=np.complex128))
        self.particle = np.atleast_3d(np.asarray(self.particle,
                                                 dtype=np.complex128))
        if self.hole.shape != self.particle.shape:
            raise ValueError("hole/particle moment shapes differ")

    @property
    def n_orders(self) -> int:
        return self.hole.shape[0]

    @property
    def dim(self) -> int:
        return self.hole.shape[1]


@dataclass
class PoleRepresentation:
    """Discrete Lehmann data: pole energies with Hermitian PSD residue matrices.

    ``sectors`` tags each pole HOLE (-1, energies <= 0) or PARTICLE (+1).
    """

    energies: np.ndarray          # (n_poles,)
    residues: np.ndarray          # (n_poles, d, d)
    sectors: np.ndarray = field(default=None)  # (n_poles,) of {-1, +1}

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=np.float64)
        self.residues = np.asarray(self.residues, dtype=np.complex128)
        if self.residues.ndim == 1:
            self.residues = self.residues.reshape(-1, 1, 1)
        if self.sectors is None:
            self.sectors = np.where(self.energies < 0.0, HOLE, PARTICLE)
        self.sectors = np.asarray(self.sectors, dtype=np.int8)

    @property
    def dim(self) -> int:
        return self.residues.shape[1]

    @property
    def n_poles(self) -> int:
        return len(self.energies)

    def total_weight(self) -> np.ndarray:
        return np.sum(self.residues, axis=0)

    def select(self, mask: np.ndarray) -> "PoleRepresentation":
        return PoleRepresentation(self.energies[mask], self.residues[mask],
                                  self.sectors[mask])

    def diagonal_weights(self, orbital: int) -> np.ndarray:
        return self.residues[:, orbital, orbital].real


def spectral_from_operator_moments(hole_op: np.ndarray,
                                   particle_op: np.ndarray) -> SpectralMoments:
    """Convert operator-convention moments to spectral-convention moments.

    The hole-sector measure lives on omega <= 0 while the operator recursion
    applies the nonnegative H - E0, so order m picks up (-1)^m; the row
    orientation additionally conjugates elementwise.
    """
    hole_op = np.atleast_3d(np.asarray(hole_op, dtype=np.complex128))
    particle_op = np.atleast_3d(np.asarray(particle_op, dtype=np.complex128))
    signs = (-1.0) ** np.arange(hole_op.shape[0])
    hole_spec = signs[:, None, None] * np.conj(hole_op)
    return SpectralMoments(hole=hole_spec, particle=particle_op.copy())


# -- block Lanczos --------------------------------------------------------------

def _psd_sqrt_pinv(mat: np.ndarray, rank_tol: float):
    """Hermitian PSD square root and pseudo-inverse sqrt with rank truncation."""
    herm = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    if len(vals) and vals.min() < -max(rank_tol, 1e-12) * max(1.0, abs(vals).max()):
        raise CausalityError(
            f"moment overlap has negative eigenvalue {vals.min():g}")
    vals = np.clip(vals, 0.0, None)
    cutoff = rank_tol * (vals.max() if vals.size else 0.0)
    keep = vals > cutoff
    rank = int(keep.sum())
    root = np.zeros_like(herm)
    pinv = np.zeros_like(herm)
    if rank:
        vk, uk = vals[keep], vecs[:, keep]
        root = (uk * np.sqrt(vk)) @ uk.conj().T
        pinv = (uk / np.sqrt(vk)) @ uk.conj().T
    return root, pinv, rank


def _sector_poles(moments: np.ndarray, rank_tol: float):
    """Moment-driven block Lanczos on one sector's spectral moments.

    Builds the block-tridiagonal coefficients from Hankel inner products of
    overlap-normalized moments, diagonalizes the resulting effective
    Hamiltonian, and returns (energies, residues). Orders 0..2L-1 yield L
    tridiagonal layers; with exactly representable inputs the first-block
    moments of the result match the inputs up to order 2L-1.
    """
    n_orders, d, _ = moments.shape
    layers = n_orders // 2
    if layers < 1:
        raise ValueError("need moment orders 0 and 1 at least")
    s_root, s_pinv, rank0 = _psd_sqrt_pinv(moments[0], rank_tol)
    if rank0 == 0:
        return np.zeros(0), np.zeros((0, d, d), dtype=np.complex128)
    norm = [s_pinv @ moments[m] @ s_pinv for m in range(2 * layers)]

    # Gram matrices of the Krylov blocks u_i = H^i w in the normalized metric
    gram0 = np.block([[norm[i + j] for j in range(layers)]
                      for i in range(layers)])
    gram1 = np.block([[norm[i + j + 1] for j in range(layers)]
                      for i in range(layers)])

    def inner(a, b, gram):
        return a.conj().T @ gram @ b

    # Lanczos vectors as coefficient blocks over the Krylov set
    q_blocks = []
    alphas, betas = [], []
    q = np.zeros((layers * d, d), dtype=np.complex128)
    q[:d] = np.eye(d)
    q_prev = None
    beta_prev = None
    for j in range(layers):
        alpha = inner(q, q, gram1)
        alpha = 0.5 * (alpha + alpha.conj().T)
        q_blocks.append(q)
        alphas.append(alpha)
        if j == layers - 1:
            break
        shifted = np.zeros_like(q)
        shifted[d:] = q[:-d]
        resid = shifted - q @ alpha
        if q_prev is not None:
            resid = resid - q_prev @ beta_prev.conj().T
        overlap = inner(resid, resid, gram0)
        beta, beta_pinv, rank = _psd_sqrt_pinv(overlap, rank_tol)
        if rank == 0:
            break  # Krylov chain exhausted: fewer layers than requested
        betas.append(beta)
        q_prev, beta_prev = q, beta
        q = resid @ beta_pinv

    n_blocks = len(alphas)
    h_eff = np.zeros((n_blocks * d, n_blocks * d), dtype=np.complex128)
    for j, alpha in enumerate(alphas):
        h_eff[j * d:(j + 1) * d, j * d:(j + 1) * d] = alpha
    for j, beta in enumerate(betas):
        h_eff[j * d:(j + 1) * d, (j + 1) * d:(j + 2) * d] = beta.conj().T
        h_eff[(j + 1) * d:(j + 2) * d, j * d:(j + 1) * d] = beta

    energies, vecs = np.linalg.eigh(h_eff)
    first_block = vecs[:d, :]
    residues = np.empty((len(energies), d, d), dtype=np.complex128)
    for i in range(len(energies)):
        v = s_root @ first_block[:, i]
        residues[i] = np.outer(v, v.conj())
    return energies, residues


def block_lanczos(m: SpectralMoments,
                  rank_tol: float = _RANK_TOL) -> PoleRepresentation:
    """Causal pole representation reproducing the given per-sector moments.

    Sectors are processed independently and concatenated; residues are PSD
    by construction. Singular zeroth moments take a rank-truncated branch.
    """
    e_h, r_h = _sector_poles(m.hole, rank_tol)
    e_p, r_p = _sector_poles(m.particle, rank_tol)
    energies = np.concatenate([e_h, e_p])
    residues = (np.concatenate([r_h, r_p]) if len(energies)
                else np.zeros((0, m.dim, m.dim), dtype=np.complex128))
    sectors = np.concatenate([np.full(len(e_h), HOLE, dtype=np.int8),
                              np.full(len(e_p), PARTICLE, dtype=np.int8)])
    rep = PoleRepresentation(energies, residues, sectors)
    _assert_causal(rep)
    return rep


def _assert_causal(rep: PoleRepresentation, tol: float = _PSD_TOL) -> None:
    for i in range(rep.n_poles):
        w = rep.residues[i]
        low = np.linalg.eigvalsh(0.5 * (w + w.conj().T)).min() if rep.dim > 1 \
            else w[0, 0].real
        if low < -tol * max(1.0, float(np.abs(w).max())):
            raise CausalityError(f"residue {i} not PSD (min eig {low:g})")


def reconstruct_moments(p: PoleRepresentation, m_max: int) -> SpectralMoments:
    """Spectral-convention moments sum_i w_i e_i^m per sector, orders 0..m_max."""
    d = p.dim
    hole = np.zeros((m_max + 1, d, d), dtype=np.complex128)
    particle = np.zeros((m_max + 1, d, d), dtype=np.complex128)
    powers = p.energies[None, :] ** np.arange(m_max + 1)[:, None]
    for m in range(m_max + 1):
        for i in range(p.n_poles):
            target = hole if p.sectors[i] == HOLE else particle
            target[m] += p.residues[i] * powers[m, i]
    return SpectralMoments(hole=hole, particle=particle)


# -- transforms ------------------------------------------------------------------

def spectral_function(p: PoleRepresentation, omega_grid: np.ndarray,
                      eta: float) -> np.ndarray:
    """Lorentzian-broadened A(omega), shape (n_omega, d, d)."""
    if eta <= 0:
        raise ValueError("broadening eta must be positive")
    omega = np.asarray(omega_grid, dtype=np.float64)
    lor = (eta / np.pi) / ((omega[:, None] - p.energies[None, :]) ** 2 + eta ** 2)
    return np.einsum("wi,iab->wab", lor, p.residues)


def imaginary_time_gf(p: PoleRepresentation, tau_grid: np.ndarray,
                      wrong_side_tol: float = 1e-8) -> np.ndarray:
    """Zero-temperature G(tau), shape (n_tau, d, d); tau = 0 means 0+.

    For tau > 0 only particle poles contribute with weight -w e^{-|e| tau};
    for tau < 0 only hole poles with +w e^{-|e| |tau|}. Poles on the wrong
    side of zero beyond `wrong_side_tol` raise :class:`CausalityError`.
    """
    wrong = ((p.sectors == PARTICLE) & (p.energies < -wrong_side_tol)) | \
            ((p.sectors == HOLE) & (p.energies > wrong_side_tol))
    if np.any(wrong):
        raise CausalityError(
            f"{int(wrong.sum())} pole(s) on the wrong side of omega=0")
    tau = np.asarray(tau_grid, dtype=np.float64)
    out = np.zeros((len(tau), p.dim, p.dim), dtype=np.complex128)
    decay = np.exp(-np.abs(p.energies)[None, :] * np.abs(tau)[:, None])
    pos = tau >= 0.0
    part = p.sectors == PARTICLE
    if part.any():
        out[pos] -= np.einsum("wi,iab->wab", decay[np.ix_(pos, part)],
                              p.residues[part])
    hole = ~part
    if hole.any() and (~pos).any():
        out[~pos] += np.einsum("wi,iab->wab", decay[np.ix_(~pos, hole)],
                               p.residues[hole])
    return out


def matsubara_gf(p: PoleRepresentation,
                 frequencies: np.ndarray) -> np.ndarray:
    """G(i omega) = sum_i w_i / (i omega - e_i), shape (n_freq, d, d)."""
    freqs = np.asarray(frequencies, dtype=np.complex128)
    if np.any(np.abs(freqs.real) > 1e-12 * np.maximum(1.0, np.abs(freqs))) or \
            np.any(freqs == 0):
        raise ValueError("frequencies must be purely imaginary and nonzero")
    denom = freqs[:, None] - p.energies[None, :]
    return np.einsum("wi,iab->wab", 1.0 / denom, p.residues)


def filter_poles(p: PoleRepresentation,
                 omega_cut: float) -> tuple[PoleRepresentation, float]:
    """Drop poles with |energy| <= omega_cut; no weight renormalization.

    Returns (filtered representation, trace of the removed weight).
    """
    if omega_cut < 0:
        raise ValueError("omega_cut must be nonnegative")
    keep = np.abs(p.energies) > omega_cut
    removed = float(np.real(np.trace(np.sum(p.residues[~keep], axis=0)))) \
        if (~keep).any() else 0.0
    return p.select(keep), removed


# -- Wasserstein metric ------------------------------------------------------------

def wasserstein_1d(x_a: np.ndarray, w_a: np.ndarray, x_b: np.ndarray,
                   w_b: np.ndarray, normalized: bool = True) -> float:
    """W1 between discrete measures on the line via the CDF-difference integral."""
    x_a, w_a = np.asarray(x_a, float), np.asarray(w_a, float)
    x_b, w_b = np.asarray(x_b, float), np.asarray(w_b, float)
    ta, tb = w_a.sum(), w_b.sum()
    if ta <= 0 or tb <= 0:
        raise ValueError("measures must have positive total weight")
    if normalized:
        w_a, w_b = w_a / ta, w_b / tb
    grid = np.sort(np.concatenate([x_a, x_b]))
    order_a = np.argsort(x_a)
    order_b = np.argsort(x_b)
    cdf_a = np.concatenate([[0.0], np.cumsum(w_a[order_a])])
    cdf_b = np.concatenate([[0.0], np.cumsum(w_b[order_b])])
    pos_a = np.searchsorted(x_a[order_a], grid[:-1], side="right")
    pos_b = np.searchsorted(x_b[order_b], grid[:-1], side="right")
    return float(np.sum(np.abs(cdf_a[pos_a] - cdf_b[pos_b]) * np.diff(grid)))


def wasserstein_distance(a: PoleRepresentation, b: PoleRepresentation,
                         orbital: int = 0, normalized: bool = True) -> float:
    """W1 between the diagonal spectral distributions of two pole sets."""
    return wasserstein_1d(a.energies, np.clip(a.diagonal_weights(orbital), 0, None),
                          b.energies, np.clip(b.diagonal_weights(orbital), 0, None),
                          normalized=normalized)
