"""Star-geometry impurity model builders.

Both models follow the same template: interacting impurity orbitals with
on-site repulsion U and chemical potential mu, noninteracting bath orbitals
at energies eps_k, and hybridization -V_k between each bath orbital and the
single impurity orbital it attaches to. Bath orbitals never couple to each
other (star geometry).
"""
from __future__ import annotations

from dataclasses import dataclass

from .fermion import FermionOperator, SpinOrbitalLayout, number_operator


@dataclass(frozen=True)
class SitePartition:
    """Impurity/bath split at both the spatial-orbital and mode level."""

    layout: SpinOrbitalLayout
    impurity_spatial: tuple[int, ...]
    bath_spatial: tuple[int, ...]

    def __post_init__(self):
        overlap = set(self.impurity_spatial) & set(self.bath_spatial)
        if overlap:
            raise ValueError(f"orbitals in both partitions: {overlap}")
        union = set(self.impurity_spatial) | set(self.bath_spatial)
        if union != set(range(self.layout.n_spatial)):
            raise ValueError("partition does not cover all spatial orbitals")

    @property
    def impurity_modes(self) -> tuple[int, ...]:
        return tuple(m for p in self.impurity_spatial
                     for m in (2 * p, 2 * p + 1))

    @property
    def bath_modes(self) -> tuple[int, ...]:
        return tuple(m for p in self.bath_spatial for m in (2 * p, 2 * p + 1))

    def is_bath_mode(self, mode: int) -> bool:
        return (mode // 2) in self.bath_spatial

    def is_bath_spatial(self, spatial: int) -> bool:
        return spatial in self.bath_spatial


@dataclass(frozen=True)
class StarImpurityModel:
    """Parameters of a star-geometry impurity Hamiltonian.

    ``V[b]`` is the hybridization between bath spatial orbital
    ``bath_spatial[b]`` and the impurity it attaches to; ``eps[b]`` is that
    bath orbital's energy. ``t`` is the impurity-impurity hopping (zero for
    the single-site model).
    """

    n_imp_spatial: int
    n_bath_spatial: int
    U: float
    mu: float
    t: float
    V: tuple[float, ...]
    eps: tuple[float, ...]
    bath_attachment: tuple[int, ...]  # per bath orbital: attached impurity

    def __post_init__(self):
        nb = self.n_bath_spatial
        if not (len(self.V) == len(self.eps) == len(self.bath_attachment) == nb):
            raise ValueError("V, eps, bath_attachment must have one entry per bath orbital")
        if any(not 0 <= a < self.n_imp_spatial for a in self.bath_attachment):
            raise ValueError("bath_attachment references an unknown impurity orbital")

    @property
    def n_spatial(self) -> int:
        return self.n_imp_spatial + self.n_bath_spatial

    @property
    def layout(self) -> SpinOrbitalLayout:
        return SpinOrbitalLayout(self.n_spatial)

    @property
    def partition(self) -> SitePartition:
        return SitePartition(
            layout=self.layout,
            impurity_spatial=tuple(range(self.n_imp_spatial)),
            bath_spatial=tuple(range(self.n_imp_spatial, self.n_spatial)),
        )

    def hamiltonian(self) -> FermionOperator:
        lay = self.layout
        h = FermionOperator.zero(lay.n_modes)
        for i in range(self.n_imp_spatial):
            up, dn = lay.mode(i, "up"), lay.mode(i, "down")
            h = h + self.U * (number_operator(up, lay.n_modes)
                              * number_operator(dn, lay.n_modes))
            for m in (up, dn):
                h = h - self.mu * number_operator(m, lay.n_modes)
        if self.n_imp_spatial >= 2 and self.t != 0.0:
            for spin in ("up", "down"):
                a, b = lay.mode(0, spin), lay.mode(1, spin)
                h.add_term(-self.t, ((a, True), (b, False)))
                h.add_term(-self.t, ((b, True), (a, False)))
        for b_idx, bath in enumerate(range(self.n_imp_spatial, self.n_spatial)):
            imp = self.bath_attachment[b_idx]
            for spin in ("up", "down"):
                d, c = lay.mode(imp, spin), lay.mode(bath, spin)
                h.add_term(-self.V[b_idx], ((d, True), (c, False)))
                h.add_term(-self.V[b_idx], ((c, True), (d, False)))
                h = h + self.eps[b_idx] * number_operator(c, lay.n_modes)
        return h.simplify()

    def half_filling_sector(self) -> tuple[int, int]:
        """(N, 2*S_z) of the particle-hole symmetric ground-state sector."""
        return self.layout.n_modes // 2, 0


def single_site_model(U: float, mu: float, V, eps) -> StarImpurityModel:
    V, eps = tuple(map(float, V)), tuple(map(float, eps))
    if len(V) != 3 or len(eps) != 3:
        raise ValueError("single-site model takes three bath orbitals")
    return StarImpurityModel(
        n_imp_spatial=1, n_bath_spatial=3, U=float(U), mu=float(mu), t=0.0,
        V=V, eps=eps, bath_attachment=(0, 0, 0))


def two_site_model(U: float, mu: float, t: float, V: float, eps) -> StarImpurityModel:
    eps = tuple(map(float, eps))
    if len(eps) != 6:
        raise ValueError("two-site model takes six bath orbitals")
    return StarImpurityModel(
        n_imp_spatial=2, n_bath_spatial=6, U=float(U), mu=float(mu),
        t=float(t), V=(float(V),) * 6, eps=eps,
        bath_attachment=(0, 0, 0, 1, 1, 1))


def build_single_site(U: float, mu: float, V, eps):
    """Single-impurity star Hamiltonian with three bath orbitals (8 modes).

    Spatial orbital 0 is the impurity; orbitals 1-3 are bath.
    Returns (FermionOperator, SitePartition).
    """
    model = single_site_model(U, mu, V, eps)
    return model.hamiltonian(), model.partition


def build_two_site(U: float, mu: float, t: float, V: float, eps):
    """Two-impurity star Hamiltonian, three bath orbitals per impurity (16 modes).

    Spatial orbitals 0-1 are impurities (hopping -t between them); orbitals
    2-4 attach to impurity 0 and 5-7 to impurity 1, all with hybridization -V.
    Returns (FermionOperator, SitePartition).
    """
    model = two_site_model(U, mu, t, V, eps)
    return model.hamiltonian(), model.partition
