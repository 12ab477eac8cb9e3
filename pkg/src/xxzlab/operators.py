"""Sector-resolved operators of the random anisotropic spin chain.

The Hamiltonian on a fixed-particle-number sector is the sum of three
pieces: -1/(2*delta) times the configuration-graph adjacency, the diagonal
cluster-count term, and the diagonal random field.  A region carrying a cut
assembles the decoupled Hamiltonian (both halves, no coupling across the
cut); the boundary operator is the literal difference of the coupled and
decoupled assemblies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .config_space import (
    Configuration,
    DomainError,
    Region,
    SectorBasis,
    cluster_count,
    hop_neighbors,
)
from .numerics import check_symmetric


@dataclass(frozen=True)
class ModelParams:
    """Anisotropy delta > 1 (Ising phase) and field strength lam >= 0."""

    delta: float
    lam: float

    def __post_init__(self) -> None:
        if not self.delta > 1:
            raise DomainError(f"delta must exceed 1, got {self.delta}")
        if self.lam < 0:
            raise DomainError(f"field strength must be nonnegative, got {self.lam}")

    @property
    def hop(self) -> float:
        return -1.0 / (2.0 * self.delta)

    @property
    def gap(self) -> float:
        """Distance 1 - 1/delta from the vacuum energy to the rest of the spectrum."""
        return 1.0 - 1.0 / self.delta


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """A symmetric matrix indexed by a sector basis (rank order)."""

    basis: SectorBasis
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        n = self.basis.size
        if m.shape != (n, n):
            raise DomainError(f"matrix shape {m.shape} does not match sector size {n}")
        check_symmetric(m)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.basis.size

    def entry(self, x: Configuration, y: Configuration) -> complex:
        return self.matrix[self.basis.rank(x), self.basis.rank(y)]

    def to_json_dict(self) -> dict:
        rows, cols = np.nonzero(self.matrix)
        triplets = [
            [int(i), int(j), float(self.matrix[i, j])]
            for i, j in zip(rows, cols)
            if i <= j
        ]
        return {
            "basis": {
                "region": self.basis.region.to_json_dict(),
                "n_particles": self.basis.n_particles,
                "size": self.basis.size,
                "order": "colex",
            },
            "triplets": triplets,
        }


@dataclass(frozen=True)
class EnergyWindow:
    """Energy intervals labeled by a half-integer q.

    ``i_leq`` is the half-line (-inf, (q + 1/4) * gap); ``i_t`` is
    [gap, (q + 1/4) * gap), the part above the vacuum.
    """

    t: float
    delta: float

    @property
    def gap(self) -> float:
        return 1.0 - 1.0 / self.delta

    @property
    def upper(self) -> float:
        return (self.t + 0.25) * self.gap

    @property
    def i_leq(self) -> tuple[float, float]:
        return (-math.inf, self.upper)

    @property
    def i_t(self) -> tuple[float, float]:
        return (self.gap, self.upper)

    def contains(self, energy: float) -> bool:
        return energy < self.upper

    def midpoint(self) -> float:
        """Midpoint of the bounded window [gap, upper)."""
        return 0.5 * (self.gap + self.upper)


def require_half_integer(q: float, name: str = "q") -> float:
    twice = 2.0 * q
    if q < 0 or abs(twice - round(twice)) > 1e-12:
        raise DomainError(f"{name} must be a nonnegative half-integer, got {q}")
    return round(twice) / 2.0


def _field_values(region: Region, omega: Mapping[int, float]) -> dict[int, float]:
    try:
        return {s: float(omega[s]) for s in region.sites}
    except KeyError as exc:
        raise DomainError(f"disorder sample missing site {exc.args[0]}") from None


def zero_field(region: Region) -> dict[int, float]:
    return {s: 0.0 for s in region.sites}


def assemble_hamiltonian(
    region: Region,
    n_particles: int,
    params: ModelParams,
    omega: Mapping[int, float],
) -> SectorOperator:
    """Sector Hamiltonian; with a cut this is the decoupled operator.

    Diagonal entries are cluster count plus lam times the field summed in
    site order (left to right), so reruns are bit-identical for a fixed
    sample.
    """
    field = _field_values(region, omega)
    basis = SectorBasis(region, n_particles)
    m = np.zeros((basis.size, basis.size))
    for r, x in enumerate(basis.configurations()):
        v = 0.0
        for s in x:
            v += field[s]
        m[r, r] = cluster_count(x, region) + params.lam * v
        for y, _move in hop_neighbors(x, region):
            m[r, basis.rank(y)] = params.hop
    return SectorOperator(basis, m)


def assemble_parts(
    region: Region,
    n_particles: int,
    params: ModelParams,
    omega: Mapping[int, float],
) -> tuple[SectorOperator, SectorOperator, SectorOperator]:
    """(adjacency, cluster, field) with H = hop * adjacency + cluster + lam * field."""
    field = _field_values(region, omega)
    basis = SectorBasis(region, n_particles)
    adj = np.zeros((basis.size, basis.size))
    clusters = np.zeros((basis.size, basis.size))
    potential = np.zeros((basis.size, basis.size))
    for r, x in enumerate(basis.configurations()):
        clusters[r, r] = cluster_count(x, region)
        v = 0.0
        for s in x:
            v += field[s]
        potential[r, r] = v
        for y, _move in hop_neighbors(x, region):
            adj[r, basis.rank(y)] = 1.0
    return (
        SectorOperator(basis, adj),
        SectorOperator(basis, clusters),
        SectorOperator(basis, potential),
    )


def boundary_operator(
    region: Region,
    n_particles: int,
    params: ModelParams,
    omega: Optional[Mapping[int, float]] = None,
) -> SectorOperator:
    """Coupled minus decoupled assembly.

    Off-diagonal entries are hops across the cut; the diagonal carries the
    cluster-count difference for configurations straddling it.  The field
    cancels, so a zero field is used when none is given.
    """
    if region.cut is None or not region.cut or region.cut == set(region.sites):
        raise DomainError("boundary operator needs a nonempty proper cut")
    if omega is None:
        omega = zero_field(region)
    coupled = assemble_hamiltonian(region.without_cut(), n_particles, params, omega)
    decoupled = assemble_hamiltonian(region, n_particles, params, omega)
    return SectorOperator(coupled.basis, coupled.matrix - decoupled.matrix)


def proj_plus(basis: SectorBasis, avoid) -> SectorOperator:
    """Projection onto configurations avoiding the site set entirely."""
    avoid = frozenset(avoid)
    diag = np.array(
        [1.0 if not (set(x) & avoid) else 0.0 for x in basis.configurations()]
    )
    return SectorOperator(basis, np.diag(diag))


def proj_minus(basis: SectorBasis, touch) -> SectorOperator:
    """Projection onto configurations touching the site set."""
    op = proj_plus(basis, touch)
    return SectorOperator(basis, np.eye(basis.size) - op.matrix)


def number_at(basis: SectorBasis, site: int) -> SectorOperator:
    return proj_minus(basis, {site})


def rank_one(basis: SectorBasis, u: Configuration) -> SectorOperator:
    m = np.zeros((basis.size, basis.size))
    m[basis.rank(u), basis.rank(u)] = 1.0
    return SectorOperator(basis, m)


def cluster_diagonal(basis: SectorBasis) -> np.ndarray:
    return np.array(
        [cluster_count(x, basis.region) for x in basis.configurations()], dtype=float
    )


def q_exact(basis: SectorBasis, m: int) -> SectorOperator:
    w = cluster_diagonal(basis)
    return SectorOperator(basis, np.diag((w == m).astype(float)))


def q_leq(basis: SectorBasis, k: int) -> SectorOperator:
    if k < 1:
        raise DomainError("cluster bound must be at least 1")
    w = cluster_diagonal(basis)
    return SectorOperator(basis, np.diag(((w >= 1) & (w <= k)).astype(float)))


def q_hat_leq(basis: SectorBasis, k: int) -> SectorOperator:
    """q_leq plus the reweighted zero-cluster (vacuum) projection."""
    if k < 1:
        raise DomainError("cluster bound must be at least 1")
    w = cluster_diagonal(basis)
    diag = ((w >= 1) & (w <= k)).astype(float) + ((k + 1) / k) * (w == 0)
    return SectorOperator(basis, np.diag(diag))


_PROJECTION_KINDS = {
    "P_plus": lambda basis, arg: proj_plus(basis, arg),
    "P_minus": lambda basis, arg: proj_minus(basis, arg),
    "number_at": lambda basis, arg: number_at(basis, int(arg)),
    "rank_one": lambda basis, arg: rank_one(basis, arg),
    "Q_leq": lambda basis, arg: q_leq(basis, int(arg)),
    "Q_hat_leq": lambda basis, arg: q_hat_leq(basis, int(arg)),
    "Q_exact": lambda basis, arg: q_exact(basis, int(arg)),
}


def projection(region: Region, n_particles: int, kind: str, arg=None) -> SectorOperator:
    """Dispatch to the named diagonal projection builder."""
    try:
        builder = _PROJECTION_KINDS[kind]
    except KeyError:
        raise DomainError(f"unknown projection kind {kind!r}") from None
    return builder(SectorBasis(region, n_particles), arg)


def lifted_hamiltonian(h: SectorOperator, q: float, params: ModelParams) -> SectorOperator:
    """H plus a penalty on low-cluster-count configurations.

    For q in {0, 1/2} only the vacuum is pushed up; otherwise every
    configuration with at most ceil(q) clusters is penalized, which lifts
    the spectrum above the energy window labeled q.
    """
    q = require_half_integer(q)
    basis = h.basis
    if q in (0.0, 0.5):
        q0 = q_exact(basis, 0)
        m = h.matrix + params.gap * q0.matrix
    else:
        k = math.ceil(q)
        m = h.matrix + k * params.gap * q_hat_leq(basis, k).matrix
    return SectorOperator(basis, m)
