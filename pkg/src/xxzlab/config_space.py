"""Particle configurations on a one-dimensional lattice.

A region is a finite union of integer intervals, optionally split by a cut
into two decoupled halves.  Configurations are strictly increasing tuples of
occupied sites; the fixed-particle-number sector is enumerated in
colexicographic order with an O(N) rank/unrank bijection (combinatorial
number system).  Graph distances are computed by interval arithmetic on the
connected pieces, and disconnection is reported as ``math.inf`` rather than
a sentinel integer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, inf, isinf
from typing import Iterator, Optional

Configuration = tuple[int, ...]

VACUUM: Configuration = ()


class DomainError(ValueError):
    """A precondition on sites, sizes or membership was violated."""


@dataclass(frozen=True)
class Region:
    """A finite set of lattice sites with optional decoupling cut.

    Two sites are adjacent iff they differ by 1, both belong to the region,
    and the edge is not severed by the cut (edges must lie entirely inside
    the cut set or entirely inside its complement).
    """

    sites: tuple[int, ...]
    cut: Optional[frozenset[int]] = None

    def __post_init__(self) -> None:
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise DomainError("region must contain at least one site")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise DomainError("region sites must be strictly increasing")
        object.__setattr__(self, "sites", sites)
        if self.cut is not None:
            cut = frozenset(int(s) for s in self.cut)
            if not cut <= set(sites):
                raise DomainError("cut must be a subset of the region")
            object.__setattr__(self, "cut", cut)

    @classmethod
    def interval(cls, lo: int, hi: int, cut: Optional[frozenset[int]] = None) -> "Region":
        """The region {lo, lo+1, ..., hi}."""
        if hi < lo:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        return cls(tuple(range(lo, hi + 1)), cut)

    @classmethod
    def from_intervals(
        cls,
        intervals: list[tuple[int, int]],
        cut_intervals: Optional[list[tuple[int, int]]] = None,
    ) -> "Region":
        sites: set[int] = set()
        for lo, hi in intervals:
            if hi < lo:
                raise DomainError(f"empty interval [{lo}, {hi}]")
            sites.update(range(lo, hi + 1))
        cut = None
        if cut_intervals is not None:
            cut_sites: set[int] = set()
            for lo, hi in cut_intervals:
                cut_sites.update(range(lo, hi + 1))
            cut = frozenset(cut_sites)
        return cls(tuple(sorted(sites)), cut)

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: int) -> bool:
        return site in _site_set(self)

    @property
    def pieces(self) -> tuple[tuple[int, int], ...]:
        """Maximal graph-connected intervals (cut edges removed)."""
        return _pieces(self)

    def without_cut(self) -> "Region":
        return self if self.cut is None else Region(self.sites, None)

    def with_cut(self, cut) -> "Region":
        return Region(self.sites, frozenset(cut))

    def distance(self, i: int, j: int) -> float:
        """Graph distance; ``inf`` when i, j lie in different pieces."""
        pidx = _piece_index(self)
        try:
            pi, pj = pidx[i], pidx[j]
        except KeyError as exc:
            raise DomainError(f"site {exc.args[0]} not in region") from None
        return abs(i - j) if pi == pj else inf

    def are_adjacent(self, i: int, j: int) -> bool:
        if abs(i - j) != 1:
            return False
        pidx = _piece_index(self)
        return i in pidx and j in pidx and pidx[i] == pidx[j]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in (i - 1, i + 1) if self.are_adjacent(i, j))

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (lo + t, lo + t + 1) for lo, hi in self.pieces for t in range(hi - lo)
        )

    def set_distance(self, a, b) -> float:
        """min distance between two site sets (inf if fully disconnected)."""
        best = inf
        for i in a:
            for j in b:
                d = self.distance(i, j)
                if d < best:
                    best = d
        return best

    def ball(self, around, radius: int) -> tuple[int, ...]:
        """Sites within graph distance ``radius`` of the site set ``around``."""
        around = tuple(around)
        return tuple(
            s for s in self.sites if any(self.distance(s, a) <= radius for a in around)
        )

    def intervals(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive sites, ignoring the cut."""
        runs = []
        start = prev = self.sites[0]
        for s in self.sites[1:]:
            if s != prev + 1:
                runs.append((start, prev))
                start = s
            prev = s
        runs.append((start, prev))
        return runs

    def to_json_dict(self) -> dict:
        out: dict = {"intervals": [list(r) for r in self.intervals()]}
        if self.cut is not None:
            cut_region = Region(tuple(sorted(self.cut)))
            out["cut"] = [list(r) for r in cut_region.intervals()]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Region":
        return cls.from_intervals(
            [tuple(r) for r in data["intervals"]],
            [tuple(r) for r in data["cut"]] if data.get("cut") else None,
        )


@lru_cache(maxsize=None)
def _site_set(region: Region) -> frozenset[int]:
    return frozenset(region.sites)


@lru_cache(maxsize=None)
def _pieces(region: Region) -> tuple[tuple[int, int], ...]:
    cut = region.cut
    pieces = []
    start = prev = region.sites[0]
    for s in region.sites[1:]:
        broken = s != prev + 1
        if not broken and cut is not None:
            broken = (prev in cut) != (s in cut)
        if broken:
            pieces.append((start, prev))
            start = s
        prev = s
    pieces.append((start, prev))
    return tuple(pieces)


@lru_cache(maxsize=None)
def _piece_index(region: Region) -> dict[int, int]:
    return {
        s: k
        for k, (lo, hi) in enumerate(_pieces(region))
        for s in range(lo, hi + 1)
    }


def as_configuration(occupied) -> Configuration:
    x = tuple(int(s) for s in occupied)
    if any(b <= a for a, b in zip(x, x[1:])):
        raise DomainError("configuration must be strictly increasing")
    return x


def check_membership(x: Configuration, region: Region) -> Configuration:
    x = as_configuration(x)
    missing = [s for s in x if s not in region]
    if missing:
        raise DomainError(f"sites {missing} lie outside the region")
    return x


@dataclass(frozen=True)
class SectorBasis:
    """Colexicographic enumeration of the N-particle configurations.

    ``rank``/``unrank`` realize the combinatorial number system, so the
    basis never needs to be materialized to index a matrix.
    """

    region: Region
    n_particles: int

    def __post_init__(self) -> None:
        n = int(self.n_particles)
        if not 0 <= n <= len(self.region):
            raise DomainError(
                f"particle number {n} outside [0, {len(self.region)}]"
            )
        object.__setattr__(self, "n_particles", n)

    @property
    def size(self) -> int:
        return comb(len(self.region), self.n_particles)

    def rank(self, x: Configuration) -> int:
        x = check_membership(x, self.region)
        if len(x) != self.n_particles:
            raise DomainError(
                f"configuration has {len(x)} particles, sector holds {self.n_particles}"
            )
        pos = _positions(self.region)
        return sum(comb(pos[s], i + 1) for i, s in enumerate(x))

    def unrank(self, r: int) -> Configuration:
        if not 0 <= r < self.size:
            raise DomainError(f"rank {r} outside [0, {self.size})")
        sites = self.region.sites
        out = []
        remaining = r
        p = len(sites) - 1
        for i in range(self.n_particles, 0, -1):
            while comb(p, i) > remaining:
                p -= 1
            out.append(sites[p])
            remaining -= comb(p, i)
        return tuple(reversed(out))

    def index(self, x: Configuration) -> int:
        return self.rank(x)

    def configurations(self) -> tuple[Configuration, ...]:
        return _sector_configs(self)

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self.configurations())


@lru_cache(maxsize=None)
def _positions(region: Region) -> dict[int, int]:
    return {s: p for p, s in enumerate(region.sites)}


@lru_cache(maxsize=None)
def _sector_configs(basis: SectorBasis) -> tuple[Configuration, ...]:
    sites = basis.region.sites
    return tuple(
        tuple(sites[p] for p in pos)
        for pos in _colex_positions(len(sites), basis.n_particles)
    )


def _colex_positions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for m in range(k - 1, n):
        for rest in _colex_positions(m, k - 1):
            yield rest + (m,)


def enumerate_sector(region: Region, n_particles: int) -> list[Configuration]:
    """All configurations with ``n_particles`` particles, in colex order."""
    return list(SectorBasis(region, n_particles).configurations())


def cluster_count(x: Configuration, region: Optional[Region] = None) -> int:
    """Number of connected components of ``x`` in the region's graph.

    ``region=None`` means the full line (plain integer adjacency).
    The vacuum has zero clusters.
    """
    if region is not None:
        x = check_membership(x, region)
    else:
        x = as_configuration(x)
    w = 0
    prev = None
    for s in x:
        adjacent = (
            prev is not None
            and s == prev + 1
            and (region is None or region.are_adjacent(prev, s))
        )
        if not adjacent:
            w += 1
        prev = s
    return w


def _point_distance(i: int, j: int, region: Optional[Region]) -> float:
    return abs(i - j) if region is None else region.distance(i, j)


def dist_d1(x: Configuration, y: Configuration, region: Optional[Region] = None) -> float:
    """Summed distance between matched order statistics; inf on size mismatch
    or when any matched pair is disconnected."""
    x, y = _check_pair(x, y, region)
    if len(x) != len(y):
        return inf
    total = 0
    for a, b in zip(x, y):
        d = _point_distance(a, b, region)
        if isinf(d):
            return inf
        total += d
    return total


def dist_dH(x: Configuration, y: Configuration, region: Optional[Region] = None) -> float:
    """Hausdorff distance between the occupied sets (graph metric)."""
    x, y = _check_pair(x, y, region)
    if not x and not y:
        return 0
    if not x or not y:
        return inf
    best = 0
    for a, b in ((x, y), (y, x)):
        for u in a:
            d = min(_point_distance(u, v, region) for v in b)
            if d > best:
                best = d
    return best


def dist_dH_mod(x: Configuration, y: Configuration, region: Optional[Region] = None) -> float:
    """Hausdorff distance, inf when the particle numbers differ."""
    x, y = _check_pair(x, y, region)
    if len(x) != len(y):
        return inf
    return dist_dH(x, y, region)


def _check_pair(x, y, region):
    if region is not None:
        return check_membership(x, region), check_membership(y, region)
    return as_configuration(x), as_configuration(y)


def hop_neighbors(
    x: Configuration, region: Region
) -> list[tuple[Configuration, tuple[int, int]]]:
    """Configurations reachable by moving one particle along a region edge.

    Returns ``(configuration, (from_site, to_site))`` pairs; the particle
    number is conserved and each move respects the cut.
    """
    x = check_membership(x, region)
    occupied = set(x)
    out = []
    for s in x:
        for t in region.neighbors(s):
            if t not in occupied:
                moved = tuple(sorted(occupied - {s} | {t}))
                out.append((moved, (s, t)))
    return out


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered compositions of ``total`` into ``parts`` positive integers."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for splits in itertools.combinations(range(1, total), parts - 1):
        prev = 0
        comp = []
        for s in splits:
            comp.append(s - prev)
            prev = s
        comp.append(total - prev)
        yield tuple(comp)


def _place_runs(
    pieces: tuple[tuple[int, int], ...], lengths: tuple[int, ...]
) -> Iterator[Configuration]:
    """Place maximal runs of the given lengths into the pieces, in order.

    Runs inside one piece are separated by at least one empty site; runs in
    different pieces are never graph-adjacent, so every placement realizes
    exactly ``len(lengths)`` clusters.
    """
    n_runs = len(lengths)

    def rec(j: int, piece_i: int, min_start: Optional[int], acc: list[int]) -> Iterator[Configuration]:
        if j == n_runs:
            yield tuple(acc)
            return
        n = lengths[j]
        for pi in range(piece_i, len(pieces)):
            lo, hi = pieces[pi]
            start = max(lo, min_start) if (pi == piece_i and min_start is not None) else lo
            for p in range(start, hi - n + 2):
                acc.extend(range(p, p + n))
                yield from rec(j + 1, pi, p + n + 1, acc)
                del acc[-n:]

    return rec(0, 0, None, [])


def iter_bounded_clusters(region: Region, n_particles: int, k: int) -> Iterator[Configuration]:
    """Unordered stream of configurations with 1..k clusters."""
    if k < 1:
        raise DomainError("cluster bound must be at least 1")
    if not 1 <= n_particles <= len(region):
        raise DomainError("particle number outside [1, |region|]")
    pieces = region.pieces
    for m in range(1, min(k, n_particles) + 1):
        for lengths in compositions(n_particles, m):
            yield from _place_runs(pieces, lengths)


def enumerate_bounded_clusters(region: Region, n_particles: int, k: int) -> list[Configuration]:
    """Configurations with cluster count in [1, k], in colex order."""
    basis = SectorBasis(region, n_particles)
    return sorted(iter_bounded_clusters(region, n_particles, k), key=basis.rank)
