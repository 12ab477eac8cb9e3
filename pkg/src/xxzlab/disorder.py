"""Disorder sampling and the seeded Monte Carlo engine.

Fields are drawn from counter-based streams keyed by (seed, sample index,
site), so the value at a site never depends on the extent of the region or
on evaluation order, and any sample can be regenerated bit-identically.
The engine may fan samples out to worker threads; results are merged in
sample-index order, so the worker count never changes the output.
"""

from __future__ import annotations

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt
from typing import Callable

import numpy as np

from .config_space import DomainError, Region

_U64 = 1 << 64


@dataclass(frozen=True)
class Distribution:
    """Site distribution: absolutely continuous with bounded density on [0,1]."""

    kind: str
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "uniform01":
            return
        if self.kind == "beta":
            if self.a < 1 or self.b < 1:
                raise DomainError(
                    "beta parameters below 1 give an unbounded density"
                )
            return
        raise DomainError(f"unknown distribution {self.kind!r}")

    @property
    def tag(self) -> str:
        if self.kind == "uniform01":
            return "uniform01"
        return f"beta({self.a:g},{self.b:g})"

    def mean(self) -> float:
        if self.kind == "uniform01":
            return 0.5
        return self.a / (self.a + self.b)


UNIFORM01 = Distribution("uniform01")


def parse_distribution(tag: str) -> Distribution:
    tag = tag.strip()
    if tag == "uniform01":
        return UNIFORM01
    if tag.startswith("beta(") and tag.endswith(")"):
        inner = tag[5:-1]
        parts = inner.split(",")
        if len(parts) == 2:
            return Distribution("beta", float(parts[0]), float(parts[1]))
    raise DomainError(f"cannot parse distribution tag {tag!r}")


def _site_stream(seed: int, sample_index: int, site: int) -> np.random.Generator:
    key = np.array([seed % _U64, sample_index % _U64], dtype=np.uint64)
    counter = np.array([0, site % _U64, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _draw(gen: np.random.Generator, distribution: Distribution) -> float:
    if distribution.kind == "uniform01":
        return float(gen.random())
    return float(gen.beta(distribution.a, distribution.b))


class DisorderSample(Mapping):
    """Immutable site -> coupling map, regenerable from (seed, index, tag)."""

    __slots__ = ("_values", "seed", "sample_index", "distribution")

    def __init__(self, values: dict[int, float], seed: int, sample_index: int, distribution: str):
        self._values = dict(values)
        self.seed = seed
        self.sample_index = sample_index
        self.distribution = distribution

    def __getitem__(self, site: int) -> float:
        return self._values[site]

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return (
            f"DisorderSample(seed={self.seed}, index={self.sample_index}, "
            f"tag={self.distribution!r}, sites={len(self._values)})"
        )


def sample_field(
    region: Region,
    distribution: Distribution = UNIFORM01,
    seed: int = 0,
    sample_index: int = 0,
) -> DisorderSample:
    """Draw one i.i.d. disorder realization on the region's sites."""
    values = {
        s: _draw(_site_stream(seed, sample_index, s), distribution)
        for s in region.sites
    }
    return DisorderSample(values, seed, sample_index, distribution.tag)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    variance: float
    count: int
    stderr: float
    base_seed: int
    sample_range: tuple[int, int]
    excluded: int
    values: tuple[float, ...]

    def merge(self, other: "MCEstimate") -> "MCEstimate":
        """Pool with a disjoint-range estimate sharing the base seed."""
        if other.base_seed != self.base_seed:
            raise DomainError("cannot merge estimates with different base seeds")
        first, second = sorted((self, other), key=lambda e: e.sample_range[0])
        if first.sample_range[1] > second.sample_range[0]:
            raise DomainError("sample ranges overlap")
        values = first.values + second.values
        return _summarize(
            np.array(values),
            first.excluded + second.excluded,
            self.base_seed,
            (first.sample_range[0], second.sample_range[1]),
        )


def _summarize(
    kept: np.ndarray, excluded: int, base_seed: int, sample_range: tuple[int, int]
) -> MCEstimate:
    count = int(kept.size)
    if count == 0:
        raise ArithmeticError("all samples were excluded")
    mean = float(np.mean(kept))
    variance = float(np.var(kept, ddof=1)) if count > 1 else 0.0
    return MCEstimate(
        mean=mean,
        variance=variance,
        count=count,
        stderr=sqrt(variance / count),
        base_seed=base_seed,
        sample_range=sample_range,
        excluded=excluded,
        values=tuple(float(v) for v in kept),
    )


def _evaluate_indexed(
    fn: Callable[[int], object], indices: range, workers: int
) -> list:
    if workers <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


def monte_carlo(
    estimand: Callable[[DisorderSample], float],
    region: Region,
    n_samples: int,
    base_seed: int,
    *,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
    start: int = 0,
) -> MCEstimate:
    """Estimate the disorder expectation of a scalar estimand.

    Non-finite values are excluded and counted (they signal a near-singular
    resolvent at real energy).  For a fixed base seed the result is
    bit-identical for any worker count.
    """
    if n_samples < 2:
        raise DomainError("need at least 2 samples")

    def one(i: int) -> float:
        return float(estimand(sample_field(region, distribution, base_seed, i)))

    raw = _evaluate_indexed(one, range(start, start + n_samples), workers)
    arr = np.array(raw, dtype=float)
    keep = np.isfinite(arr)
    return _summarize(
        arr[keep], int(np.sum(~keep)), base_seed, (start, start + n_samples)
    )


def sample_table(
    fn: Callable[[DisorderSample], np.ndarray],
    region: Region,
    n_samples: int,
    base_seed: int,
    *,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
    start: int = 0,
) -> np.ndarray:
    """Stack per-sample vectors into an (n_samples, k) array in index order.

    Vector entries may be non-finite; column-wise handling is up to the
    caller.  Used by the scan estimators, which evaluate one factorization
    per sample and read off many pairs.
    """

    def one(i: int) -> np.ndarray:
        return np.asarray(fn(sample_field(region, distribution, base_seed, i)), dtype=float)

    rows = _evaluate_indexed(one, range(start, start + n_samples), workers)
    return np.vstack(rows)
