"""Localization diagnostics: Green functions, fractional moments,
eigencorrelators, deterministic decay checks, and decay-rate fits.

Scans evaluate one factorization per disorder sample and read off a whole
family of configuration pairs, then regress the log of the per-distance bin
means against the configuration distance.  Samples that hit a near-singular
shift are dropped and counted; with a nonzero imaginary part this never
happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .config_space import (
    Configuration,
    DomainError,
    Region,
    SectorBasis,
    as_configuration,
    dist_d1,
    dist_dH_mod,
    iter_bounded_clusters,
)
from .disorder import Distribution, UNIFORM01, sample_table
from .numerics import (
    EigenDecomposition,
    NearSingularShift,
    ShiftedSolver,
    eig_sym,
    spectral_clusters,
    spectral_norm,
)
from .operators import (
    EnergyWindow,
    ModelParams,
    SectorOperator,
    assemble_hamiltonian,
    lifted_hamiltonian,
    require_half_integer,
)

DEFAULT_ETA = 1e-6

Interval = tuple[float, float]  # [lo, hi)


class FitError(ArithmeticError):
    """Not enough usable distance bins for a decay fit."""


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of bin means against a configuration distance."""

    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    distances: tuple[int, ...]
    bin_means: tuple[float, ...]
    bin_stderrs: tuple[float, ...]
    bin_counts: tuple[int, ...]
    excluded: int
    excluded_samples: int
    kind: str
    fit_window: Optional[tuple[float, float]] = None

    @property
    def rate(self) -> float:
        """Decay rate per unit distance (negated slope)."""
        return -self.slope


@dataclass(frozen=True)
class EigencorrelatorResult:
    value: float
    interval: Interval
    clusters_used: int


def _in_interval(v: float, interval: Interval) -> bool:
    lo, hi = interval
    return lo <= v < hi


def green(
    h: SectorOperator, z: complex, x: Configuration, y: Configuration
) -> complex:
    """Resolvent matrix element between canonical basis states."""
    basis = h.basis
    column = ShiftedSolver(h.matrix, z).solve_basis_column(basis.rank(y))
    return complex(column[basis.rank(x)])


# ---------------------------------------------------------------------------
# pair families

def leftmost_cluster(region: Region, n_particles: int) -> Configuration:
    """The leftmost run of n consecutive sites (a single cluster)."""
    for lo, hi in region.pieces:
        if hi - lo + 1 >= n_particles:
            return tuple(range(lo, lo + n_particles))
    raise DomainError(f"no piece can hold {n_particles} adjacent particles")


def anchored_pairs(
    region: Region, n_particles: int, anchor: Optional[Configuration] = None
) -> list[tuple[Configuration, Configuration]]:
    """(anchor, translate) pairs; distance dependence with fixed shape."""
    if n_particles == 0:
        return [((), ())]
    if anchor is None:
        anchor = leftmost_cluster(region, n_particles)
    else:
        anchor = as_configuration(anchor)
    pairs = []
    shift = 0
    while True:
        moved = tuple(s + shift for s in anchor)
        if any(s not in region for s in moved):
            break
        pairs.append((anchor, moved))
        shift += 1
    return pairs


def random_pairs(
    region: Region, n_particles: int, count: int, seed: int
) -> list[tuple[Configuration, Configuration]]:
    """Uniformly random same-size pairs: shape and distance both vary."""
    basis = SectorBasis(region, n_particles)
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed % (1 << 64), 0xBA5E], dtype=np.uint64))
    )
    out = []
    for _ in range(count):
        i, j = gen.integers(0, basis.size, size=2)
        out.append((basis.unrank(int(i)), basis.unrank(int(j))))
    return out


# ---------------------------------------------------------------------------
# decay fits

def decay_fit(
    points: Sequence[tuple[float, float]],
    kind: str,
    fit_window: Optional[tuple[float, float]] = None,
    excluded_samples: int = 0,
) -> DecayFit:
    """Least squares of log(bin mean) on integer distance bins.

    Points at infinite distance and bins with nonpositive means are dropped
    and counted.  Refuses to fit on fewer than 3 usable bins.
    """
    bins: dict[int, list[float]] = {}
    excluded = 0
    for d, v in points:
        if not math.isfinite(d) or not math.isfinite(v):
            excluded += 1
            continue
        bins.setdefault(int(round(d)), []).append(v)

    distances, means, stderrs, counts = [], [], [], []
    for d in sorted(bins):
        vals = np.array(bins[d])
        m = float(np.mean(vals))
        if m <= 0:
            excluded += len(vals)
            continue
        distances.append(d)
        means.append(m)
        stderrs.append(
            float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        )
        counts.append(len(vals))

    in_window = [
        i
        for i, d in enumerate(distances)
        if fit_window is None or fit_window[0] <= d <= fit_window[1]
    ]
    if len(in_window) < 3:
        raise FitError(f"only {len(in_window)} usable bins, need at least 3")
    xs = np.array([distances[i] for i in in_window], dtype=float)
    ys = np.log(np.array([means[i] for i in in_window]))
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    dof = len(xs) - 2
    sxx = float(np.sum((xs - np.mean(xs)) ** 2))
    slope_stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        slope_stderr=slope_stderr,
        distances=tuple(distances),
        bin_means=tuple(means),
        bin_stderrs=tuple(stderrs),
        bin_counts=tuple(counts),
        excluded=excluded,
        excluded_samples=excluded_samples,
        kind=kind,
        fit_window=fit_window,
    )


def _pair_ranks_and_distances(
    basis: SectorBasis,
    pairs: Sequence[tuple[Configuration, Configuration]],
    metric: Callable,
) -> tuple[list[tuple[int, int]], list[float], int]:
    """Ranks for same-size pairs; mismatched sizes are excluded up front
    (their matrix elements vanish identically)."""
    region = basis.region
    ranks, distances = [], []
    mismatched = 0
    for x, y in pairs:
        x, y = as_configuration(x), as_configuration(y)
        if len(x) != len(y):
            mismatched += 1
            continue
        ranks.append((basis.rank(x), basis.rank(y)))
        distances.append(metric(x, y, region))
    return ranks, distances, mismatched


def _finite_rows(table: np.ndarray) -> tuple[np.ndarray, int]:
    keep = np.all(np.isfinite(table), axis=1)
    return table[keep], int(np.sum(~keep))


def _binned_fit(
    table: np.ndarray,
    distances: Sequence[float],
    kind: str,
    fit_window,
    pre_excluded: int,
) -> DecayFit:
    rows, dropped_samples = _finite_rows(table)
    if rows.shape[0] == 0:
        raise ArithmeticError("every sample was excluded")
    pair_means = rows.mean(axis=0)
    fit = decay_fit(
        list(zip(distances, pair_means)),
        kind,
        fit_window=fit_window,
        excluded_samples=dropped_samples,
    )
    # recompute bin stderr across samples (bin value per sample, then spread)
    stderrs = []
    for d in fit.distances:
        cols = [i for i, dd in enumerate(distances) if math.isfinite(dd) and int(round(dd)) == d]
        per_sample = rows[:, cols].mean(axis=1)
        stderrs.append(
            float(np.std(per_sample, ddof=1) / math.sqrt(rows.shape[0]))
            if rows.shape[0] > 1
            else 0.0
        )
    return DecayFit(
        slope=fit.slope,
        intercept=fit.intercept,
        r_squared=fit.r_squared,
        slope_stderr=fit.slope_stderr,
        distances=fit.distances,
        bin_means=fit.bin_means,
        bin_stderrs=tuple(stderrs),
        bin_counts=fit.bin_counts,
        excluded=fit.excluded + pre_excluded,
        excluded_samples=dropped_samples,
        kind=fit.kind,
        fit_window=fit.fit_window,
    )


# ---------------------------------------------------------------------------
# fractional moments

def fractional_moment_scan(
    region: Region,
    n_particles: int,
    params: ModelParams,
    s: float,
    z: complex,
    n_samples: int,
    seed: int,
    *,
    pairs: Optional[Sequence[tuple[Configuration, Configuration]]] = None,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
    fit_window: Optional[tuple[float, float]] = None,
) -> DecayFit:
    """Disorder-averaged |G_z(x, y)|^s against the modified Hausdorff distance."""
    if not 0 < s <= 1 / 3:
        raise DomainError(f"fractional exponent must lie in (0, 1/3], got {s}")
    basis = SectorBasis(region, n_particles)
    if pairs is None:
        pairs = anchored_pairs(region, n_particles)
    ranks, distances, mismatched = _pair_ranks_and_distances(basis, pairs, dist_dH_mod)
    column_ranks = sorted({ry for _, ry in ranks})

    def estimand(sample) -> np.ndarray:
        h = assemble_hamiltonian(region, n_particles, params, sample)
        try:
            solver = ShiftedSolver(h.matrix, z)
        except NearSingularShift:
            return np.full(len(ranks), np.nan)
        columns = {ry: solver.solve_basis_column(ry) for ry in column_ranks}
        return np.array([np.abs(columns[ry][rx]) ** s for rx, ry in ranks])

    table = sample_table(
        estimand, region, n_samples, seed, distribution=distribution, workers=workers
    )
    return _binned_fit(table, distances, "dH_mod", fit_window, mismatched)


def apriori_moment_table(
    region: Region,
    n_particles: int,
    params: ModelParams,
    s_prime: float,
    z_grid: Sequence[complex],
    pair: tuple[Configuration, Configuration],
    n_samples: int,
    seed: int,
    *,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
) -> "AprioriReport":
    """Mean |G_z(x, y)|^s' across a z grid; stability probes the uniform bound."""
    if not 0 < s_prime < 1:
        raise DomainError(f"moment exponent must lie in (0, 1), got {s_prime}")
    basis = SectorBasis(region, n_particles)
    rx, ry = basis.rank(pair[0]), basis.rank(pair[1])
    zs = np.asarray(list(z_grid), dtype=complex)

    def estimand(sample) -> np.ndarray:
        h = assemble_hamiltonian(region, n_particles, params, sample)
        decomp = eig_sym(h)
        weights = decomp.eigenvectors[rx] * decomp.eigenvectors[ry]
        g = weights @ (1.0 / (decomp.eigenvalues[:, None] - zs[None, :]))
        return np.abs(g) ** s_prime

    table = sample_table(
        estimand, region, n_samples, seed, distribution=distribution, workers=workers
    )
    rows = []
    for j, zv in enumerate(zs):
        col = table[:, j]
        finite = col[np.isfinite(col)]
        rows.append(
            AprioriRow(
                z=complex(zv),
                mean=float(np.mean(finite)),
                stderr=float(np.std(finite, ddof=1) / math.sqrt(finite.size))
                if finite.size > 1
                else 0.0,
                count=int(finite.size),
                excluded=int(col.size - finite.size),
            )
        )
    means = [r.mean for r in rows]
    return AprioriReport(rows=tuple(rows), ratio=max(means) / min(means))


@dataclass(frozen=True)
class AprioriRow:
    z: complex
    mean: float
    stderr: float
    count: int
    excluded: int


@dataclass(frozen=True)
class AprioriReport:
    rows: tuple[AprioriRow, ...]
    ratio: float


# ---------------------------------------------------------------------------
# eigencorrelators

def _window_correlator(
    decomp: EigenDecomposition,
    interval: Interval,
    pair_ranks: Sequence[tuple[int, int]],
) -> tuple[np.ndarray, int]:
    """Sum over spectral clusters inside the interval of |pi(x, y)|."""
    blocks = spectral_clusters(decomp)
    vals = decomp.eigenvalues
    out = np.zeros(len(pair_ranks))
    used = 0
    for block in blocks:
        if not _in_interval(float(np.mean(vals[block])), interval):
            continue
        used += 1
        v = decomp.eigenvectors[:, block]
        for idx, (rx, ry) in enumerate(pair_ranks):
            out[idx] += abs(float(np.dot(v[rx], v[ry])))
    return out, used


def eigencorrelator(
    h: SectorOperator,
    interval: Interval,
    x: Configuration,
    y: Configuration,
) -> EigencorrelatorResult:
    """Summed absolute spectral-projection matrix elements in the window.

    Pairs with different particle numbers give exactly zero: the operator
    conserves the particle number, so the matrix element vanishes for every
    bounded function of it.
    """
    x, y = as_configuration(x), as_configuration(y)
    if len(x) != len(y):
        return EigencorrelatorResult(0.0, interval, 0)
    basis = h.basis
    values, used = _window_correlator(
        eig_sym(h), interval, [(basis.rank(x), basis.rank(y))]
    )
    return EigencorrelatorResult(float(values[0]), interval, used)


def eigencorrelator_scan(
    region: Region,
    n_particles: int,
    params: ModelParams,
    q: float,
    n_samples: int,
    seed: int,
    *,
    pairs: Optional[Sequence[tuple[Configuration, Configuration]]] = None,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
    fit_window: Optional[tuple[float, float]] = None,
) -> DecayFit:
    """Disorder-averaged eigencorrelator in the window labeled q, fitted
    against the modified Hausdorff distance."""
    q = require_half_integer(q)
    interval = EnergyWindow(q, params.delta).i_leq
    basis = SectorBasis(region, n_particles)
    if pairs is None:
        pairs = anchored_pairs(region, n_particles)
    ranks, distances, mismatched = _pair_ranks_and_distances(basis, pairs, dist_dH_mod)

    def estimand(sample) -> np.ndarray:
        h = assemble_hamiltonian(region, n_particles, params, sample)
        values, _ = _window_correlator(eig_sym(h), interval, ranks)
        return values

    table = sample_table(
        estimand, region, n_samples, seed, distribution=distribution, workers=workers
    )
    return _binned_fit(table, distances, "dH_mod", fit_window, mismatched)


# ---------------------------------------------------------------------------
# deterministic resolvent decay (all samples individually)

@dataclass(frozen=True)
class CTReport:
    """Per-sample decay fits of sup_z |G_z| against the summed distance."""

    slopes: tuple[float, ...]
    all_decaying: bool
    label: float
    lifted: bool
    distances: tuple[int, ...]
    mean_sup: tuple[float, ...]
    excluded: int

    @property
    def worst_slope(self) -> float:
        return max(self.slopes)


def half_plane_grid(
    window: EnergyWindow,
    n_real: int = 4,
    imag_parts: Sequence[float] = (1e-2, 1e-4, 1e-6),
) -> np.ndarray:
    """Finite proxy for the half plane Re z < window.upper.

    The resolvent norm decays in |Im z| and in the distance from the
    spectrum, so real parts near the top edge with small imaginary parts
    dominate the sup.
    """
    hi = window.upper * (1 - 1e-9)
    reals = np.linspace(0.0, hi, n_real)
    return np.array([re + 1j * im for re in reals for im in imag_parts])


def combes_thomas_check(
    region: Region,
    n_particles: int,
    params: ModelParams,
    n_samples: int,
    seed: int,
    *,
    m: float = 0.5,
    lifted_q: Optional[float] = None,
    pairs: Optional[Sequence[tuple[Configuration, Configuration]]] = None,
    n_real: int = 4,
    imag_parts: Sequence[float] = (1e-2, 1e-4, 1e-6),
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
) -> CTReport:
    """Exponential off-diagonal resolvent decay below the spectral threshold.

    This is a deterministic bound, so the fitted rate must be strictly
    positive for every individual sample, not just on average.  With
    ``lifted_q`` the penalized operator is used and the window label is q.
    """
    if lifted_q is None:
        if m > 0.5:
            raise DomainError("plain resolvent decay only holds for labels <= 1/2")
        label = m
    else:
        label = require_half_integer(lifted_q)
    window = EnergyWindow(label, params.delta)
    zs = half_plane_grid(window, n_real, imag_parts)
    basis = SectorBasis(region, n_particles)
    if pairs is None:
        pairs = anchored_pairs(region, n_particles)
    ranks, distances, mismatched = _pair_ranks_and_distances(basis, pairs, dist_d1)

    def estimand(sample) -> np.ndarray:
        h = assemble_hamiltonian(region, n_particles, params, sample)
        if lifted_q is not None:
            h = lifted_hamiltonian(h, lifted_q, params)
        decomp = eig_sym(h)
        denom = 1.0 / (decomp.eigenvalues[:, None] - zs[None, :])
        sups = np.empty(len(ranks))
        for idx, (rx, ry) in enumerate(ranks):
            weights = decomp.eigenvectors[rx] * decomp.eigenvectors[ry]
            sups[idx] = float(np.max(np.abs(weights @ denom)))
        return sups

    table = sample_table(
        estimand, region, n_samples, seed, distribution=distribution, workers=workers
    )
    slopes = []
    for row in table:
        fit = decay_fit(list(zip(distances, row)), "d1_mod")
        slopes.append(fit.slope)
    overall = _binned_fit(table, distances, "d1_mod", None, mismatched)
    return CTReport(
        slopes=tuple(slopes),
        all_decaying=all(sl < 0 for sl in slopes),
        label=label,
        lifted=lifted_q is not None,
        distances=overall.distances,
        mean_sup=overall.bin_means,
        excluded=overall.excluded,
    )


def lifted_ct_check(
    region: Region,
    n_particles: int,
    params: ModelParams,
    q: float,
    n_samples: int,
    seed: int,
    **kwargs,
) -> CTReport:
    return combes_thomas_check(
        region, n_particles, params, n_samples, seed, lifted_q=q, **kwargs
    )


# ---------------------------------------------------------------------------
# identities behind the window-lifting argument

def resolvent_identity_residual(
    h: SectorOperator, q: float, params: ModelParams, z: complex
) -> float:
    """Norm of R_z - Rhat_z - R_z P Rhat_z with P the lifting penalty."""
    hq = lifted_hamiltonian(h, q, params)
    penalty = hq.matrix - h.matrix
    eye = np.eye(h.dim)
    r = np.linalg.solve(h.matrix - z * eye, eye.astype(complex))
    rhat = np.linalg.solve(hq.matrix - z * eye, eye.astype(complex))
    return spectral_norm(r - rhat - r @ penalty @ rhat)


def eigest_residual(
    h: SectorOperator, q: float, params: ModelParams
) -> tuple[float, int]:
    """Max norm of pi_nu - Rhat_{q,nu} P pi_nu over eigenvalues in the
    bounded window labeled q; returns (worst residual, clusters checked)."""
    q = require_half_integer(q)
    window = EnergyWindow(q, params.delta)
    hq = lifted_hamiltonian(h, q, params)
    penalty = hq.matrix - h.matrix
    decomp = eig_sym(h)
    eye = np.eye(h.dim)
    worst = 0.0
    checked = 0
    for block in spectral_clusters(decomp):
        nu = float(np.mean(decomp.eigenvalues[block]))
        if not _in_interval(nu, window.i_t):
            continue
        v = decomp.eigenvectors[:, block]
        pi = v @ v.T
        rhat = np.linalg.solve(hq.matrix - nu * eye, penalty @ pi)
        worst = max(worst, spectral_norm(pi - rhat))
        checked += 1
    return worst, checked


# ---------------------------------------------------------------------------
# large-deviation event for the random field

@dataclass(frozen=True)
class LDReport:
    frequency: float
    hits: int
    n_samples: int
    threshold: float
    n_configs: int
    ball_sites: tuple[int, ...]


def large_deviation_probe(
    region: Region,
    n_particles: int,
    params: ModelParams,
    q: float,
    n_samples: int,
    seed: int,
    *,
    anchor: Optional[Configuration] = None,
    distribution: Distribution = UNIFORM01,
    workers: int = 1,
) -> LDReport:
    """Empirical probability that some low-cluster configuration in the
    ball around the anchor sees a summed field below the window threshold."""
    q = require_half_integer(q)
    k = math.ceil(q)
    if k < 1:
        raise DomainError("the event needs a positive window label")
    threshold = k * params.gap
    if anchor is None:
        anchor = leftmost_cluster(region, n_particles)
    ball = region.ball(anchor, n_particles)
    cut = frozenset(region.cut & set(ball)) if region.cut is not None else None
    sub = Region(ball, cut)
    configs = list(iter_bounded_clusters(sub, n_particles, k))
    occupancy = np.zeros((len(configs), len(ball)))
    pos = {s: i for i, s in enumerate(ball)}
    for row, cfg in enumerate(configs):
        for s in cfg:
            occupancy[row, pos[s]] = 1.0

    def estimand(sample) -> np.ndarray:
        omega = np.array([sample[s] for s in ball])
        lowest = float(np.min(occupancy @ omega))
        return np.array([1.0 if params.lam * lowest < threshold else 0.0])

    table = sample_table(
        estimand, region, n_samples, seed, distribution=distribution, workers=workers
    )
    hits = int(table[:, 0].sum())
    return LDReport(
        frequency=hits / n_samples,
        hits=hits,
        n_samples=n_samples,
        threshold=threshold,
        n_configs=len(configs),
        ball_sites=ball,
    )


# ---------------------------------------------------------------------------
# eigenvector diagnostics

def _check_normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"state norm {norm} is not 1")
    return psi


def localization_center(
    psi: np.ndarray, basis: SectorBasis
) -> tuple[Configuration, float]:
    """Configuration maximizing |psi|^2 against the polynomial weight
    (|x|_2 + 1)^-(N+1); returns (center, margin) with margin >= 1 certifying
    the defining inequality |psi(center)|^2 >= w(center) / sum w."""
    psi = _check_normalized(psi)
    if psi.shape != (basis.size,):
        raise DomainError("state dimension does not match the sector")
    configs = basis.configurations()
    l2 = np.array([math.sqrt(sum(s * s for s in x)) for x in configs])
    weights = (l2 + 1.0) ** (-(basis.n_particles + 1))
    prob = np.abs(psi) ** 2
    scores = prob / weights
    best = int(np.argmax(scores))
    margin = float(scores[best] * weights.sum())
    return configs[best], margin


def mass_near_center(
    psi: np.ndarray,
    basis: SectorBasis,
    center: Configuration,
    radius: float,
) -> float:
    """Probability mass within the given modified Hausdorff distance."""
    psi = np.asarray(psi)
    prob = np.abs(psi) ** 2
    total = 0.0
    for i, x in enumerate(basis.configurations()):
        if dist_dH_mod(x, center, basis.region) <= radius:
            total += float(prob[i])
    return total


def decay_profile(
    psi: np.ndarray, basis: SectorBasis, center: Configuration
) -> list[tuple[int, float]]:
    """Cumulative probability mass per integer distance from the center.

    The profile is nondecreasing and ends at (almost) 1; its approach to 1
    is the eigenfunction's spatial decay.
    """
    psi = np.asarray(psi)
    prob = np.abs(psi) ** 2
    shells: dict[int, float] = {}
    for i, x in enumerate(basis.configurations()):
        d = dist_dH_mod(x, center, basis.region)
        if math.isfinite(d):
            shells[int(d)] = shells.get(int(d), 0.0) + float(prob[i])
    profile = []
    running = 0.0
    for d in sorted(shells):
        running += shells[d]
        profile.append((d, running))
    return profile


def ipr(psi: np.ndarray) -> float:
    """Inverse participation ratio: 1 for a basis state, 1/dim when uniform."""
    psi = _check_normalized(psi)
    return float(np.sum(np.abs(psi) ** 4))
