import math

import numpy as np
import pytest

from xxzlab.config_space import DomainError, Region
from xxzlab.disorder import sample_field
from xxzlab.dynamics import (
    FilterSpec,
    QuadratureRefusal,
    counterexample_information,
    evolve_state,
    filter_apply,
    filter_locality_check,
    fourier_bound_check,
    heisenberg_evolve,
    lieb_robinson_check,
    presence_masks,
)
from xxzlab.numerics import eig_sym, spectral_norm
from xxzlab.operators import ModelParams, assemble_hamiltonian


def _operator(region, n, params, seed=0):
    return assemble_hamiltonian(region, n, params, sample_field(region, seed=seed))


# ---------------------------------------------------------------------------
# evolution

def test_evolution_basics():
    region = Region.interval(0, 7)
    params = ModelParams(2.0, 1.0)
    h = _operator(region, 2, params, seed=5)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=h.dim)
    psi /= np.linalg.norm(psi)
    assert np.max(np.abs(evolve_state(h, 0.0, psi) - psi)) < 1e-12
    evolved = evolve_state(h, 2.3, psi)
    assert abs(np.linalg.norm(evolved) - 1.0) < 1e-10
    e0 = psi @ h.matrix @ psi
    e1 = np.real(np.conj(evolved) @ h.matrix @ evolved)
    assert abs(e0 - e1) < 1e-9


def test_heisenberg_evolution_is_unitary_conjugation():
    region = Region.interval(0, 5)
    params = ModelParams(2.0, 0.5)
    h = _operator(region, 1, params, seed=1)
    obs = np.diag(np.arange(h.dim, dtype=float))
    tau = heisenberg_evolve(h, 1.2, obs)
    assert spectral_norm(tau) == pytest.approx(spectral_norm(obs), abs=1e-9)
    assert np.max(np.abs(heisenberg_evolve(h, 0.0, obs) - obs)) < 1e-12


# ---------------------------------------------------------------------------
# propagation bound for the decoupled evolution

def test_propagation_bound_examples():
    region = Region.interval(0, 9, cut=frozenset(range(0, 8)))
    params = ModelParams(2.0, 0.0)
    report = lieb_robinson_check(region, params, (0,), (0, 1, 2), [0.0, 1.0])
    assert report.r == 3
    at_zero, at_one = report.rows
    assert at_zero.measured == 0.0
    assert at_one.bound == pytest.approx(2.0 ** -3 / math.factorial(3))
    assert at_one.measured <= at_one.bound * (1 + 1e-8)
    assert report.all_ok


def test_propagation_bound_vacuous_flag():
    region = Region.interval(0, 7, cut=frozenset(range(0, 6)))
    params = ModelParams(2.0, 0.0)
    report = lieb_robinson_check(region, params, (1,), (0, 1), [40.0])
    assert report.rows[0].vacuous
    assert report.rows[0].ok  # norm <= 1 < bound


def test_propagation_bound_with_disorder():
    region = Region.interval(0, 8, cut=frozenset(range(0, 6)))
    params = ModelParams(3.0, 2.0)
    omega = dict(sample_field(region, seed=8))
    report = lieb_robinson_check(region, params, (0,), tuple(range(4)), [0.5, 2.0], omega=omega)
    assert report.all_ok


def test_propagation_hypothesis_validation():
    params = ModelParams(2.0, 0.0)
    plain = Region.interval(0, 9)
    with pytest.raises(DomainError):
        lieb_robinson_check(plain, params, (0,), (0, 1), [1.0])
    cut = Region.interval(0, 9, cut=frozenset(range(0, 5)))
    with pytest.raises(DomainError):
        lieb_robinson_check(cut, params, (0,), (0,), [1.0])  # A not strict
    with pytest.raises(DomainError):
        lieb_robinson_check(cut, params, (4, 5), (3, 4, 5, 6), [1.0])  # A straddles
    with pytest.raises(DomainError):
        lieb_robinson_check(cut, params, (0, 2), (0, 1, 2, 3), [1.0])  # A disconnected


# ---------------------------------------------------------------------------
# filter function

def test_filter_scalar_matches_direct_formula():
    spec = FilterSpec(xi=2.0, a=0.3, energy=0.0)
    xs = np.array([-1.0, 0.0, 0.5])
    direct = (1 - np.exp(-2.0 * xs**2)) / (xs - 0.3j)
    assert np.max(np.abs(spec.scalar(xs) - direct)) < 1e-15


def test_filter_kills_the_centered_eigenvalue():
    region = Region.interval(0, 5)
    params = ModelParams(2.0, 1.0)
    h = _operator(region, 1, params, seed=9)
    decomp = eig_sym(h)
    target = float(decomp.eigenvalues[2])
    spec = FilterSpec(xi=3.0, a=0.0, energy=target)
    f = filter_apply(h, spec)
    vec = decomp.eigenvectors[:, 2]
    assert np.max(np.abs(f.matrix @ vec)) < 1e-12


def test_filter_spectral_mapping_and_commutation():
    region = Region.interval(0, 6)
    params = ModelParams(2.0, 1.0)
    h = _operator(region, 2, params, seed=10)
    spec = FilterSpec(xi=1.5, a=0.3, energy=0.4)
    f = filter_apply(h, spec)
    decomp = eig_sym(h)
    assert spectral_norm(f.matrix) <= np.max(np.abs(spec.scalar(decomp.eigenvalues))) + 1e-12
    assert spectral_norm(f.matrix @ h.matrix - h.matrix @ f.matrix) < 1e-9


def test_filter_width_must_be_positive():
    with pytest.raises(DomainError):
        FilterSpec(xi=0.0)


# ---------------------------------------------------------------------------
# filter quasi-locality

def test_filter_locality_rate():
    region = Region.interval(0, 9, cut=frozenset(range(0, 8)))
    params = ModelParams(2.0, 1.0)
    omega = sample_field(region, seed=5)
    report = filter_locality_check(
        region, 2, params, omega, (0,), [1, 2, 3, 4, 5, 6], energy=0.25
    )
    assert report.fitted_rate >= 0.4
    assert report.monotone
    assert len(report.measured) == 6
    assert report.reference[0] == pytest.approx(math.exp(-0.5))


def test_filter_locality_validation():
    params = ModelParams(2.0, 1.0)
    region = Region.interval(0, 9, cut=frozenset(range(0, 8)))
    omega = sample_field(region, seed=5)
    with pytest.raises(DomainError):
        filter_locality_check(Region.interval(0, 9), 2, params, omega, (0,), [1])
    with pytest.raises(DomainError):
        filter_locality_check(region, 2, params, omega, (7, 8), [1])
    with pytest.raises(DomainError):
        filter_locality_check(region, 2, params, omega, (0,), [0])
    with pytest.raises(DomainError):
        filter_locality_check(region, 2, params, omega, (0,), [12])


def test_presence_masks_partition():
    from xxzlab.config_space import SectorBasis

    basis = SectorBasis(Region.interval(0, 5), 2)
    touching, avoiding = presence_masks(basis, {0, 1})
    assert np.all(touching ^ avoiding)
    assert int(avoiding.sum()) == math.comb(4, 2)


# ---------------------------------------------------------------------------
# Fourier envelope

def test_fourier_bound_at_origin_and_margins():
    report = fourier_bound_check(5.0, 0.0, 0.01, [0.0])
    row = report.rows[0]
    assert row.value <= 5.0
    assert row.ok and row.ok_gaussian
    report = fourier_bound_check(5.0, 0.0, 0.01, np.linspace(-10, 10, 41))
    assert report.all_ok_gaussian


def test_fourier_envelope_widens_with_filter_width():
    narrow = 5.0 * math.exp(-25.0 / 4.0)
    wide = 5.0 * math.exp(-25.0 / 80.0)
    assert wide > narrow
    for t, expected in ((1.0, narrow), (20.0, wide)):
        report = fourier_bound_check(t, 0.0, 0.01, [5.0])
        assert report.rows[0].gaussian_bound == pytest.approx(expected)


def test_fourier_offset_needs_the_pole_tail():
    report = fourier_bound_check(1.0, 0.3, 0.01, np.linspace(-10, 10, 41))
    assert report.all_ok
    assert not report.all_ok_gaussian  # the pure Gaussian fails off-axis
    report0 = fourier_bound_check(1.0, 0.0, 0.01, np.linspace(-10, 10, 41))
    assert all(r.pole_tail == 0.0 for r in report0.rows)


def test_fourier_refusal_when_bound_is_unresolvable():
    with pytest.raises(QuadratureRefusal):
        fourier_bound_check(0.5, 0.0, 0.01, [40.0], max_refinements=2)


def test_fourier_validates_regularization():
    with pytest.raises(DomainError):
        fourier_bound_check(1.0, 0.0, 2.0, [0.0])


# ---------------------------------------------------------------------------
# the separation counterexample

def test_counterexample_all_assertions():
    report = counterexample_information(4)
    assert report.passes()
    assert report.offdiag_eigencorrelator == 0.0
    assert report.rotation_identity_error <= 1e-10
    assert report.string_identity_error <= 1e-10
    assert report.commutator_witness == pytest.approx(2.0, abs=1e-10)
    assert report.string_time == pytest.approx(math.pi / 4)


def test_counterexample_larger_chain():
    assert counterexample_information(8).passes()


def test_counterexample_validates_length():
    with pytest.raises(DomainError):
        counterexample_information(6)
    with pytest.raises(DomainError):
        counterexample_information(16)
