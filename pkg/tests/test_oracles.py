import itertools
import math

import numpy as np
import pytest

from xxzlab.config_space import DomainError, Region, cluster_count
from xxzlab.disorder import sample_field
from xxzlab.numerics import eig_sym, matrix_function
from xxzlab.operators import ModelParams, assemble_hamiltonian
from xxzlab.oracles import (
    bounded_cluster_ball,
    c_alpha,
    dh_shell_sizes,
    exp_sum_d1,
    exp_sum_d1_dual,
    exp_sum_dH,
    partition_count,
    partition_generating_function,
    tensor_hamiltonian,
    tensor_number_operator,
    _d1_window_sum,
)


# ---------------------------------------------------------------------------
# the spin-space oracle

def test_single_site_hamiltonian():
    region = Region.interval(3, 3)
    params = ModelParams(2.0, 4.0)
    omega = {3: 0.25}
    top = tensor_hamiltonian(region, params, omega)
    assert np.array_equal(top.matrix, np.diag([0.0, 1 + 4.0 * 0.25]))


def test_commutes_with_number_operator_exactly():
    region = Region.interval(0, 6)
    params = ModelParams(2.5, 3.0)
    omega = dict(sample_field(region, seed=1))
    h = tensor_hamiltonian(region, params, omega).matrix
    n = tensor_number_operator(region).matrix
    assert np.max(np.abs(h @ n - n @ h)) == 0.0


@pytest.mark.parametrize("n_sites,with_cut", [(4, False), (7, False), (7, True), (9, True)])
def test_sector_assembly_matches_projection(n_sites, with_cut):
    region = Region.interval(0, n_sites - 1)
    if with_cut:
        region = region.with_cut(range(0, n_sites // 2))
    params = ModelParams(3.0, 2.0)
    omega = sample_field(region, seed=42)
    top = tensor_hamiltonian(region, params, dict(omega))
    for n in range(n_sites + 1):
        sec = assemble_hamiltonian(region, n, params, omega)
        assert np.max(np.abs(sec.matrix - top.sector_block(n))) <= 1e-12


def test_functions_of_h_vanish_between_sectors():
    region = Region.interval(0, 5)
    params = ModelParams(2.0, 1.0)
    omega = dict(sample_field(region, seed=6))
    top = tensor_hamiltonian(region, params, omega)
    d = eig_sym(top.matrix)
    z = 0.4 + 1e-2j
    resolvent = matrix_function(d, lambda x: 1 / (x - z))
    evolution = matrix_function(d, lambda x: np.exp(-1j * 1.3 * x))
    for f in (resolvent, evolution):
        lo, hi = top.offsets[2], top.offsets[3]
        other = np.concatenate([f[lo:hi, : top.offsets[2]], f[lo:hi, top.offsets[3]:]], axis=1)
        assert np.max(np.abs(other)) < 1e-12


def test_tensor_size_cap():
    with pytest.raises(DomainError):
        tensor_hamiltonian(Region.interval(0, 14), ModelParams(2.0, 0.0), {})


# ---------------------------------------------------------------------------
# partitions and the product constant

def test_partition_counts():
    assert [partition_count(n) for n in range(6)] == [1, 1, 2, 3, 5, 7]
    # direct enumeration oracle for P(5): partitions of 5
    by_hand = 0
    for parts in range(1, 6):
        for combo in itertools.combinations_with_replacement(range(1, 6), parts):
            if sum(combo) == 5:
                by_hand += 1
    assert by_hand == 7
    with pytest.raises(DomainError):
        partition_count(-1)


def test_partition_generating_function_identity():
    alpha = 1.0
    lhs = partition_generating_function(alpha)
    rhs = 1.0
    n = 1
    while math.exp(-alpha * n) / (1 - math.exp(-alpha * n)) > 1e-18:
        rhs /= 1 - math.exp(-alpha * n)
        n += 1
    assert abs(lhs - rhs) < 1e-10


def test_c_alpha_properties():
    assert c_alpha(50.0) == pytest.approx(1.0, abs=1e-12)
    values = [c_alpha(a) for a in (0.5, 1.0, 2.0, 4.0)]
    assert values == sorted(values, reverse=True)
    with pytest.raises(DomainError):
        c_alpha(0.0)


# ---------------------------------------------------------------------------
# exponential sums: the windowed recursion against brute enumeration

def _brute_d1(anchor, alpha, radius, k):
    total = 0.0
    n = len(anchor)
    window = range(anchor[0] - radius, anchor[-1] + radius + 1)
    for x in itertools.combinations(window, n):
        if all(abs(a - b) <= radius for a, b in zip(x, anchor)):
            w = cluster_count(x)
            if k is None or w <= k:
                total += math.exp(-alpha * sum(abs(a - b) for a, b in zip(x, anchor)))
    return total


@pytest.mark.parametrize(
    "anchor,k,alpha,radius",
    [
        ((0, 1, 5), 2, 1.0, 4),
        ((0, 3), 2, 0.7, 5),
        ((2, 3, 4), 1, 1.2, 3),
        ((0, 2, 4), None, 1.0, 3),
    ],
)
def test_window_sum_matches_brute_force(anchor, k, alpha, radius):
    assert _d1_window_sum(anchor, alpha, radius, k) == pytest.approx(
        _brute_d1(anchor, alpha, radius, k), abs=1e-12
    )


def test_exp_sum_single_particle_closed_form():
    for alpha in (0.5, 1.0, 2.0):
        closed = (1 + math.exp(-alpha)) / (1 - math.exp(-alpha))
        assert abs(exp_sum_d1((0,), 1, alpha).total - closed) < 1e-12
        assert abs(exp_sum_d1_dual((0,), alpha).total - closed) < 1e-12
        assert exp_sum_d1((0,), 1, alpha).bound == pytest.approx(c_alpha(alpha) ** 2)


def test_exp_sum_bounds_and_certificates():
    res = exp_sum_d1((0, 1, 2), 2, 2.0)
    assert res.satisfied
    assert res.last_shell <= 1e-12 * res.total
    dual = exp_sum_d1_dual((0, 1, 2, 3), 1.0)  # single cluster, k = 1
    assert dual.satisfied and dual.bound == pytest.approx(c_alpha(1.0))


def test_exp_sum_translation_invariance():
    a = exp_sum_d1((0, 2), 2, 1.0)
    b = exp_sum_d1((7, 9), 2, 1.0)
    assert a.total == pytest.approx(b.total, rel=1e-13)
    c = exp_sum_d1_dual((0, 1), 1.0)
    d = exp_sum_d1_dual((-4, -3), 1.0)
    assert c.total == pytest.approx(d.total, rel=1e-13)


def test_exp_sum_validation():
    with pytest.raises(DomainError):
        exp_sum_d1((0, 1), 3, 1.0)
    with pytest.raises(DomainError):
        exp_sum_d1_dual((0, 2), 1.0, k=1)  # two clusters, k too small
    with pytest.raises(DomainError):
        exp_sum_d1((0,), 1, -1.0)


# ---------------------------------------------------------------------------
# Hausdorff shells

def test_dh_shell_counts_against_envelope():
    x = (0, 1)
    shells = dh_shell_sizes(x, 6, 1)
    assert shells[0] == {1: 1}
    for r, by_m in shells.items():
        for m, count in by_m.items():
            assert count <= math.comb(len(x) + 2 * 1 * r, 2 * m)


def test_dh_shells_exhaust_the_ball():
    x = (0, 2, 3)
    radius, k = 5, 2
    shells = dh_shell_sizes(x, radius, k)
    total = sum(sum(by_m.values()) for by_m in shells.values())
    ball = [
        y
        for y in bounded_cluster_ball(x, radius, k)
        if max(
            max(min(abs(u - v) for v in y) for u in x),
            max(min(abs(u - v) for v in x) for u in y),
        )
        <= radius
    ]
    assert total == len(ball)
    assert len(set(ball)) == len(ball)


def test_exp_sum_dH_ratio_bounded_across_sizes():
    ratios = []
    for n in range(2, 7):
        res = exp_sum_dH(tuple(range(n)), 1.0, k=2)
        assert res.last_shell <= 1e-12 * res.total
        ratios.append(res.ratio)
    assert max(ratios) < 0.5
