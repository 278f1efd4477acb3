import math

import numpy as np
import pytest

from chainrate.chain import ChainSpec, m_step_kernel, point_mass, tv_diameter, marginal, total_variation
from chainrate.ergodic import md_bound, md_coefficients
from chainrate.errors import DiagonalPair
from chainrate.pairop import (
    FULL,
    OFF_DIAGONAL,
    build_pair_operator,
    operator_norm,
    pair_list,
    pointwise_bound,
    product_bound,
    residual_kernels,
    spectral_bound,
    spectral_radius,
)

from conftest import random_cyclic_pairs, random_primitive_chains, random_stochastic

P2 = np.array([[0.9, 0.1], [0.2, 0.8]])
C3 = np.array([[0, 1, 0], [0, 0, 1], [0.5, 0.5, 0]])
UNIFORM2 = np.array([[0.5, 0.5], [0.5, 0.5]])


def brute_operator(K):
    """Pair operator entry by entry: (1 - a) * phi1(y1) * phi2(y2)."""
    n = K.shape[0]
    V = np.zeros((n * n, n * n))
    for x1 in range(n):
        for x2 in range(n):
            if x1 == x2:
                continue
            over = [min(K[x1, y], K[x2, y]) for y in range(n)]
            a = sum(over)
            if a >= 1 - 1e-14:
                continue
            for y1 in range(n):
                for y2 in range(n):
                    if a == 0:
                        V[x1 * n + x2, y1 * n + y2] = K[x1, y1] * K[x2, y2]
                    else:
                        phi1 = (K[x1, y1] - over[y1]) / (1 - a)
                        phi2 = (K[x2, y2] - over[y2]) / (1 - a)
                        V[x1 * n + x2, y1 * n + y2] = (1 - a) * phi1 * phi2
    return V


def eig_radius(A):
    return float(np.abs(np.linalg.eigvals(A)).max()) if A.size else 0.0


def test_residual_kernels_p2():
    res = residual_kernels(P2, 0, 1)
    # residuals (0.7, 0) and (0, 0.7), each of mass 1 - alpha = 0.7
    np.testing.assert_allclose(res.phi1, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(res.phi2, [0.0, 1.0], atol=1e-15)
    assert res.alpha == pytest.approx(0.3, abs=1e-15)
    assert not res.coupled


def test_residual_kernels_degenerate():
    same = np.array([[0.2, 0.8], [0.2, 0.8]])
    res = residual_kernels(same, 0, 1)
    assert res.coupled and res.alpha == 1.0
    assert not res.phi1.any() and not res.phi2.any()

    res = residual_kernels(C3, 0, 1)
    assert res.alpha == 0.0 and res.overlap is None
    np.testing.assert_array_equal(res.phi1, C3[0])
    np.testing.assert_array_equal(res.phi2, C3[1])

    with pytest.raises(DiagonalPair):
        residual_kernels(P2, 1, 1)


def test_residual_kernels_random():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        K = random_stochastic(rng, n, sparsity=0.4)
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                res = residual_kernels(K, a, b)
                if res.coupled:
                    continue
                assert abs(res.phi1.sum() - 1) <= 1e-12 and abs(res.phi2.sum() - 1) <= 1e-12
                assert not np.any((res.phi1 > 0) & (res.phi2 > 0))
                # residual masses both equal 1 - alpha
                r1 = K[a] - np.minimum(K[a], K[b])
                r2 = K[b] - np.minimum(K[a], K[b])
                assert abs(r1.sum() - (1 - res.alpha)) <= 1e-12
                assert abs(r2.sum() - (1 - res.alpha)) <= 1e-12


def test_pair_operator_p2():
    V = build_pair_operator(ChainSpec.homogeneous(P2), 0, 1, OFF_DIAGONAL)
    assert V.pairs == [(0, 1), (1, 0)]
    np.testing.assert_allclose(V.entries, np.diag([0.7, 0.7]), atol=1e-15)
    np.testing.assert_allclose(V.entries, brute_operator(P2)[np.ix_([1, 2], [1, 2])], atol=1e-15)


def test_pair_operator_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        P = random_stochastic(rng, n, sparsity=0.5)
        chain = ChainSpec.homogeneous(P)
        for m in (1, 2):
            W = build_pair_operator(chain, 0, m, FULL)
            np.testing.assert_allclose(W.entries, brute_operator(m_step_kernel(chain, 0, m)), atol=1e-13)


def test_full_square_diagonal_rows_zero():
    chain = random_primitive_chains(1, seed=0)[0]
    W = build_pair_operator(chain, 0, 1, FULL)
    for x in range(chain.n_states):
        assert not W.entries[W.index(x, x)].any()


def test_alpha_zero_row_is_outer_product():
    W = build_pair_operator(ChainSpec.homogeneous(C3), 0, 1, FULL)
    row = W.entries[W.index(0, 1)]
    np.testing.assert_array_equal(row, np.outer(C3[0], C3[1]).ravel())
    assert row.sum() == 1.0


def test_offdiag_indexing():
    V = build_pair_operator(ChainSpec.homogeneous(C3), 0, 1, OFF_DIAGONAL)
    for i, (a, b) in enumerate(pair_list(3, OFF_DIAGONAL)):
        assert V.index(a, b) == i


def test_operator_invariants_random():
    for chain in random_primitive_chains(25, seed=6):
        n = chain.n_states
        for m in (1, 2, 3):
            V = build_pair_operator(chain, 0, m, OFF_DIAGONAL)
            W = build_pair_operator(chain, 0, m, FULL)
            co = md_coefficients(chain, 0, m)
            assert (V.entries >= 0).all()
            for i, (a, b) in enumerate(V.pairs):
                assert abs(V.entries[i].sum() - (1 - co.pairwise[a, b])) <= 1e-12
            # no mass on diagonal targets
            for row in W.entries:
                assert row.reshape(n, n).diagonal().sum() == 0.0
            assert abs(operator_norm(V) - operator_norm(W)) <= 1e-12
            assert abs(operator_norm(V) - co.delta) <= 1e-12
            rv, rw = spectral_radius(V), spectral_radius(W)
            assert abs(rv - rw) <= 1e-9
            assert rv <= operator_norm(V) + 1e-9


def test_operator_norm_examples():
    p2 = ChainSpec.homogeneous(P2)
    assert operator_norm(np.zeros((3, 3))) == 0.0
    assert operator_norm(build_pair_operator(p2, 0, 1)) == pytest.approx(0.7, abs=1e-15)
    assert operator_norm(build_pair_operator(p2, 0, 2)) == pytest.approx(0.49, abs=1e-15)


def test_spectral_radius_examples():
    assert spectral_radius(np.diag([0.7, 0.7])) == pytest.approx(0.7, abs=1e-12)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == 0.0
    V = build_pair_operator(ChainSpec.homogeneous(P2), 0, 1)
    assert spectral_radius(V) == pytest.approx(0.7, abs=1e-9)


@pytest.mark.parametrize(
    "A",
    [
        np.array([[0.5, 0.3], [0.2, 0.6]]),
        np.array([[0.0, -0.5], [0.5, 0.0]]),  # purely imaginary pair
        np.array([[0.9, 1.0], [0.0, 0.9]]),  # Jordan block
        np.array([[2.0, 1.0, 0.0], [0.0, 3.0, 4.0], [1.0, 0.0, 0.5]]),
        np.array([[1e-200, 0.0], [0.0, 3e-200]]),
        np.array([[1e150, 2e150], [0.0, 1e150]]),
    ],
)
def test_spectral_radius_against_eigvals(A):
    r = eig_radius(A)
    assert spectral_radius(A) == pytest.approx(r, rel=1e-8, abs=1e-300)


def test_spectral_radius_random_against_eigvals():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        A = rng.normal(size=(n, n))
        est = spectral_radius(A)
        r = eig_radius(A)
        assert est >= r - 1e-9
        assert est == pytest.approx(r, rel=1e-7)
        assert est <= operator_norm(A) + 1e-12


def test_gelfand_sequence_upper_bounds():
    rng = np.random.default_rng(13)
    A = np.abs(rng.normal(size=(5, 5)))
    v = spectral_radius(A)
    for k in range(6):
        N = 2**k
        assert v**N <= operator_norm(np.linalg.matrix_power(A, N)) * (1 + 1e-8)


def test_spectral_bound_examples():
    p2 = ChainSpec.homogeneous(P2)
    assert spectral_bound(p2, 1, 4, eps=0.0) == pytest.approx(0.2401, abs=1e-9)
    inst = ChainSpec.homogeneous([[0.2, 0.3, 0.5]] * 3)
    assert spectral_bound(inst, 1, 3, eps=0.1) == pytest.approx(0.001, abs=1e-15)
    c3 = ChainSpec.homogeneous(C3)
    r = eig_radius(build_pair_operator(c3, 0, 3).entries)
    assert spectral_bound(c3, 3, 9, eps=0.01) == pytest.approx((r + 0.01) ** 3, rel=1e-8)


def test_spectral_bound_warns_when_trivial():
    c3 = ChainSpec.homogeneous(C3)
    with pytest.warns(RuntimeWarning):
        spectral_bound(c3, 1, 4, eps=0.2)


def test_pointwise_bound_examples():
    p2 = ChainSpec.homogeneous(P2)
    B = pointwise_bound(p2, 1, 3)
    np.testing.assert_allclose(B, [[0.0, 0.343], [0.343, 0.0]], atol=1e-15)
    for chain in random_primitive_chains(5, seed=40):
        co = md_coefficients(chain, 0, 2)
        B1 = pointwise_bound(chain, 2, 1)
        expected = 1 - co.pairwise
        np.testing.assert_allclose(B1, expected, atol=1e-12)
        assert not np.diag(pointwise_bound(chain, 2, 4)).any()


def test_pointwise_bound_dominates_pairwise_tv():
    for chain in random_primitive_chains(20, seed=41):
        n = chain.n_states
        for m in (1, 2):
            for k in range(0, 6):
                B = pointwise_bound(chain, m, k)
                assert B.max() <= operator_norm(build_pair_operator(chain, 0, m)) ** k + 1e-12
                for a in range(n):
                    for b in range(n):
                        if a != b:
                            tv = total_variation(
                                marginal(chain, point_mass(n, a), k * m), marginal(chain, point_mass(n, b), k * m)
                            )
                            assert tv <= B[a, b] + 1e-10


def test_product_bound_examples():
    for chain in random_primitive_chains(5, seed=50):
        cyc = ChainSpec.time_varying([chain.matrix], "cyclic")
        for m in (1, 2):
            norm_prod, _ = product_bound(cyc, m, 4)
            assert norm_prod == pytest.approx(md_bound(chain, m, 4 * m), rel=1e-12, abs=1e-15)
            n1 = product_bound(cyc, m, 1)
            V0 = operator_norm(build_pair_operator(cyc, 0, m))
            assert n1[0] == pytest.approx(V0, abs=1e-15)
            assert n1[1] == pytest.approx(V0, abs=1e-12)


def test_product_bound_instant_coupling_block():
    chain = ChainSpec.time_varying([P2, UNIFORM2], "cyclic")
    assert product_bound(chain, 1, 1) == pytest.approx((0.7, 0.7))
    for n in range(2, 6):
        assert product_bound(chain, 1, n) == (0.0, 0.0)
    for n in range(1, 4):
        assert product_bound(chain, 2, n) == (0.0, 0.0)


def test_product_bound_dominance_random():
    for chain in random_cyclic_pairs(10, seed=60):
        for m in (1, 2, 3):
            for n in range(0, 24 // m + 1):
                norm_prod, op_sup = product_bound(chain, m, n)
                assert op_sup <= norm_prod + 1e-10
                assert tv_diameter(chain, n * m) <= op_sup + 1e-10


def test_non_equality_on_c3():
    c3 = ChainSpec.homogeneous(C3)
    r1 = spectral_radius(build_pair_operator(c3, 0, 1))
    r2 = spectral_radius(build_pair_operator(c3, 0, 2))
    assert r1 == pytest.approx(eig_radius(build_pair_operator(c3, 0, 1).entries), rel=1e-9)
    assert abs(r2 - r1**2) > 1e-3
    assert r2 == pytest.approx(0.5, abs=1e-9)
    assert math.sqrt(r2) == pytest.approx(2**-0.5, abs=1e-9)
