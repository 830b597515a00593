import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import polynomial_filter
from strategies import graphs

from graphgic.filters import (
    FilterError,
    build_filter,
    decaying_coeffs,
    draw_support,
    filter_column_orthogonality,
    simulate_instance,
)
from graphgic.graph import GsoMatrix, generate_named, generate_sbm, laplacian, normalize_gso_to_max_eig

coeff_lists = st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=4)


class TestBuildFilter:
    def test_c6_identity_plus_laplacian(self, c6_filter):
        h = c6_filter.h
        assert (h[0, 0], h[0, 1], h[0, 2]) == (3.0, -1.0, 0.0)
        assert c6_filter.psi == 1

    def test_degree_zero_rejected(self, c6):
        with pytest.raises(FilterError, match="at least 1"):
            build_filter(laplacian(c6), [1.0])

    def test_degree_too_large(self):
        g = generate_named("path", {"n": 3})
        with pytest.raises(FilterError, match="at most"):
            build_filter(laplacian(g), [1, 1, 1, 1])

    def test_constant_filter(self, c6):
        f = build_filter(laplacian(c6), [2.5, 0.0, 0.0])
        assert np.array_equal(f.h, 2.5 * np.eye(6))

    def test_matrix_is_read_only(self, c6_filter):
        with pytest.raises(ValueError):
            c6_filter.h[0, 0] = 1.0

    def test_nonlocal_gso_detected(self, c6):
        dense = GsoMatrix(np.ones((6, 6)), "custom")
        with pytest.raises(FilterError, match="leaks"):
            build_filter(dense, [1, 1], c6.dist)

    @given(graphs(min_n=4), coeff_lists)
    def test_matches_matrix_powers(self, g, coeffs):
        if len(coeffs) - 1 > g.n - 1:
            return
        S = laplacian(g)
        f = build_filter(S, coeffs, g.dist)
        assert np.allclose(f.h, polynomial_filter(S.s, coeffs), atol=1e-9)

    @given(graphs(min_n=4), coeff_lists)
    def test_zero_pattern(self, g, coeffs):
        psi = len(coeffs) - 1
        if psi > g.n - 1:
            return
        f = build_filter(normalize_gso_to_max_eig(laplacian(g), 12.0), coeffs)
        far = g.dist > psi
        if far.any():
            assert np.abs(f.h[far]).max() < 1e-10

    def test_decaying_coeffs(self):
        assert decaying_coeffs(3, 2.0) == [1.0, 0.5, 0.25, 0.125]
        with pytest.raises(ValueError):
            decaying_coeffs(2, 0.0)


class TestOrthogonality:
    def test_c6_values(self, c6_filter, c6):
        assert filter_column_orthogonality(c6_filter, 0, 3, c6.dist) == 0.0
        assert filter_column_orthogonality(c6_filter, 0, 2, c6.dist) == 1.0
        assert filter_column_orthogonality(c6_filter, 0, 0, c6.dist) == 11.0

    @given(graphs(min_n=4), coeff_lists)
    def test_far_columns_orthogonal(self, g, coeffs):
        psi = len(coeffs) - 1
        if psi > g.n - 1:
            return
        f = build_filter(normalize_gso_to_max_eig(laplacian(g), 12.0), coeffs, g.dist)
        gram = f.h.T @ f.h
        far = g.dist > 2 * psi
        if far.any():
            assert np.abs(gram[far]).max() < 1e-9


class TestSimulate:
    def test_snr_energy(self):
        g = generate_sbm(2, 70, 6 / 70, 2, 0)
        f = build_filter(normalize_gso_to_max_eig(laplacian(g), 12), [1] * 5, g.dist)
        inst = simulate_instance(f, [0, 1, 2, 3], snr_db=20, sigma_n=0.01, rng_seed=1)
        hx = f.h @ inst.x
        assert abs(hx @ hx - 1.4) <= 1e-9 * 1.4
        assert abs(inst.snr_db - 20) < 1e-9

    @given(st.integers(0, 10_000), st.floats(-10, 40), st.sampled_from(["std-normal", "uniform-split"]))
    def test_calibration_and_support(self, seed, snr, dist):
        g = generate_named("cycle", {"n": 10})
        f = build_filter(laplacian(g), [1, 1, 1], g.dist)
        inst = simulate_instance(f, [2, 3, 7], dist, snr, 0.05, seed)
        hx = f.h @ inst.x
        target = 10 ** (snr / 10) * 10 * 0.05**2
        assert abs(hx @ hx - target) <= 1e-9 * target
        assert np.all(inst.x[[0, 1, 4, 5, 6, 8, 9]] == 0)
        assert np.all(inst.x[[2, 3, 7]] != 0)

    def test_uniform_split_magnitudes_before_scaling(self):
        g = generate_named("cycle", {"n": 8})
        f = build_filter(laplacian(g), [1, 1], g.dist)
        inst = simulate_instance(f, [1, 4], "uniform-split", 20, 0.01, 3)
        ratio = abs(inst.x[1] / inst.x[4])
        assert 0.5 <= ratio <= 2.0

    def test_noiseless(self, c6_filter):
        inst = simulate_instance(c6_filter, [0], snr_db=10, sigma_n=0.1, rng_seed=0, noiseless=True)
        assert np.array_equal(inst.y, c6_filter.h @ inst.x)

    def test_noise_statistics(self, c6_filter):
        res = []
        for seed in range(400):
            inst = simulate_instance(c6_filter, [0], snr_db=0, sigma_n=0.3, rng_seed=seed)
            res.append(inst.y - c6_filter.h @ inst.x)
        res = np.concatenate(res)
        assert abs(res.std() - 0.3) < 0.02 and abs(res.mean()) < 0.02

    def test_null_space_support(self):
        g = generate_named("cycle", {"n": 6})
        f = build_filter(laplacian(g), [0.0, 1.0], g.dist)
        # the Laplacian annihilates constants, but a single node is never in its null space;
        # a zero filter is
        zero = build_filter(GsoMatrix(np.zeros((6, 6)), "custom"), [0.0, 1.0])
        with pytest.raises(FilterError, match="vanishes"):
            simulate_instance(zero, [0], rng_seed=0)
        assert simulate_instance(f, [0], rng_seed=0).x[0] != 0

    def test_bad_arguments(self, c6_filter):
        with pytest.raises(ValueError):
            simulate_instance(c6_filter, [], rng_seed=0)
        with pytest.raises(ValueError):
            simulate_instance(c6_filter, [0], sigma_n=0.0, rng_seed=0)
        with pytest.raises(ValueError):
            simulate_instance(c6_filter, [0], snr_db=-np.inf, rng_seed=0)

    def test_seeded(self, c6_filter):
        a = simulate_instance(c6_filter, [0, 2], rng_seed=11)
        b = simulate_instance(c6_filter, [0, 2], rng_seed=11)
        assert np.array_equal(a.y, b.y)


class TestDrawSupport:
    def test_localized_on_cycle(self, c6):
        for seed in range(50):
            sup = draw_support(c6, "localized", 3, seed)
            # on a cycle the only localized triples are a node and both neighbors
            mid = [k for k in sup if all(c6.dist[k, m] <= 1 for m in sup)]
            assert len(mid) >= 1
            center = mid[0]
            assert set(sup) == {center, (center - 1) % 6, (center + 1) % 6}

    @given(st.integers(0, 10_000), st.integers(2, 6))
    def test_localized_diameter(self, seed, s):
        g = generate_sbm(1, 40, 0.25, 0, 3)
        sup = draw_support(g, "localized", s, seed)
        assert len(sup) == s
        assert max(g.dist[a, b] for a in sup for b in sup) <= 2

    @given(st.integers(0, 10_000), st.integers(2, 6))
    def test_mixed_cardinality(self, seed, s):
        g = generate_sbm(1, 40, 0.25, 0, 3)
        sup = draw_support(g, "mixed", s, seed)
        assert len(sup) == len(set(sup)) == s

    def test_pool(self):
        g = generate_sbm(2, 30, 0.3, 2, 1)
        for seed in range(30):
            assert all(k < 30 for k in draw_support(g, "localized", 4, seed, pool=range(30)))

    def test_impossible(self):
        g = generate_named("path", {"n": 4})
        with pytest.raises(FilterError, match="could not place"):
            draw_support(g, "localized", 4, 0)

    def test_errors(self, c6):
        with pytest.raises(ValueError):
            draw_support(c6, "mixed", 1, 0)
        with pytest.raises(ValueError):
            draw_support(c6, "scattered", 2, 0)
