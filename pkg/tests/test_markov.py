from __future__ import annotations

import math
from itertools import chain, combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hidekit.errors import BadTerminationProbability, DimensionMismatch, MismatchedSupport, NotMixedWithinCap
from hidekit.graph import build_graph
from hidekit.infotheory import Dist, conditional_entropy
from hidekit.markov import (
    TransitionMatrix,
    algorithm_walk_matrix,
    d_t,
    dbar_t,
    lazy_walk_matrix,
    markov_joint,
    matrix_power,
    mixing_time,
    monotonicity_probes,
    propagate,
    simple_walk_matrix,
    stationary_distribution,
    tv_distance,
)

from .conftest import acceptance_graphs, fam


def tv_by_subsets(p: Dist, q: Dist) -> float:
    xs = list(p.probs)
    subsets = chain.from_iterable(combinations(xs, r) for r in range(len(xs) + 1))
    return max(abs(sum(p[x] for x in A) - sum(q[x] for x in A)) for A in subsets)


def d_sweep_oracle(P: np.ndarray, pi: np.ndarray, eps: float) -> int:
    """Least t with max-row TV <= eps, by plain repeated multiplication."""
    Pt, t = np.eye(len(pi)), 0
    while 0.5 * np.abs(Pt - pi).sum(axis=1).max() > eps:
        Pt, t = Pt @ P, t + 1
    return t


@st.composite
def random_graphs(draw, max_n=9):
    n = draw(st.integers(2, max_n))
    # random spanning tree plus extra edges keeps the graph connected
    edges = {(draw(st.integers(1, v - 1)), v) for v in range(2, n + 1)}
    extra = draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)), max_size=2 * n))
    edges |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    return build_graph(sorted(edges), n=n)


class TestMatrices:
    def test_k2(self, k2):
        assert lazy_walk_matrix(k2).matrix.tolist() == [[0.5, 0.5], [0.5, 0.5]]

    def test_p3_middle_row(self, p3):
        assert lazy_walk_matrix(p3).matrix[1].tolist() == [0.25, 0.5, 0.25]

    def test_algorithm_kernel_k2(self, k2):
        K = algorithm_walk_matrix(k2, 0.25).matrix
        # stay 1/2 and move 1/4 renormalized by survival 3/4
        assert K[0, 0] == pytest.approx(2 / 3, abs=1e-15)
        assert K[0, 1] == pytest.approx(1 / 3, abs=1e-15)

    def test_algorithm_kernel_small_q_near_lazy(self, p3):
        diff = algorithm_walk_matrix(p3, 1e-9).matrix - lazy_walk_matrix(p3).matrix
        assert np.abs(diff).max() < 1e-8

    @pytest.mark.parametrize("q", [0, -0.1, 0.6, float("nan")])
    def test_bad_q(self, p3, q):
        with pytest.raises(BadTerminationProbability):
            algorithm_walk_matrix(p3, q)

    def test_simple_walk_c4(self):
        P = simple_walk_matrix(fam("cycle", n=4)).matrix
        assert P[0].tolist() == [0, 0.5, 0, 0.5]

    def test_rejects_non_stochastic(self):
        with pytest.raises(Exception):
            TransitionMatrix([[0.5, 0.4], [0.5, 0.5]])

    @settings(max_examples=50, deadline=None)
    @given(random_graphs(), st.sampled_from([0.5, 0.2, 0.01]))
    def test_rows_sum_to_one(self, g, q):
        for P in (lazy_walk_matrix(g), algorithm_walk_matrix(g, q)):
            assert np.allclose(P.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_powers_stay_stochastic(self):
        P = lazy_walk_matrix(fam("chain_of_cliques", seed=7, x=4, y=3))
        Pt = matrix_power(P, 2**16)
        assert np.abs(Pt.sum(axis=1) - 1).max() < 1e-10


class TestStationary:
    def test_p3(self, p3):
        assert stationary_distribution(p3).probs == {1: 0.25, 2: 0.5, 3: 0.25}

    def test_clique_uniform(self):
        pi = stationary_distribution(fam("clique", n=5))
        assert all(p == pytest.approx(0.2, abs=1e-15) for p in pi.probs.values())

    def test_chain_fixed_point(self):
        g = fam("chain_of_cliques", seed=7, x=4, y=3)
        pi = stationary_distribution(g)
        assert all(pi[v] == g.degree(v) / 48 for v in g.vertices)
        vec = np.array(pi.vector(g.vertices))
        assert np.abs(vec @ lazy_walk_matrix(g).matrix - vec).max() < 1e-10

    @pytest.mark.parametrize("label,g", acceptance_graphs())
    def test_fixed_point_on_families(self, label, g):
        vec = np.array(stationary_distribution(g).vector(g.vertices))
        assert np.abs(vec @ lazy_walk_matrix(g).matrix - vec).max() < 1e-10


class TestPropagate:
    def test_identity_at_zero(self, p3):
        d = Dist({1: 0.2, 2: 0.3, 3: 0.5})
        assert propagate(d, lazy_walk_matrix(p3), 0) is d

    def test_k2_one_step(self, k2):
        assert propagate(Dist({1: 1.0, 2: 0.0}), lazy_walk_matrix(k2), 1).probs == {1: 0.5, 2: 0.5}

    def test_p3_two_steps(self, p3):
        # two hand multiplications: (1,0,0) -> (1/2,1/2,0) -> (3/8,1/2,1/8)
        out = propagate(Dist.point(1, [1, 2, 3]), lazy_walk_matrix(p3), 2)
        assert out.vector([1, 2, 3]) == pytest.approx([0.375, 0.5, 0.125], abs=1e-15)

    def test_long_horizon_uses_powers(self):
        g = fam("cycle", n=5)
        P = lazy_walk_matrix(g)
        d = Dist.point(1, g.vertices)
        stepwise = np.array(d.vector(g.vertices))
        for _ in range(100):
            stepwise = stepwise @ P.matrix
        assert propagate(d, P, 100).vector(g.vertices) == pytest.approx(stepwise.tolist(), abs=1e-12)

    def test_dimension_mismatch(self, p3):
        with pytest.raises(DimensionMismatch):
            propagate(Dist({9: 1.0}), lazy_walk_matrix(p3), 1)


class TestTV:
    def test_examples(self):
        assert tv_distance(Dist({0: 0.7, 1: 0.3}), Dist({0: 0.5, 1: 0.5})) == pytest.approx(0.2, abs=1e-15)
        assert tv_distance(Dist({0: 1.0, 1: 0.0}), Dist({0: 0.0, 1: 1.0})) == 1.0
        p = Dist({0: 0.1, 1: 0.9})
        assert tv_distance(p, p) == 0.0

    def test_mismatched(self):
        with pytest.raises(MismatchedSupport):
            tv_distance(Dist({0: 1.0}), Dist({1: 1.0}))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(
        st.lists(st.floats(0.01, 1), min_size=n, max_size=n),
        st.lists(st.floats(0.01, 1), min_size=n, max_size=n))))
    def test_matches_subset_enumeration(self, ab):
        a, b = ab
        p = Dist({i: x / sum(a) for i, x in enumerate(a)})
        q = Dist({i: x / sum(b) for i, x in enumerate(b)})
        assert tv_distance(p, q) == pytest.approx(tv_by_subsets(p, q), abs=1e-12)


class TestDistances:
    def test_k2_mixes_in_one_step(self, k2):
        assert d_t(lazy_walk_matrix(k2), stationary_distribution(k2), 1) == 0.0

    def test_c4_one_step(self):
        # P(1,.) = (1/2,1/4,0,1/4); vs uniform: TV 1/4; row 1 vs row 3: TV 1/2
        g = fam("cycle", n=4)
        P = lazy_walk_matrix(g)
        assert d_t(P, stationary_distribution(g), 1) == pytest.approx(0.25, abs=1e-15)
        assert dbar_t(P, 1) == pytest.approx(0.5, abs=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(random_graphs(), st.integers(0, 128))
    def test_sandwich(self, g, t):
        P = lazy_walk_matrix(g)
        d = d_t(P, stationary_distribution(g), t)
        db = dbar_t(P, t)
        assert d <= db + 1e-12 and db <= 2 * d + 1e-12

    @pytest.mark.parametrize("label,g", acceptance_graphs()[::3])
    def test_d_non_increasing(self, label, g):
        P, pi = lazy_walk_matrix(g), stationary_distribution(g)
        vals = [d_t(P, pi, t) for t in range(0, 513, 8)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


class TestMixingTime:
    def test_k2(self, k2):
        assert mixing_time(lazy_walk_matrix(k2), stationary_distribution(k2), 0.25) == 1

    def test_c8_matches_sweep_oracle(self):
        g = fam("cycle", n=8)
        P, pi = lazy_walk_matrix(g), stationary_distribution(g)
        pi_v = np.array(pi.vector(g.vertices))
        for eps in (0.25, 1 / 16, 1e-3, 1e-6):
            assert mixing_time(P, pi, eps) == d_sweep_oracle(P.matrix, pi_v, eps)
        assert mixing_time(P, pi, 0.25) == 6

    def test_c8_log_inequality(self):
        g = fam("cycle", n=8)
        P, pi = lazy_walk_matrix(g), stationary_distribution(g)
        assert mixing_time(P, pi, 1 / 16) <= math.ceil(math.log2(16)) * mixing_time(P, pi, 0.25)

    def test_bisection_beyond_linear_range(self):
        g = fam("path", n=12)
        P, pi = lazy_walk_matrix(g), stationary_distribution(g)
        t = mixing_time(P, pi, 1e-4)
        assert t > 64
        assert t == d_sweep_oracle(P.matrix, np.array(pi.vector(g.vertices)), 1e-4)
        assert d_t(P, pi, t) <= 1e-4 < d_t(P, pi, t - 1)

    def test_cap(self):
        g = fam("path", n=8)
        with pytest.raises(NotMixedWithinCap):
            mixing_time(lazy_walk_matrix(g), stationary_distribution(g), 0.01, t_max=3)

    def test_cap_beyond_linear_range(self):
        g = fam("path", n=12)
        with pytest.raises(NotMixedWithinCap):
            mixing_time(lazy_walk_matrix(g), stationary_distribution(g), 1e-9, t_max=100)


class TestMonotonicity:
    def test_identical_is_zero(self, p3):
        mu = Dist({1: 0.2, 2: 0.3, 3: 0.5})
        rep = monotonicity_probes(lazy_walk_matrix(p3), mu, mu, range(10))
        assert rep.kl == [0.0] * 10

    def test_p3_endpoints_strictly_decreasing(self, p3):
        mu, nu = Dist.point(1, [1, 2, 3]), Dist.point(3, [1, 2, 3])
        rep = monotonicity_probes(lazy_walk_matrix(p3), mu, nu, range(21))
        assert rep.kl[0] == math.inf and rep.kl[1] == math.inf  # supports not yet overlapping
        finite = [k for k in rep.kl if math.isfinite(k)]
        assert all(b < a for a, b in zip(finite, finite[1:]))
        assert rep.monotone_kl_decreasing

    def test_p3_conditional_entropy(self, p3):
        prior = Dist({1: 0.5, 2: 0.0, 3: 0.5})
        P = lazy_walk_matrix(p3)
        rep = monotonicity_probes(P, prior, prior, range(21), prior=prior)
        assert rep.monotone_cond_entropy_nondecreasing
        # independent joint construction for a few t
        for t in (0, 1, 5, 20):
            assert rep.cond_entropy[t] == pytest.approx(conditional_entropy(markov_joint(prior, P, t)), abs=1e-12)

    @pytest.mark.parametrize("label,g", [(lbl, g) for lbl, g in acceptance_graphs() if g.n <= 12][::3])
    def test_kl_to_stationary_vanishes(self, label, g):
        P, pi = lazy_walk_matrix(g), stationary_distribution(g)
        t = 4 * mixing_time(P, pi, 0.25)
        rep = monotonicity_probes(P, Dist.point(1, g.vertices), pi, [t])
        assert rep.kl[0] < 0.05
