from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hidekit.errors import InvalidDistribution, MismatchedSupport, OutOfRange, ZeroInQ
from hidekit.infotheory import (
    Dist,
    JointDist,
    binary_entropy,
    conditional_entropy,
    entropy,
    kl_divergence,
    kl_upper_bound,
    mutual_information,
    uncertainty_coefficient,
)

SKEWED = JointDist({("u", "a"): 0.45, ("u", "b"): 0.05, ("v", "a"): 0.05, ("v", "b"): 0.45})


def mi_double_sum(j: JointDist) -> float:
    """Oracle: I = sum p(x,y) log p(x,y) / (p(x) p(y)) straight from the definition."""
    px, py = {}, {}
    for (x, y), p in j.probs.items():
        px[x] = px.get(x, 0.0) + p
        py[y] = py.get(y, 0.0) + p
    return sum(p * math.log2(p / (px[x] * py[y])) for (x, y), p in j.probs.items() if p > 0)


# exact zeros or weights >= 1e-6; subnormal products would underflow the oracles
weights = st.one_of(st.just(0.0), st.floats(1e-6, 1))


@st.composite
def joints(draw, max_rows=4, max_cols=4):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    w = draw(st.lists(weights, min_size=r * c, max_size=r * c))
    assume(sum(w) > 1e-3)
    s = sum(w)
    return JointDist({(i, j): w[i * c + j] / s for i in range(r) for j in range(c)})


@st.composite
def dist_pairs(draw):
    n = draw(st.integers(1, 6))
    a = draw(st.lists(weights, min_size=n, max_size=n))
    b = draw(st.lists(st.floats(1e-3, 1), min_size=n, max_size=n))
    assume(sum(a) > 1e-3)
    return (Dist({i: x / sum(a) for i, x in enumerate(a)}),
            Dist({i: x / sum(b) for i, x in enumerate(b)}))


class TestDist:
    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidDistribution):
            Dist({1: 0.5, 2: 0.4})

    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            Dist({1: 1.5, 2: -0.5})

    def test_rejects_empty(self):
        with pytest.raises(InvalidDistribution):
            Dist({})

    def test_missing_outcome_is_zero(self):
        assert Dist({1: 1.0})[7] == 0.0

    def test_joint_keys_must_be_pairs(self):
        with pytest.raises(InvalidDistribution):
            JointDist({1: 1.0})


class TestEntropy:
    def test_uniform_four(self):
        assert entropy(Dist.uniform(range(4))) == 2.0

    def test_point_mass(self):
        assert entropy(Dist.point(3, range(5))) == 0.0

    def test_conditional_entropy_of_skewed_joint(self):
        # H(X | Y) with p(x|y) in {0.9, 0.1} for both columns is h(0.9)
        oracle = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
        assert conditional_entropy(SKEWED) == pytest.approx(oracle, abs=1e-12)
        assert conditional_entropy(SKEWED) == pytest.approx(0.4689955935892812, abs=1e-12)

    def test_mi_skewed(self):
        assert mutual_information(SKEWED) == pytest.approx(mi_double_sum(SKEWED), abs=1e-12)
        assert mutual_information(SKEWED) == pytest.approx(1 - 0.4689955935892812, abs=1e-12)

    def test_uc_independent_is_zero(self):
        j = JointDist.product(Dist.uniform("ab"), Dist.uniform("xyz"))
        assert uncertainty_coefficient(j) == pytest.approx(0.0, abs=1e-12)

    def test_uc_identity_is_one(self):
        j = JointDist({(x, x): 0.25 for x in range(4)})
        assert uncertainty_coefficient(j) == pytest.approx(1.0, abs=1e-12)

    def test_uc_zero_prior_entropy(self):
        assert uncertainty_coefficient(JointDist({(1, 1): 0.5, (1, 2): 0.5})) == 0.0


@settings(max_examples=200, deadline=None)
@given(joints())
def test_mi_matches_double_sum(j):
    assert mutual_information(j) == pytest.approx(max(0.0, mi_double_sum(j)), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(joints())
def test_mi_is_kl_to_product(j):
    prod = JointDist.product(j.row_marginal(), j.col_marginal())
    full = JointDist({k: j.probs.get(k, 0.0) for k in prod.probs})
    assert mutual_information(j) == pytest.approx(kl_divergence(Dist(full.probs), Dist(prod.probs)), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(joints())
def test_information_bounds(j):
    hx = entropy(j.row_marginal())
    i = mutual_information(j)
    assert 0.0 <= i <= min(hx, entropy(j.col_marginal())) + 1e-9
    assert 0.0 <= conditional_entropy(j) <= hx + 1e-9
    assert 0.0 <= uncertainty_coefficient(j) <= 1.0
    assert mutual_information(j.transpose()) == pytest.approx(i, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(joints(), st.permutations(range(4)), st.permutations(range(4)))
def test_relabeling_invariance(j, row_perm, col_perm):
    relabeled = JointDist({(row_perm[x] * 10, f"c{col_perm[y]}"): p for (x, y), p in j.probs.items()})
    assert mutual_information(relabeled) == pytest.approx(mutual_information(j), abs=1e-12)
    assert uncertainty_coefficient(relabeled) == pytest.approx(uncertainty_coefficient(j), abs=1e-12)


class TestKL:
    def test_example(self):
        p, q = Dist({0: 0.9, 1: 0.1}), Dist({0: 0.5, 1: 0.5})
        oracle = 0.9 * math.log2(1.8) + 0.1 * math.log2(0.2)
        assert kl_divergence(p, q) == pytest.approx(oracle, abs=1e-12)
        assert kl_upper_bound(p, q) == pytest.approx((0.81 / 0.5 + 0.01 / 0.5 - 1) / math.log(2), abs=1e-12)

    def test_self_is_zero(self):
        p = Dist({0: 0.3, 1: 0.7})
        assert kl_divergence(p, p) == 0.0

    def test_infinite(self):
        assert kl_divergence(Dist({0: 0.5, 1: 0.5}), Dist({0: 1.0, 1: 0.0})) == math.inf

    def test_zero_in_p_is_finite(self):
        assert math.isfinite(kl_divergence(Dist({0: 1.0, 1: 0.0}), Dist({0: 0.5, 1: 0.5})))

    def test_mismatched(self):
        with pytest.raises(MismatchedSupport):
            kl_divergence(Dist({0: 1.0}), Dist({1: 1.0}))

    def test_bound_zero_in_q(self):
        with pytest.raises(ZeroInQ):
            kl_upper_bound(Dist({0: 0.5, 1: 0.5}), Dist({0: 1.0, 1: 0.0}))


@settings(max_examples=300, deadline=None)
@given(dist_pairs())
def test_kl_upper_bound_dominates(pq):
    p, q = pq
    kl = kl_divergence(p, q)
    assert kl >= 0.0
    assert kl <= kl_upper_bound(p, q) + 1e-9


class TestBinaryEntropy:
    def test_half(self):
        assert binary_entropy(0.5) == 1.0

    def test_ends(self):
        assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0

    def test_eta_for_quarter_advantage(self):
        assert 1 - binary_entropy(0.75) == pytest.approx(0.18872187554086717, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            binary_entropy(1.2)

    @given(st.floats(0, 1))
    def test_symmetry(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)
