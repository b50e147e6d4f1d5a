import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import rationals, step_functions
from oracles import identity_block_solve
from nonneg_basis.basis import (
    IDENTITY,
    Expansion,
    Permutation,
    SchauderBasis,
    analyze,
    basis_constant_profile,
    block,
    is_admissible,
    partial_sum,
    pi_default,
    synthesize,
)
from nonneg_basis.haar import HaarIndex, global_to_index, haar_fn
from nonneg_basis.stepfn import StepFunction, linear_combination, norm_1

F = Fraction


def e(m):
    return StepFunction.indicator(m - 1, m)


def test_pi_default_and_admissibility():
    assert pi_default(1) == 1
    assert is_admissible(pi_default, 10_000)
    swap = Permutation.from_prefix([2, 1])
    result = is_admissible(swap, 5)
    assert not result and result.witness == 1


def test_identity_satisfies_host_constraint_by_closed_form():
    # g = (s-1)(s-2)/2 + j with s >= 3 for g > 1, hence g > j
    for g in range(2, 10_001):
        assert g > global_to_index(g).j


def test_admissibility_failures():
    shift = Permutation.from_prefix([1, 3, 2])  # pi(3) = 2 = j(3)
    result = is_admissible(shift, 3)
    assert not result and result.witness == 3
    assert not is_admissible(lambda i: 1, 2)


def test_block_examples():
    b1 = block(1)
    assert b1.u == StepFunction.indicator(0, 1, 3)
    assert b1.x.values == (4, 2) and (b1.x.support_len, b1.x.resolution) == (1, 1)
    assert b1.y.values == (2, 4)
    b2 = block(2)
    assert b2.haar == HaarIndex(1, 1, 1) and b2.pi_i == 2
    assert b2.x.values == (4, 0, 0, 0, 2, 2, 2, 2)
    assert norm_1(b2.x) == 3


def test_block_invariants():
    for i in range(1, 101):
        b = block(i)
        h = haar_fn(b.haar)
        assert b.u == linear_combination([(2, e(b.pi_i)), (1, abs(h))])
        assert b.x.is_nonnegative() and b.y.is_nonnegative()
        assert norm_1(b.x) == norm_1(b.y) == 3
        assert (b.x + b.y) * F(1, 2) == b.u
        assert (b.x - b.y) * F(1, 2) == h


def test_analyze_examples():
    ex = analyze(e(1))
    assert ex.blocks == {1: (F(1, 3), 0)}
    assert ex.alpha(1) == ex.beta(1) == F(1, 6)

    ex = analyze(haar_fn(HaarIndex(1, 0, 1)))
    assert ex.blocks == {1: (0, 1)}
    assert (ex.alpha(1), ex.beta(1)) == (F(1, 2), F(-1, 2))

    # e_2 = (u_2 - e_1 - h^1_{0,1}) / 2
    ex = analyze(e(2))
    assert ex.blocks == {2: (F(1, 2), 0), 1: (F(-1, 6), F(-1, 2))}


def test_synthesize_examples():
    assert synthesize(Expansion({1: (F(1, 3), 0)})) == e(1)
    assert synthesize(Expansion({1: (0, 1)})) == haar_fn(HaarIndex(1, 0, 1))


def test_expansion_invariants():
    ex = Expansion({3: (F(2, 7), F(-5, 3)), 8: (1, 1)})
    for i in ex.blocks:
        b = block(i)
        left = linear_combination([(ex.a(i), b.u), (ex.b(i), haar_fn(b.haar))])
        right = linear_combination([(ex.alpha(i), b.x), (ex.beta(i), b.y)])
        assert left == right
    assert Expansion.from_schauder(ex.schauder()) == ex
    assert Expansion.from_json(ex.to_json()) == ex
    assert ex.to_json()["schauder"][0] == {"k": 5, "coeff": _fmt(ex.alpha(3))}


def _fmt(q):
    return f"{q.numerator}/{q.denominator}"


def test_roundtrip_random():
    rng = random.Random(5)
    for _ in range(200):
        J, r = rng.randint(1, 6), rng.randint(0, 6)
        f = StepFunction(J, r, [F(rng.randint(-64, 64), rng.randint(1, 64)) for _ in range(J << r)])
        assert synthesize(analyze(f)) == f


@pytest.mark.parametrize("k", [1, 2, 5, 17, 60])
def test_biorthogonality(k):
    b = block(k)
    assert analyze(b.x).schauder() == {2 * k - 1: 1}
    assert analyze(b.y).schauder() == {2 * k: 1}


@settings(max_examples=40, deadline=None)
@given(step_functions(), step_functions(), rationals)
def test_analyze_is_linear(f, g, c):
    assert analyze(c * f + g) == analyze(f).scaled(c) + analyze(g)


def test_dense_oracle_agreement_small():
    rng = random.Random(3)
    M = 6
    for _ in range(10):
        terms = [(F(rng.randint(-9, 9), rng.randint(1, 9)), e(m)) for m in range(1, M + 1)]
        terms += [(F(rng.randint(-9, 9), rng.randint(1, 9)), haar_fn(global_to_index(i)))
                  for i in range(1, M + 1)]
        f = linear_combination(terms)
        assert analyze(f).blocks == identity_block_solve(f, M)


def test_partial_sum_examples():
    f = e(1)
    assert partial_sum(f, 1) == block(1).x * F(1, 6)
    assert partial_sum(f, 1) != f
    assert partial_sum(f, 2) == f
    assert partial_sum(f, 0) == StepFunction.zero()


def test_profile_of_second_indicator():
    # S_1 = -(1/3) x_1, S_2 = -1_(0,1/2), S_3 = S_2 + (1/4) x_2, S_4 = f
    f = e(2)
    assert basis_constant_profile(f) == [1, F(1, 2), F(3, 4), 1]
    assert partial_sum(f, 1) == block(1).x * F(-1, 3)
    assert partial_sum(f, 2) == StepFunction.indicator(0, F(1, 2), -1)
    assert basis_constant_profile(f, 6) == [1, F(1, 2), F(3, 4), 1, 1, 1]


def test_profile_matches_partial_sums():
    rng = random.Random(9)
    f = StepFunction(2, 2, [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(8)])
    profile = basis_constant_profile(f)
    for K in range(1, len(profile) + 1):
        assert profile[K - 1] == norm_1(partial_sum(f, K)) / norm_1(f)


def test_profile_of_basis_element():
    x3 = block(3).x
    assert partial_sum(x3, 6) == x3
    assert basis_constant_profile(x3)[-1] == 1


def test_zero_profile_rejected():
    with pytest.raises(ValueError):
        basis_constant_profile(StepFunction.zero())


def test_custom_permutation():
    # pi(3) = 2 equals j(3) = 2, so the indicator recursion would not descend
    bad = Permutation.from_prefix([1, 3, 2])
    with pytest.raises(ValueError):
        SchauderBasis(bad).analyze(e(2))

    images = list(range(1, 11))
    images[3], images[4] = images[4], images[3]  # pi(4) = 5, pi(5) = 4 > j(5) = 2
    perm = Permutation.from_prefix(images, "swap45")
    assert is_admissible(perm, 50)
    basis = SchauderBasis(perm)
    assert basis.block(4).pi_i == 5
    rng = random.Random(1)
    for _ in range(20):
        f = StepFunction(6, 2, [F(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(24)])
        ex = basis.analyze(f)
        assert ex.permutation == "swap45"
        assert basis.synthesize(ex) == f


def test_identity_name():
    assert IDENTITY.name == "identity"
    assert analyze(e(1)).to_json()["permutation"] == "identity"
