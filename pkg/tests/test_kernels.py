"""Kernel structure: validation, reachability, irreducibility, reversal,
and the four-route strict-irreducibility decision."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stepskew as sk
from conftest import spec_of

GEN = sk.GeneratorConfig(seed=1111, n_states=(2, 6), sparsity=2.5, degenerate_bias=0.35)


# ---------------------------------------------------------------------------
# validate_spec
# ---------------------------------------------------------------------------
def test_validate_period2(period2_spec):
    assert period2_spec.n == 2
    assert period2_spec.support_set == {0, 1}


def test_validate_one_state_identity():
    spec = spec_of([[1.0]], [1.0])
    assert spec.support_set == {0}


def test_validate_rejects_non_invariant():
    # residual of the invariance equation is 0.8, far over tolerance
    with pytest.raises(sk.NotInvariant):
        spec_of([[0.0, 1.0], [1.0, 0.0]], [0.9, 0.1])


def test_validate_dimension_mismatch():
    with pytest.raises(sk.DimensionMismatch):
        sk.validate_spec(
            sk.StochasticMatrix.from_rows([[0.0, 1.0], [1.0, 0.0]]),
            sk.ProbVector.from_values([1.0]),
        )


def test_row_not_stochastic_names_row():
    with pytest.raises(sk.RowNotStochastic) as err:
        sk.StochasticMatrix.from_rows([[1.0, 0.0], [0.5, 0.4]])
    assert err.value.row == 1
    assert err.value.deviation == pytest.approx(0.1)


def test_ingestion_snaps_tiny_entries():
    sm = sk.StochasticMatrix.from_rows([[1e-13, 1.0 - 1e-13], [1.0, 0.0]])
    assert sm.values[0, 0] == 0.0
    assert not sm.pattern[0, 0]
    assert sm.values[0].sum() == pytest.approx(1.0, abs=1e-15)


def test_support_closure_asserted():
    # m puts no mass on state 1 but state 0 feeds it: not invariant
    with pytest.raises(sk.NotInvariant):
        spec_of([[0.5, 0.5], [0.0, 1.0]], [1.0, 0.0])


def test_negative_entries_rejected():
    with pytest.raises(sk.ValidationError):
        sk.ProbVector.from_values([1.5, -0.5])
    with pytest.raises(sk.ValidationError):
        sk.StochasticMatrix.from_rows([[1.1, -0.1], [0.5, 0.5]])


def test_non_square_kernel_rejected():
    with pytest.raises(sk.DimensionMismatch):
        sk.StochasticMatrix.from_rows([[0.5, 0.5]])


def test_prob_vector_sum_tolerance():
    with pytest.raises(sk.ValidationError):
        sk.ProbVector.from_values([0.7, 0.7])
    v = sk.ProbVector.from_values([0.3333333333, 0.3333333333, 0.3333333333])
    assert v.values.sum() == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# stationary_distribution
# ---------------------------------------------------------------------------
def test_stationary_period2():
    sm = sk.StochasticMatrix.from_rows([[0.0, 1.0], [1.0, 0.0]])
    m = sk.stationary_distribution(sm)
    assert np.allclose(m.values, [0.5, 0.5], atol=1e-12)


def test_stationary_refuses_identity():
    sm = sk.StochasticMatrix.from_rows([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(sk.MultipleStationary):
        sk.stationary_distribution(sm)


def test_stationary_symmetric():
    sm = sk.StochasticMatrix.from_rows([[0.5, 0.5], [0.5, 0.5]])
    m = sk.stationary_distribution(sm)
    assert np.allclose(m.values, [0.5, 0.5], atol=1e-12)


def test_stationary_with_transient_state():
    # both states jump to 0, so m = (1, 0) and state 1 is transient
    sm = sk.StochasticMatrix.from_rows([[1.0, 0.0], [1.0, 0.0]])
    m = sk.stationary_distribution(sm)
    assert np.allclose(m.values, [1.0, 0.0], atol=1e-12)


# ---------------------------------------------------------------------------
# kernel_product
# ---------------------------------------------------------------------------
def test_product_involution():
    p = sk.StochasticMatrix.from_rows([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(sk.kernel_product(p, p).values, np.eye(2))


def test_product_identity_law():
    p = sk.StochasticMatrix.from_rows([[0.3, 0.7], [0.6, 0.4]])
    ident = sk.StochasticMatrix.from_rows(np.eye(2))
    assert np.allclose(sk.kernel_product(p, ident).values, p.values)


def test_product_hand_multiplied():
    a = sk.StochasticMatrix.from_rows([[0.5, 0.5], [0.0, 1.0]])
    assert np.allclose(sk.kernel_product(a, a).values, [[0.25, 0.75], [0.0, 1.0]])


def test_product_dimension_mismatch():
    a = sk.StochasticMatrix.from_rows([[1.0]])
    b = sk.StochasticMatrix.from_rows(np.eye(2))
    with pytest.raises(sk.DimensionMismatch):
        sk.kernel_product(a, b)


# ---------------------------------------------------------------------------
# reach_set
# ---------------------------------------------------------------------------
def test_reach_period2(period2_spec):
    rep = sk.reach_set(period2_spec, {0})
    assert rep.u_set == {0, 1}
    assert rep.per_step[0] == frozenset({1})
    assert rep.per_step[1] == frozenset({0})
    assert frozenset().union(*rep.per_step) == rep.u_set


def test_reach_empty_target(period2_spec):
    assert sk.reach_set(period2_spec, set()).u_set == frozenset()


def test_reach_identity_kernel():
    spec = spec_of(np.eye(2), [0.5, 0.5])
    assert sk.reach_set(spec, {0}).u_set == {0}


@given(st.integers(min_value=0, max_value=300))
@settings(max_examples=60, deadline=None)
def test_reach_positive_mass_and_closure(idx):
    spec = sk.generate_spec(GEN, index=idx)
    supp = sorted(spec.support_set)
    rng = np.random.default_rng(idx)
    b = {int(y) for y in rng.choice(supp, size=rng.integers(1, len(supp) + 1), replace=False)}
    rep = sk.reach_set(spec, b)
    assert spec.m.mass(rep.u_set) > 0
    # no structural escape from outside U into U
    outside = spec.support_set - rep.u_set
    for y in outside:
        assert not any(int(z) in rep.u_set for z in spec.kernel.row_support(int(y)))


# ---------------------------------------------------------------------------
# is_irreducible
# ---------------------------------------------------------------------------
def test_irreducible_period2(period2_spec):
    assert sk.is_irreducible(period2_spec)


def test_irreducible_identity_false():
    assert not sk.is_irreducible(spec_of(np.eye(2), [0.5, 0.5]))


def test_irreducible_two_components_false():
    spec = spec_of(
        [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]], [0.25, 0.25, 0.5]
    )
    assert not sk.is_irreducible(spec)


def _has_nontrivial_absorbing(spec):
    """Brute force: a set with 0 < m(B) < 1 whose rows stay inside it."""
    supp = sorted(spec.support_set)
    masks = {y: {int(z) for z in spec.kernel.row_support(y)} for y in supp}
    for sub in range(1, (1 << len(supp)) - 1):
        b = {supp[k] for k in range(len(supp)) if sub >> k & 1}
        if all(masks[y] <= b for y in b):
            return True
    return False


@given(st.integers(min_value=0, max_value=400))
@settings(max_examples=60, deadline=None)
def test_irreducibility_matches_absorbing_search(idx):
    spec = sk.generate_spec(GEN, index=idx)
    assert sk.is_irreducible(spec) == (not _has_nontrivial_absorbing(spec))


# ---------------------------------------------------------------------------
# reverse_kernel
# ---------------------------------------------------------------------------
def test_reverse_doubly_stochastic_is_transpose():
    rows = [[0.2, 0.5, 0.3], [0.5, 0.3, 0.2], [0.3, 0.2, 0.5]]
    spec = spec_of(rows, [1 / 3] * 3)
    assert np.allclose(sk.reverse_kernel(spec).values, np.array(rows).T)


def test_reverse_period2_fixed(period2_spec):
    assert np.allclose(
        sk.reverse_kernel(period2_spec).values, period2_spec.kernel.values
    )


def test_reverse_formula_evaluation():
    spec = spec_of([[0.5, 0.5], [1.0, 0.0]], [2 / 3, 1 / 3])
    assert np.allclose(sk.reverse_kernel(spec).values, [[0.5, 0.5], [1.0, 0.0]])


@given(st.integers(min_value=0, max_value=400))
@settings(max_examples=60, deadline=None)
def test_reverse_involution_and_invariance(idx):
    spec = sk.generate_spec(GEN, index=idx)
    rev = sk.reverse_kernel(spec)
    # m stays invariant
    assert np.abs(spec.m.values @ rev.values - spec.m.values).max() <= 1e-9
    supp = spec.support
    back = sk.reverse_kernel(sk.validate_spec(rev, spec.m))
    # involution holds in the mass-weighted (almost-everywhere) sense; the
    # unweighted gap can reach the stationarity residual divided by the
    # smallest positive mass
    weighted = spec.m.values[:, None] * (back.values - spec.kernel.values)
    assert np.abs(weighted[np.ix_(supp, supp)]).max() <= 1e-9
    assert np.allclose(
        back.values[np.ix_(supp, supp)],
        spec.kernel.values[np.ix_(supp, supp)],
        atol=1e-6,
    )


# ---------------------------------------------------------------------------
# sim classes / dual classes
# ---------------------------------------------------------------------------
def test_sim_classes_period2(period2_spec):
    assert sk.sim_classes(period2_spec).blocks == (frozenset({0}), frozenset({1}))
    assert sk.dual_sim_classes(period2_spec).blocks == (frozenset({0}), frozenset({1}))


def test_sim_classes_bernoulli_single():
    spec = sk.trivial_kernel(sk.ProbVector.from_values([0.25, 0.25, 0.5]))
    assert sk.sim_classes(spec).trivial
    assert sk.dual_sim_classes(spec).trivial


def test_sim_classes_identity_singletons():
    spec = spec_of(np.eye(3), [1 / 3] * 3)
    assert sk.sim_classes(spec).n_blocks == 3


def test_dual_sim_one_point_support():
    spec = spec_of([[1.0, 0.0], [1.0, 0.0]], [1.0, 0.0])
    assert sk.dual_sim_classes(spec).blocks == (frozenset({0}),)
    assert sk.sim_classes(spec).blocks == (frozenset({0}),)


# ---------------------------------------------------------------------------
# strict irreducibility
# ---------------------------------------------------------------------------
def test_strict_period2_false(period2_spec):
    assert not sk.is_strictly_irreducible(period2_spec)


def test_strict_trivial_kernel_true():
    spec = sk.trivial_kernel(sk.ProbVector.from_values([0.2, 0.3, 0.5]))
    assert sk.is_strictly_irreducible(spec)


def test_strict_one_state_true():
    assert sk.is_strictly_irreducible(spec_of([[1.0]], [1.0]))


def test_strict_cyclic_overlap_true():
    # brute-force enumeration finds only the trivial deterministic sets
    spec = spec_of(
        [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]], [1 / 3] * 3
    )
    assert sk.brute_force_deterministic_sets(spec) == [
        frozenset(),
        frozenset({0, 1, 2}),
    ]
    assert sk.is_strictly_irreducible(spec)


@given(st.integers(min_value=0, max_value=2000))
@settings(max_examples=150, deadline=None)
def test_four_routes_agree(idx):
    spec = sk.generate_spec(GEN, index=idx)
    routes = sk.strict_irreducibility_routes(spec)
    assert len(set(routes.values())) == 1
    assert sk.is_strictly_irreducible(spec) == routes["sim"]


@given(st.integers(min_value=0, max_value=2000))
@settings(max_examples=100, deadline=None)
def test_strict_implies_irreducible(idx):
    spec = sk.generate_spec(GEN, index=idx)
    if sk.is_strictly_irreducible(spec):
        assert sk.is_irreducible(spec)


@given(st.integers(min_value=0, max_value=800))
@settings(max_examples=50, deadline=None)
def test_strict_depends_only_on_pattern(idx):
    spec = sk.generate_spec(GEN, index=idx)
    before = sk.is_strictly_irreducible(spec)
    rng = np.random.default_rng(idx + 31)
    values = spec.kernel.values.copy()
    jitter = rng.uniform(0.5, 2.0, size=values.shape)
    raw = np.where(values > 0, values * jitter, 0.0)
    perturbed = sk.StochasticMatrix.from_rows(raw / raw.sum(axis=1, keepdims=True))
    assert (perturbed.pattern == spec.kernel.pattern).all()
    try:
        m2 = sk.stationary_distribution(perturbed)
    except sk.MultipleStationary:
        return  # cannot re-solve uniquely; property only pinned for that case
    if m2.support_set != spec.support_set:
        return
    assert sk.is_strictly_irreducible(sk.validate_spec(perturbed, m2)) == before


# ---------------------------------------------------------------------------
# deterministic sets
# ---------------------------------------------------------------------------
def test_deterministic_check_period2(period2_spec):
    assert sk.deterministic_check(period2_spec, {0})
    assert sk.deterministic_check(period2_spec, set())
    assert sk.deterministic_check(period2_spec, {0, 1})


def test_deterministic_check_bernoulli_straddles():
    spec = sk.trivial_kernel(sk.ProbVector.from_values([0.5, 0.5]))
    assert not sk.deterministic_check(spec, {0})


def test_deterministic_sets_period2(period2_spec):
    fam = sk.deterministic_sets(period2_spec)
    assert fam.complete
    assert set(fam.sets) == {
        frozenset(),
        frozenset({0}),
        frozenset({1}),
        frozenset({0, 1}),
    }


def test_deterministic_sets_strictly_irreducible_trivial():
    spec = sk.trivial_kernel(sk.ProbVector.from_values([0.2, 0.8]))
    fam = sk.deterministic_sets(spec)
    assert set(fam.sets) == {frozenset(), frozenset({0, 1})}


def test_deterministic_sets_identity_two_states():
    spec = spec_of(np.eye(2), [0.5, 0.5])
    assert len(sk.deterministic_sets(spec).sets) == 4


@given(st.integers(min_value=0, max_value=1500))
@settings(max_examples=100, deadline=None)
def test_deterministic_sets_match_brute_force(idx):
    spec = sk.generate_spec(GEN, index=idx)
    fam = sk.deterministic_sets(spec)
    assert fam.complete
    assert set(fam.sets) == set(sk.brute_force_deterministic_sets(spec))


@given(st.integers(min_value=0, max_value=1500))
@settings(max_examples=60, deadline=None)
def test_deterministic_check_matches_definition(idx):
    spec = sk.generate_spec(GEN, index=idx)
    supp = sorted(spec.support_set)
    rng = np.random.default_rng(idx + 7)
    for _ in range(8):
        size = int(rng.integers(0, len(supp) + 1))
        b = frozenset(int(v) for v in rng.choice(supp, size=size, replace=False))
        # oracle: row-by-row containment straight from the definition
        expected = True
        for y in supp:
            row = {int(z) for z in spec.kernel.row_support(y)}
            if row & b and not row <= b:
                expected = False
        assert sk.deterministic_check(spec, b) == expected


def test_deterministic_sets_blocks_only_when_capped():
    # 24 isolated states -> 24 singleton classes, over the enumeration cap
    n = 24
    spec = spec_of(np.eye(n), np.full(n, 1.0 / n))
    fam = sk.deterministic_sets(spec)
    assert not fam.complete
    assert len(fam.sets) == n
