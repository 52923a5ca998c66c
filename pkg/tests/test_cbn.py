import math
import threading
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _nets import binding, birth_binding, gene, isomerization, net
from crnkit import cbn, network


def test_verify_exact_and_unbalanced():
    b = binding(3, 2)
    eq = cbn.verify_complex_balance(b, (F(1), F(1), F(3, 2)))
    assert eq.exact and all(r == 0 for r in eq.residuals)
    with pytest.raises(cbn.Unbalanced) as info:
        cbn.verify_complex_balance(b, (F(1), F(1), F(1)))
    assert info.value.complex in ((1, 1, 0), (0, 0, 1))
    with pytest.raises(ValueError):
        cbn.verify_complex_balance(b, (1, 1))
    with pytest.raises(ValueError):
        cbn.verify_complex_balance(b, (1, 0, 1))


def test_verify_with_tolerance_for_floats():
    cbn.verify_complex_balance(binding(3, 2), (1.0, 1.0, 1.5 + 1e-14), tol=1e-12)
    with pytest.raises(cbn.Unbalanced):
        cbn.verify_complex_balance(binding(3, 2), (1.0, 1.0, 1.5 + 1e-6), tol=1e-12)


def test_solve_binding_ratio():
    eq = cbn.solve_complex_balance(binding(3, 2))
    lam = eq.lam
    assert lam[2] / (lam[0] * lam[1]) == F(3, 2)


def test_solve_birth_binding_unit_rates():
    eq = cbn.solve_complex_balance(birth_binding())
    assert eq.lam == (1, 1, 1)


def test_solve_exact_when_exponents_are_fractional():
    # 0 <-> A, 2B <-> A, B <-> C; lambda = (2, 2, 2)
    n = net(["A", "B", "C"], [
        ((0, 0, 0), (1, 0, 0), 2), ((1, 0, 0), (0, 0, 0), 1),
        ((0, 2, 0), (1, 0, 0), 1), ((1, 0, 0), (0, 2, 0), 1),
        ((0, 1, 0), (0, 0, 1), 1), ((0, 0, 1), (0, 1, 0), 1),
    ])
    eq = cbn.solve_complex_balance(n)
    assert eq.exact and eq.lam == (2, 2, 2)


def test_no_certificate():
    with pytest.raises(cbn.NoCertificate):
        cbn.solve_complex_balance(net(["S1", "S2"], [((1, 0), (0, 1), 1)]))


def test_gene_network_is_not_complex_balanced():
    with pytest.raises(cbn.NoCertificate):
        cbn.solve_complex_balance(gene())


def test_binding_table_values():
    t = cbn.PartitionTable(network.conservation_basis(binding()), (F(1), F(1), F(1)))
    assert t.Z((2, 2)) == F(7, 4)
    assert t.Z((2, 0)) == F(1, 2) and t.Z((2, 1)) == F(3, 2)
    assert t.Z((-1, 2)) == 0
    assert cbn.enumerate_partition_function(t, (2, 2)) == F(7, 4)
    assert cbn.partition_function(t, (3, 1)) == cbn.enumerate_partition_function(t, (3, 1))
    assert sorted(t.fiber((2, 2))) == [(0, 0, 2), (1, 1, 1), (2, 2, 0)]
    with pytest.raises(ValueError):
        t.Z((1,))


def test_paper_recursion_check_and_mutation():
    for K in (F(1), F(2), F(1, 3)):
        t = cbn.PartitionTable(((1, 0, 1), (0, 1, 1)), (F(1), F(1), K))
        for p in range(6):
            for n in range(6):
                assert cbn.verify_paper_recursion(t, p, n)
    t = cbn.PartitionTable(((1, 0, 1), (0, 1, 1)), (F(1), F(1), F(2)))
    # wrong K in the recursion must be detected
    assert not cbn.verify_paper_recursion(t, 2, 1, K=F(3))


def test_free_species_and_empty_basis():
    t = cbn.PartitionTable(((0, 1, 1),), (F(5), F(1), F(1)))
    assert t.free == (0,) and t.constrained == (1, 2)
    assert t.unconstrained_factor == {0: F(5)}
    assert t.Z((3,)) == F(8, 6)
    empty = cbn.PartitionTable((), (F(2), F(3)))
    assert empty.Z(()) == 1 and empty.free == (0, 1)


def test_negative_law_is_not_finite():
    with pytest.raises(cbn.FiberNotFinite):
        cbn.PartitionTable(((1, -1),), (F(1), F(1)))


def test_two_state_distribution_and_empty_fiber():
    b = binding()
    basis = network.conservation_basis(b)
    dist = cbn.stationary_distribution(b, (F(1), F(1), F(1)), basis, (1, 1))
    assert dict(zip(dist.support, dist.probabilities)) == {(0, 0, 1): F(1, 2), (1, 1, 0): F(1, 2)}
    t = cbn.PartitionTable(((2, 0), (0, 2)), (F(1), F(1)))
    with pytest.raises(cbn.EmptyFiber):
        cbn.conditional_distribution(t, (1, 2))
    with pytest.raises(cbn.EmptyFiber):
        cbn.conditional_factorial_moment(t, (1, 2), 0, 1)
    with pytest.raises(cbn.EmptyFiber):
        cbn.first_fiber_state(t, (1, 2))
    with pytest.raises(cbn.Unbalanced):
        cbn.stationary_distribution(b, (F(1), F(1), F(2)), basis, (1, 1))


@pytest.mark.parametrize("beta, mu", [(10, F(1)), (6, F(3)), (5, F(1, 2))])
def test_isomerization_marginal_is_binomial(beta, mu):
    iso = isomerization(mu, 1)
    eq = cbn.solve_complex_balance(iso)
    dist = cbn.stationary_distribution(iso, eq.lam, network.conservation_basis(iso), (beta,))
    p = 1 / (1 + mu)
    assert dist.marginal(0) == {x: math.comb(beta, x) * p**x * (1 - p) ** (beta - x) for x in range(beta + 1)}


def test_birth_binding_marginals_and_free_species():
    bb = birth_binding()
    table = cbn.PartitionTable(network.conservation_basis(bb), (F(1), F(1), F(1)))
    assert cbn.conditional_marginal(table, (2,), 1) == {0: F(1, 4), 1: F(1, 2), 2: F(1, 4)}
    with pytest.raises(cbn.FiberNotFinite):
        cbn.conditional_marginal(table, (2,), 0)
    dist = cbn.conditional_distribution(table, (2,))
    assert dist.free == (0,) and dist.free_lam == (1,)
    assert dist.prob((7, 1, 1)) == F(1, 2)
    assert dist.expectation(lambda k: k[2]) == 1


def test_product_form_weight_and_residual():
    b = binding(2, 1)
    t = cbn.PartitionTable(network.conservation_basis(b), (F(1), F(1), F(2)))
    w = cbn.product_form_weight(t, (3, 2))
    assert sum(w(k) for k in t.fiber((3, 2))) == 1
    assert w((1, 1, 1)) == 0
    assert w((-1, 0, 3)) == 0
    for k in t.fiber((3, 2)):
        assert cbn.sscme_residual(b, w, k) == 0
    # an unbalanced lambda leaves a nonzero residual somewhere
    bad = cbn.product_form_weight(cbn.PartitionTable(t.rows, (F(1), F(1), F(3))), (3, 2))
    assert any(cbn.sscme_residual(b, bad, k) != 0 for k in t.fiber((3, 2)))


def test_concurrent_table_use_is_consistent():
    t = cbn.PartitionTable(((1, 0, 1), (0, 1, 1)), (F(1), F(2), F(3)))
    out = {}

    def work(i):
        out[i] = t.Z((6 + i % 3, 7))

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    fresh = cbn.PartitionTable(t.rows, t.lam)
    assert all(out[i] == fresh.Z((6 + i % 3, 7)) for i in range(8))


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.lists(st.integers(0, 2), min_size=3, max_size=3), min_size=1, max_size=2),
    st.lists(st.builds(F, st.integers(1, 9), st.integers(1, 4)), min_size=3, max_size=3),
    st.lists(st.integers(0, 4), min_size=2, max_size=2),
    st.integers(1, 2),
)
def test_factorial_moment_matches_fiber_sum(rows, lam, beta, r):
    t = cbn.PartitionTable(rows, lam)
    beta = beta[: len(rows)]
    if not t.constrained or t.Z(beta) == 0:
        return
    states = list(t.fiber(beta))
    weights = [t.weight(k) for k in states]
    Z = sum(weights)
    assert Z == t.Z(beta)
    for j in t.constrained:
        expected = sum(w * math.perm(k[j], r) for w, k in zip(weights, states)) / Z
        assert cbn.conditional_factorial_moment(t, beta, j, r) == expected
