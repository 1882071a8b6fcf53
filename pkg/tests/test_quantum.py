import random
from fractions import Fraction

import pytest

from bvcat import bvintegral as bi
from bvcat import formal as fm
from bvcat import generators as gen
from bvcat import graded as gr
from bvcat import linalg as la
from bvcat import quantum as qu
from bvcat import symplectic as sy
from bvcat.densities import Prefactor, half_density
from bvcat.errors import (
    Degenerate, MalformedAction, NonComposable, NotOrthogonal, SourceTargetMismatch,
)
from bvcat.formal import INF, FormalFunction
from bvcat.graded import GradedSpace, Subspace
from bvcat.verify import random_quantum_algebra


def nondegenerate_reduction(rng, S):
    return gen.random_reduction(rng, S.space, gen.random_nondegenerate_isotrope(rng, S.dg))


def random_coisotropic_relation(rng, U, W):
    amb = sy.Relation(U, W, Subspace.zero(gr.product(U.space, W.space))).ambient
    dims = {k: rng.randint(0, 1) for k in set(amb.degrees)}
    I = gen.random_isotrope(rng, amb, dims) or Subspace.zero(amb.space)
    return sy.Relation(U, W, sy.symp_complement(I, amb))


def random_genlag(rng, U, W, degree=None, w_max=4):
    C = random_coisotropic_relation(rng, U, W)
    R = sy.reduced_space(C)
    dg = gen.random_dg_structure(rng, R, acyclic_pairs=rng.randint(0, 2))
    f = gen.random_function(rng, R.space, w_max, degree=degree, density=0.3, max_terms=8)
    if degree is not None and f.is_zero():
        f = FormalFunction.constant(R.space, 1, w_max) if degree == 0 else f
    rho = half_density(R.space, Prefactor(Fraction(rng.randint(1, 4))))
    return qu.GeneralizedLagrangian(C, f, rho, dg.s_free)


def same_genlag(G, H):
    return (
        sy.relation_equal(G.relation, H.relation)
        and G.function.equal_upto(H.function)
        and G.density.coefficient == H.density.coefficient
        and G.s_free == H.s_free
    )


# -------------------------------------------------------------- actions


def test_action_shape_is_validated():
    V = sy.shifted_cotangent(GradedSpace((0,)))
    with pytest.raises(MalformedAction):
        qu.QuantumLInfty(V, FormalFunction(V.space, {((), 1): 1}, 4))  # S^1_0
    with pytest.raises(MalformedAction):
        qu.QuantumLInfty(V, FormalFunction(V.space, {((1,), 0): 1}, 4))  # S^0_1
    with pytest.raises(MalformedAction):
        qu.QuantumLInfty(V, FormalFunction(V.space, {((0,), 0): 1}, 4))  # degree -1


def test_quadratic_action_solves_the_master_equation():
    dg = gen.random_dg_space(random.Random(1), dim_base=3, acyclic_pairs=2)
    S = qu.quadratic_action(dg, 6)
    for form in ("decomposed", "full", "exponential"):
        assert qu.check_qme(S, form).holds


def chevalley_eilenberg(structure):
    """``1/2 f^k_ij xi_k c^i c^j`` on ``T*[1](g[1])`` for a three-dimensional Lie algebra."""
    V = sy.shifted_cotangent(GradedSpace((-1, -1, -1)))
    terms = []
    for (i, j), out in structure.items():
        for k, c in out.items():
            # fibre coordinate k, base coordinates 3 + i, 3 + j
            terms.append(((k, 3 + i, 3 + j), Fraction(c, 2)))
            terms.append(((k, 3 + j, 3 + i), Fraction(-c, 2)))
    return qu.QuantumLInfty(V, FormalFunction(V.space, [((idx, 0), c) for idx, c in terms], 4))


def test_unimodular_lie_algebra_solves_the_master_equation():
    heisenberg = {(0, 1): {2: 1}}  # [e0, e1] = e2
    S = chevalley_eilenberg(heisenberg)
    assert S.s_free.is_zero()
    assert qu.check_qme(S).holds and qu.check_qme(S, "full").holds


def test_non_unimodular_lie_algebra_fails_only_through_delta():
    affine = {(0, 1): {1: 1}}  # [e0, e1] = e1 has trace(ad e0) = 1
    S = chevalley_eilenberg(affine)
    V = S.space
    assert fm.bracket(S.action, S.action, V).is_zero()
    assert not fm.laplacian(S.action, V).is_zero()
    assert not qu.check_qme(S).holds


def breaking_perturbation(S, weight):
    V = S.space
    for key in qu._allowed_monomials(V.space, weight):
        m = FormalFunction(V.space, {key: 1}, S.w_max)
        if not (fm.bracket(S.s_free, m, V) + fm.hbar_laplacian(m, V)).part(weight=weight).is_zero():
            return m
    return None


def test_weight_four_perturbation_breaks_the_master_equation():
    for seed in range(50):
        dg = gen.random_dg_space(random.Random(seed), dim_base=3, acyclic_pairs=2)
        S = qu.quadratic_action(dg, 5)
        m = breaking_perturbation(S, 4)
        if m is not None:
            break
    else:
        pytest.fail("no breaking perturbation found")
    assert qu.check_qme(S).holds
    report = qu.check_qme(qu.QuantumLInfty(S.space, S.action + m))
    assert not report.holds and 4 in report.residual.weights()


@pytest.mark.parametrize("seed", range(6))
def test_master_equation_forms_agree(seed):
    S = random_quantum_algebra(random.Random(seed), 5)
    assert all(qu.check_qme(S, f).holds for f in ("decomposed", "full", "exponential"))
    # a non-solution fails all three
    dg = gen.random_dg_space(random.Random(seed), dim_base=3, acyclic_pairs=2)
    Q = qu.quadratic_action(dg, 5)
    m = breaking_perturbation(Q, 4)
    if m is None:
        return
    bad = qu.QuantumLInfty(Q.space, Q.action + m)
    verdicts = {qu.check_qme(bad, f).holds for f in ("decomposed", "full", "exponential")}
    assert verdicts == {False}


# ------------------------------------------------------------- transfer


def test_transfer_along_identity():
    S = random_quantum_algebra(random.Random(3), 4)
    E = qu.effective_action(S, sy.identity(S.space))
    assert E.action.action == S.action
    assert E.vacuum.terms == {((), 0): 1}
    assert E.density.coefficient == Prefactor.one()


def test_transfer_of_a_free_action():
    rng = random.Random(4)
    dg = gen.random_dg_space(rng, dim_base=3, acyclic_pairs=2)
    S = qu.quadratic_action(dg, 4)
    L = nondegenerate_reduction(rng, S)
    E = qu.effective_action(S, L)
    assert E.action.s_int.is_zero()
    assert E.action.s_free == bi.fiber_integral(FormalFunction.constant(S.space.space, 1, 4), L, dg).s_free


def test_transfer_along_degenerate_kernel():
    V = sy.shifted_cotangent(GradedSpace((0,)))
    S = qu.QuantumLInfty(V, FormalFunction.zero(V.space, 4))
    L = sy.Relation(V, sy.SYMP_POINT, Subspace.span(V.space, [(0, 1)]))
    with pytest.raises(Degenerate) as e:
        qu.effective_action(S, L)
    assert isinstance(e.value, NonComposable)


@pytest.mark.parametrize("seed", range(8))
def test_transfer_preserves_the_master_equation(seed):
    rng = random.Random(seed)
    S = random_quantum_algebra(rng, 5, dim_base=2)
    L = nondegenerate_reduction(rng, S)
    E = qu.effective_action(S, L)
    assert qu.check_qme(E.action).holds
    assert min(E.action.s_int.hbar_powers(), default=0) >= 0
    assert E.action.action.equal_upto(qu.effective_action(S, L, route="hpl").action.action)


# --------------------------------------------------------- certificates


@pytest.mark.parametrize("seed", range(5))
def test_transferred_algebra_is_related(seed):
    rng = random.Random(seed)
    S = random_quantum_algebra(rng, 4)
    L = nondegenerate_reduction(rng, S)
    E = qu.effective_action(S, L)
    cert = qu.check_relation(S, E.action, L)
    assert cert.verdict
    assert sy.kernel(cert.cospan.right).is_zero() and sy.is_reduction(cert.cospan.right)
    assert cert.ratio == E.density.coefficient


def test_degenerate_kernel_fails_the_first_condition():
    V = sy.shifted_cotangent(GradedSpace((0,)))
    S = qu.QuantumLInfty(V, FormalFunction.zero(V.space, 4))
    P = qu.QuantumLInfty(sy.SYMP_POINT, FormalFunction.zero(GradedSpace(()), 4))
    L = sy.Relation(V, sy.SYMP_POINT, Subspace.span(V.space, [(0, 1)]))
    cert = qu.check_relation(S, P, L)
    assert not cert.nondegenerate and not cert.verdict


def test_perturbed_free_action_fails_the_second_condition():
    for seed in range(40):
        rng = random.Random(seed)
        S = random_quantum_algebra(rng, 4)
        L = nondegenerate_reduction(rng, S)
        E = qu.effective_action(S, L)
        if any(not la.is_zero(r) for r in E.fiber.Q):
            break
    else:
        pytest.fail("no reduction with a residual differential found")
    A = E.action
    doubled = qu.QuantumLInfty(A.space, A.s_free.with_w_max(A.w_max).scale(2) + A.s_int)
    cert = qu.check_relation(S, doubled, L)
    assert cert.nondegenerate and not cert.differentials_equal and not cert.verdict


def test_compose_with_identity_certificate():
    rng = random.Random(6)
    S = random_quantum_algebra(rng, 4)
    L = nondegenerate_reduction(rng, S)
    E = qu.effective_action(S, L).action
    c1 = qu.check_relation(S, E, L)
    c2 = qu.check_relation(E, E, sy.identity(E.space))
    c = qu.compose_relations(c1, c2)
    assert c.verdict and sy.relation_equal(c.relation, L) and c.ratio == c1.ratio


@pytest.mark.parametrize("seed", range(5))
def test_composed_certificate_is_independently_verified(seed):
    rng = random.Random(seed)
    S = random_quantum_algebra(rng, 4)
    L1 = nondegenerate_reduction(rng, S)
    E1 = qu.effective_action(S, L1).action
    L2 = nondegenerate_reduction(rng, E1)
    E2 = qu.effective_action(E1, L2).action
    c = qu.compose_relations(qu.check_relation(S, E1, L1), qu.check_relation(E1, E2, L2))
    d = qu.check_relation(S, E2, c.relation)
    assert c.verdict and d.verdict
    assert c.ratio == d.ratio and c.vacuum_ratio.equal_upto(d.vacuum_ratio)


def non_orthogonal_span(max_seed=200):
    """A free algebra with two non-degenerate reductions whose kernels pair non-trivially."""
    for seed in range(max_seed):
        rng = random.Random(seed)
        dg = gen.random_dg_space(rng, dim_base=3, acyclic_pairs=2)
        S = qu.quadratic_action(dg, 4)
        I = gen.random_nondegenerate_isotrope(rng, S.dg)
        J = gen.random_nondegenerate_isotrope(rng, S.dg)
        if I.is_zero() or J.is_zero():
            continue
        L, Lt = gen.random_reduction(rng, S.space, I), gen.random_reduction(rng, S.space, J)
        if not sy.orthogonal_span(L, Lt):
            return S, L, Lt
    raise AssertionError("no non-orthogonal span found")


def test_non_orthogonal_composition_is_refused():
    S, L, Lt = non_orthogonal_span()
    R = qu.effective_action(S, L).action
    Rt = qu.effective_action(S, Lt).action
    c1 = qu.check_relation(R, S, sy.transpose(L))
    c2 = qu.check_relation(S, Rt, Lt)
    assert c1.verdict and c2.verdict
    with pytest.raises(NotOrthogonal):
        qu.compose_relations(c1, c2)


def test_failed_certificates_do_not_compose():
    V = sy.shifted_cotangent(GradedSpace((0,)))
    S = qu.QuantumLInfty(V, FormalFunction.zero(V.space, 4))
    P = qu.QuantumLInfty(sy.SYMP_POINT, FormalFunction.zero(GradedSpace(()), 4))
    bad = qu.check_relation(S, P, sy.Relation(V, sy.SYMP_POINT, Subspace.span(V.space, [(0, 1)])))
    with pytest.raises(NonComposable):
        qu.compose_relations(bad, bad)


# ------------------------------------------------- generalized Lagrangians


def test_delta_of_trivial_generalized_lagrangian():
    rng = random.Random(7)
    L = gen.random_lagrangian_relation(rng, GradedSpace((0,)), GradedSpace((0, 1)), 1)
    G = qu.lagrangian_genlag(L, 4)
    assert qu.hbar_delta(G).function.is_zero()


@pytest.mark.parametrize("seed", range(6))
def test_delta_squares_to_zero(seed):
    rng = random.Random(seed)
    _, U = gen.random_cotangent_space(rng, rng.randint(0, 1))
    _, W = gen.random_cotangent_space(rng, rng.randint(1, 2))
    G = random_genlag(rng, U, W, w_max=5)
    assert qu.hbar_delta(qu.hbar_delta(G)).function.is_zero()


@pytest.mark.parametrize("seed", range(4))
def test_algebra_gives_closed_morphism(seed):
    S = random_quantum_algebra(random.Random(seed), 4)
    assert qu.hbar_delta(qu.point_genlag(S)).function.is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_identity_is_a_unit_for_generalized_lagrangians(seed):
    rng = random.Random(seed)
    _, U = gen.random_cotangent_space(rng, rng.randint(0, 1))
    _, W = gen.random_cotangent_space(rng, rng.randint(1, 2))
    G = random_genlag(rng, U, W)
    assert same_genlag(qu.compose_genlag(G, qu.identity_genlag(W, 4)), G)
    assert same_genlag(qu.compose_genlag(qu.identity_genlag(U, 4), G), G)


@pytest.mark.parametrize("seed", range(5))
def test_lagrangian_relations_compose_as_relations(seed):
    rng = random.Random(seed)
    L1 = gen.random_lagrangian_relation(rng, GradedSpace((0,)), GradedSpace((0, 1)), 1)
    L2 = gen.random_lagrangian_relation(rng, GradedSpace((0, 1)), GradedSpace((0,)), rng.randint(0, 1))
    G = qu.compose_genlag(qu.lagrangian_genlag(L1, 4), qu.lagrangian_genlag(L2, 4))
    assert same_genlag(G, qu.lagrangian_genlag(sy.compose(L1, L2), 4))


def composable_pairs(count, U_dim=(0, 1), seed0=0):
    found = 0
    seed = seed0
    while found < count:
        rng = random.Random(seed)
        seed += 1
        _, U = gen.random_cotangent_space(rng, rng.randint(*U_dim))
        _, V = gen.random_cotangent_space(rng, rng.randint(1, 2))
        a = rng.randint(-1, 1)
        G1 = random_genlag(rng, U, V, degree=a)
        G2 = random_genlag(rng, V, sy.SYMP_POINT if U.dim == 0 else U)
        try:
            qu.compose_genlag(G1, G2)
        except NonComposable:
            continue
        found += 1
        yield G1, G2, a


def test_delta_is_a_derivation_across_composition():
    for G1, G2, a in composable_pairs(10):
        lhs = qu.hbar_delta(qu.compose_genlag(G1, G2)).function
        first = qu.compose_genlag(qu.hbar_delta(G1), G2).function
        second = qu.compose_genlag(G1, qu.hbar_delta(G2)).function
        rhs = first + second.scale(-1 if a % 2 else 1)
        assert lhs.equal_upto(rhs)


def test_delta_is_self_adjoint_for_the_pairing():
    for G1, G2, a in composable_pairs(8, U_dim=(0, 0), seed0=100):
        left = qu.pair_genlag(qu.hbar_delta(G1), G2)
        right = qu.pair_genlag(G1, qu.hbar_delta(G2))
        sign = 1 if a % 2 else -1
        assert left.series.equal_upto(right.series.scale(sign))
        assert left.prefactor == right.prefactor


def test_composition_is_associative():
    done = 0
    for seed in range(200):
        rng = random.Random(seed)
        Vs = [gen.random_cotangent_space(rng, rng.randint(0, 1))[1] for _ in range(4)]
        Gs = [random_genlag(rng, Vs[i], Vs[i + 1]) for i in range(3)]
        try:
            left = qu.compose_genlag(qu.compose_genlag(Gs[0], Gs[1]), Gs[2])
            right = qu.compose_genlag(Gs[0], qu.compose_genlag(Gs[1], Gs[2]))
        except NonComposable:
            continue
        assert sy.relation_equal(left.relation, right.relation)
        assert left.function.equal_upto(right.function)
        assert left.density.coefficient == right.density.coefficient
        assert left.s_free == right.s_free
        done += 1
        if done == 8:
            break
    assert done == 8


def test_pairing_of_transversal_lagrangians_is_one():
    V = sy.shifted_cotangent(GradedSpace((0, 1)))
    base = Subspace.span(V.space, [la.unit(4, 2), la.unit(4, 3)])
    fibre = Subspace.span(V.space, [la.unit(4, 0), la.unit(4, 1)])
    G1 = qu.lagrangian_genlag(sy.Relation(sy.SYMP_POINT, V, base), 4)
    G2 = qu.lagrangian_genlag(sy.Relation(V, sy.SYMP_POINT, fibre), 4)
    r = qu.pair_genlag(G1, G2)
    assert r.series == FormalFunction.constant(GradedSpace(()), 1, 4)


def test_pairing_with_a_lagrangian_is_the_bv_integral():
    for seed in range(100):
        rng = random.Random(seed)
        S = random_quantum_algebra(rng, 4)
        L = gen.random_nondegenerate_lagrangian(rng, S.dg, tries=20)
        if L is not None and not S.s_int.is_zero():
            break
    else:
        pytest.fail("no gauge-fixing Lagrangian found")
    r = qu.pair_genlag(qu.point_genlag(S), qu.lagrangian_genlag(sy.Relation(S.space, sy.SYMP_POINT, L), 4))
    direct = bi.bv_integral(qu._exp_interaction(S), L, S.dg)
    assert r.series.equal_upto(direct.series) and r.prefactor == direct.prefactor


def test_mismatched_generalized_lagrangians():
    V = sy.shifted_cotangent(GradedSpace((0,)))
    W = sy.shifted_cotangent(GradedSpace((1,)))
    with pytest.raises(SourceTargetMismatch):
        qu.compose_genlag(qu.identity_genlag(V, 4), qu.identity_genlag(W, 4))
