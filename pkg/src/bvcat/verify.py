"""Seeded property suites behind ``bvcat verify``.

Each check takes a ``random.Random`` and returns ``None`` when the property
holds on the instance it drew, or a JSON-able description of the
counterexample otherwise. Every instance gets its own generator seeded by
suite, check, seed and instance index, so results do not depend on the
order of execution.
"""

import random

from . import bvintegral as bi
from . import densities as de
from . import formal as fm
from . import generators as gen
from . import graded as gr
from . import linalg as la
from . import quantum as qu
from . import symplectic as sy
from .errors import Degenerate, NonComposable, ObstructedQME
from .serialization import encode_function, encode_relation, encode_subspace, rat_str


def _random_lagrangian_relation(rng):
    U = gr.GradedSpace(tuple(rng.choice((-1, 0, 1)) for _ in range(rng.randint(0, 2))))
    W = gr.GradedSpace(tuple(rng.choice((-1, 0, 1)) for _ in range(rng.randint(0, 2))))
    common = 0
    while common < min(U.dim, W.dim) and U.degrees[common] == W.degrees[common] and rng.random() < 0.6:
        common += 1
    return gen.random_lagrangian_relation(rng, U, W, common)


def _random_coisotrope(rng, V):
    dims = {k: rng.randint(0, 1) for k in set(V.degrees)}
    I = gen.random_isotrope(rng, V, dims) or gr.Subspace.zero(V.space)
    return sy.symp_complement(I, V)


# ------------------------------------------------------------ symplectic


def check_factorize_recompose(rng):
    L = _random_lagrangian_relation(rng)
    c = sy.factorize(L)
    ok = sy.relation_equal(sy.recompose(c), L) and sy.is_reduction(c.left) and sy.is_reduction(c.right)
    return None if ok else {"relation": encode_relation(L)}


def check_kernel_transpose(rng):
    L = _random_lagrangian_relation(rng)
    K = sy.kernel(sy.transpose(L))
    ok = gr.equals(K, sy.symp_complement(sy.image(L), L.target))
    return None if ok else {"relation": encode_relation(L)}


def check_reduction_transpose(rng):
    _, V = gen.random_cotangent_space(rng, rng.randint(1, 3))
    L = gen.random_reduction(rng, V)
    ok = sy.relation_equal(sy.compose(sy.transpose(L), L), sy.identity(L.target))
    return None if ok else {"relation": encode_relation(L)}


def check_coisotrope_decomposition(rng):
    _, V = gen.random_cotangent_space(rng, rng.randint(1, 4), degrees=(-2, -1, 0, 1, 2))
    C = _random_coisotrope(rng, V)
    d = sy.decompose_coisotrope(C, V)
    ok = d.R.dim + d.I.dim + d.B.dim == V.dim and gr.equals(gr.span_sum(d.R, d.I), C)
    ok = ok and d.I.dimsum().times_power(-1) == d.B.dimsum().reflect()
    ok = ok and sy.is_isotropic(d.B, V) and sy.is_symplectic_subspace(d.R, V)
    ok = ok and all(V.pair(r, x) == 0 for r in d.R.basis for x in d.I.basis + d.B.basis)
    return None if ok else {"coisotrope": encode_subspace(C)}


def check_pushout(rng):
    _, V = gen.random_cotangent_space(rng, rng.randint(1, 3))
    L1, L2 = gen.random_reduction(rng, V), gen.random_reduction(rng, V)
    orth = sy.orthogonal_span(L1, L2)
    f = sy.factorize(sy.compose(sy.transpose(L1), L2))
    commutes = sy.relation_equal(sy.compose(L1, f.left), sy.compose(L2, f.right))
    if orth != commutes:
        return {"left": encode_relation(L1), "right": encode_relation(L2), "orthogonal": orth}
    return None


SYMPLECTIC = {
    "factorize_recompose": check_factorize_recompose,
    "kernel_of_transpose": check_kernel_transpose,
    "reduction_transpose": check_reduction_transpose,
    "coisotrope_decomposition": check_coisotrope_decomposition,
    "pushout_iff_orthogonal": check_pushout,
}


# ------------------------------------------------------------- densities


def check_berezinian_multiplicative(rng):
    V = gr.GradedSpace(tuple(rng.choice((0, 1)) for _ in range(rng.randint(1, 4))))
    A, B = gen.random_gl(rng, V), gen.random_gl(rng, V)
    lhs = de.berezinian_matrix(V, la.matmul(A, B))
    rhs = de.berezinian_matrix(V, A) * de.berezinian_matrix(V, B)
    return None if lhs == rhs else {"degrees": list(V.degrees)}


def check_split_fuse(rng):
    V = gr.GradedSpace(tuple(rng.choice((-1, 0, 1)) for _ in range(rng.randint(1, 4))))
    M = gen.random_gl(rng, V)
    cols = la.transpose(M)
    k = rng.randint(0, V.dim)
    A, B = list(cols[:k]), list(cols[k:])
    rho = de.half_density(V, de.Prefactor(gen.nonzero(rng)).abs())
    ra, rb = de.split_density(rho, A, B)
    back = de.fuse_density(ra, rb, V, A, B)
    return None if back.coefficient == rho.coefficient else {"degrees": list(V.degrees), "split": k}


def check_density_transform(rng):
    V = gr.GradedSpace(tuple(rng.choice((0, 1)) for _ in range(rng.randint(1, 4))))
    M = gen.random_gl(rng, V)
    rho = de.half_density(V)
    val = rho.evaluate(la.transpose(M))
    want = de.abs_power(de.berezinian_matrix(V, M), rho.weight)
    return None if val == want else {"degrees": list(V.degrees)}


DENSITIES = {
    "berezinian_multiplicative": check_berezinian_multiplicative,
    "split_fuse_roundtrip": check_split_fuse,
    "density_transformation": check_density_transform,
}


# ------------------------------------------------------------ BV algebra


def _functions(rng, count, w=5):
    """Homogeneous random functions; the degree of each is returned alongside."""
    _, V = gen.random_cotangent_space(rng, rng.randint(1, 2))
    out = []
    for _ in range(count):
        d = rng.randint(-1, 1)
        out.append((gen.random_function(rng, V.space, w, degree=d, density=0.25, max_terms=6), d))
    return V, out


def check_delta_squared(rng):
    V, ((f, _),) = _functions(rng, 1)
    ok = fm.laplacian(fm.laplacian(f, V), V).is_zero()
    return None if ok else {"f": encode_function(f)}


def check_bv_relation(rng):
    V, ((f, a), (g, _)) = _functions(rng, 2)
    s = -1 if a % 2 else 1
    lhs = fm.laplacian(f * g, V)
    rhs = fm.laplacian(f, V) * g + (f * fm.laplacian(g, V) + fm.bracket(f, g, V)).scale(s)
    return None if lhs.equal_upto(rhs) else {"f": encode_function(f), "g": encode_function(g)}


def check_bracket_leibniz(rng):
    V, ((f, a), (g, b), (h, _)) = _functions(rng, 3, 4)
    s = -1 if (a + 1) * b % 2 else 1
    lhs = fm.bracket(f, g * h, V)
    rhs = fm.bracket(f, g, V) * h + (g * fm.bracket(f, h, V)).scale(s)
    return None if lhs.equal_upto(rhs) else {"f": encode_function(f), "g": encode_function(g), "h": encode_function(h)}


def check_bracket_jacobi(rng):
    V, ((f, a), (g, b), (h, _)) = _functions(rng, 3, 4)
    lhs = fm.bracket(f, fm.bracket(g, h, V), V)
    s = -1 if (a + 1) * (b + 1) % 2 else 1
    rhs = fm.bracket(fm.bracket(f, g, V), h, V) + fm.bracket(g, fm.bracket(f, h, V), V).scale(s)
    return None if lhs.equal_upto(rhs) else {"f": encode_function(f), "g": encode_function(g), "h": encode_function(h)}


def check_delta_derivation_of_bracket(rng):
    V, ((f, a), (g, _)) = _functions(rng, 2)
    s = -1 if (a + 1) % 2 else 1
    lhs = fm.laplacian(fm.bracket(f, g, V), V)
    rhs = fm.bracket(fm.laplacian(f, V), g, V) + fm.bracket(f, fm.laplacian(g, V), V).scale(s)
    return None if lhs.equal_upto(rhs) else {"f": encode_function(f), "g": encode_function(g)}


BVALGEBRA = {
    "delta_squared": check_delta_squared,
    "delta_of_product": check_bv_relation,
    "bracket_leibniz": check_bracket_leibniz,
    "bracket_jacobi": check_bracket_jacobi,
    "delta_derivation_of_bracket": check_delta_derivation_of_bracket,
}


# -------------------------------------------------------------- integral


def _dg(rng):
    return gen.random_dg_space(rng, dim_base=rng.randint(1, 3), acyclic_pairs=rng.randint(0, 2))


def _lagrangian(rng):
    for _ in range(20):
        dg = _dg(rng)
        L = gen.random_nondegenerate_lagrangian(rng, dg, tries=20)
        if L is not None:
            return dg, L
    return None, None


def check_stokes(rng):
    dg, L = _lagrangian(rng)
    if dg is None:
        return None
    V = dg.space
    f = gen.random_function(rng, V.space, 5, degree=-1, density=0.3)
    g = fm.bracket(dg.s_free, f, V) + fm.hbar_laplacian(f, V)
    ok = bi.bv_integral(g, L, dg).series.is_zero()
    return None if ok else {"f": encode_function(f), "lagrangian": encode_subspace(L)}


def check_schwinger_dyson(rng):
    dg, L = _lagrangian(rng)
    if dg is None:
        return None
    V = dg.space
    ann = gr.annihilator(L)
    beta = fm.FormalFunction.linear(V.space, ann.basis[rng.randrange(ann.dim)], 6)
    h = gen.random_function(rng, V.space, 4, density=0.3)
    lhs = bi.bv_integral(fm.bracket(dg.s_free, beta, V) * h, L, dg).series
    sign = 1 if beta.degree() % 2 else -1
    rhs = bi.bv_integral(fm.bracket(beta, h, V), L, dg).series.times_hbar(1).scale(sign)
    return None if lhs.equal_upto(rhs) else {"h": encode_function(h), "lagrangian": encode_subspace(L)}


def _reduction(rng):
    dg = _dg(rng)
    I = gen.random_nondegenerate_isotrope(rng, dg)
    return dg, gen.random_reduction(rng, dg.space, I)


def check_hpl_equals_wick(rng):
    dg, L = _reduction(rng)
    f = gen.random_function(rng, dg.space.space, 6, density=0.15, max_terms=12)
    a = bi.fiber_integral(f, L, dg).function
    b = bi.hpl_projection(f, L, dg)
    return None if a.equal_upto(b) else {"f": encode_function(f), "reduction": encode_relation(L)}


def check_fubini(rng):
    dg, L1 = _reduction(rng)
    f = gen.random_function(rng, dg.space.space, 5, density=0.2, max_terms=10)
    one = bi.fiber_integral(f, L1, dg)
    D2 = bi.DgOddSympSpace(L1.target, one.s_free)
    I2 = gen.random_nondegenerate_isotrope(rng, D2)
    L2 = gen.random_reduction(rng, D2.space, I2)
    two = bi.fiber_integral(one.function, L2, D2)
    direct = bi.fiber_integral(f, sy.compose(L1, L2), dg)
    ok = direct.function.equal_upto(two.function)
    ok = ok and direct.density.coefficient == one.density.coefficient * two.density.coefficient
    return None if ok else {"f": encode_function(f), "first": encode_relation(L1), "second": encode_relation(L2)}


def check_transferred_differential(rng):
    dg, L = _reduction(rng)
    a, b = bi.transferred_differential(L, dg)
    n = len(a)
    ok = a == b and (not n or all(la.is_zero(r) for r in la.matmul(a, a)))
    return None if ok else {"reduction": encode_relation(L)}


INTEGRAL = {
    "stokes": check_stokes,
    "schwinger_dyson": check_schwinger_dyson,
    "hpl_equals_wick": check_hpl_equals_wick,
    "fubini": check_fubini,
    "transferred_differential": check_transferred_differential,
}


# --------------------------------------------------------------- quantum


def random_quantum_algebra(rng, w_max=5, dim_base=None):
    """A random action solving the master equation, on a space with unobstructed homology."""
    for _ in range(10):
        dg = gen.random_dg_space(rng, dim_base=dim_base or rng.randint(1, 3), degrees=(0, 1),
                                 acyclic_pairs=rng.randint(0, 1))
        try:
            return qu.solve_qme(dg, rng, w_max)
        except ObstructedQME:
            continue
    raise ObstructedQME("no unobstructed instance found")


def check_qme_forms(rng):
    S = random_quantum_algebra(rng)
    forms = [qu.check_qme(S, f).holds for f in ("decomposed", "full", "exponential")]
    return None if all(forms) else {"forms": forms}


def check_transfer(rng):
    S = random_quantum_algebra(rng)
    I = gen.random_nondegenerate_isotrope(rng, S.dg)
    L = gen.random_reduction(rng, S.space, I)
    E = qu.effective_action(S, L)
    ok = qu.check_qme(E.action).holds and min(E.action.s_int.hbar_powers(), default=0) >= 0
    ok = ok and E.action.action.equal_upto(qu.effective_action(S, L, route="hpl").action.action)
    ok = ok and qu.check_relation(S, E.action, L).verdict
    return None if ok else {"reduction": encode_relation(L)}


def check_composed_certificate(rng):
    S = random_quantum_algebra(rng, 4)
    L1 = gen.random_reduction(rng, S.space, gen.random_nondegenerate_isotrope(rng, S.dg))
    E1 = qu.effective_action(S, L1)
    L2 = gen.random_reduction(rng, E1.action.space, gen.random_nondegenerate_isotrope(rng, E1.action.dg))
    E2 = qu.effective_action(E1.action, L2)
    c = qu.compose_relations(qu.check_relation(S, E1.action, L1), qu.check_relation(E1.action, E2.action, L2))
    d = qu.check_relation(S, E2.action, c.relation)
    ok = c.verdict and d.verdict and c.ratio == d.ratio
    return None if ok else {"first": encode_relation(L1), "second": encode_relation(L2)}


def check_genlag_delta_squared(rng):
    S = random_quantum_algebra(rng, 4)
    G = qu.point_genlag(S)
    ok = qu.hbar_delta(G).function.is_zero()
    return None if ok else {"action": encode_function(S.action)}


QUANTUM = {
    "qme_forms_agree": check_qme_forms,
    "transfer_preserves_qme": check_transfer,
    "composed_certificate": check_composed_certificate,
    "algebra_is_closed": check_genlag_delta_squared,
}

SUITES = {
    "symplectic": SYMPLECTIC,
    "densities": DENSITIES,
    "bvalgebra": BVALGEBRA,
    "integral": INTEGRAL,
    "quantum": QUANTUM,
}


def run_suite(name, seed=0, instances=10):
    """Run every check of a suite; returns a JSON-able report."""
    checks = SUITES[name]
    report = {"suite": name, "seed": seed, "instances": instances, "checks": {}, "counterexamples": []}
    for cname, fn in checks.items():
        passed = skipped = 0
        for k in range(instances):
            rng = random.Random(f"{name}/{cname}/{seed}/{k}")
            try:
                bad = fn(rng)
            except (Degenerate, NonComposable, ObstructedQME):
                skipped += 1
                continue
            if bad is None:
                passed += 1
            else:
                report["counterexamples"].append({"check": cname, "instance": k, "data": bad})
        report["checks"][cname] = {"passed": passed, "failed": instances - passed - skipped, "skipped": skipped}
    report["ok"] = not report["counterexamples"]
    return report


__all__ = ["SUITES", "run_suite", "random_quantum_algebra", "rat_str"]
