"""Quantum L-infinity algebras, their relations, and generalized Lagrangians.

An action ``S = sum hbar^g S^g_n`` on a degree -1 symplectic space is a
quantum L-infinity algebra when it satisfies ``hbar Delta e^{S/hbar} = 0``.
``S_free = S^0_2`` is kept separately as the dg structure; the rest is
``S_int``. Transfer along a reduction integrates ``e^{S_int/hbar}`` over the
kernel and takes ``hbar log`` of the result.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import linalg as la
from . import symplectic as sy
from .bvintegral import (
    DgOddSympSpace, FiberResult, canonical_decompose, fiber_integral, hpl_projection,
    is_nondegenerate, transferred_differential,
)
from .densities import LinDensity, Prefactor, half_density, tensor
from .errors import (
    Degenerate, MalformedAction, NonComposable, NotLagrangian, NotOrthogonal, ObstructedQME,
    SourceTargetMismatch, SpaceMismatch,
)
from .formal import (
    INF, FormalFunction, bracket, embed, exp, hbar_laplacian, log, pullback, quadratic_function,
)
from .graded import GradedSpace, Subspace


def split_action(S):
    """``(S_free, S_int)`` where ``S_free`` is the ``g = 0``, quadratic part."""
    free, inter = {}, {}
    for (idx, g), c in S.terms.items():
        (free if g == 0 and len(idx) == 2 else inter)[(idx, g)] = c
    return FormalFunction(S.space, free, INF), FormalFunction(S.space, inter, S.w_max)


@dataclass(frozen=True, eq=False)
class QuantumLInfty:
    space: sy.OddSympSpace
    action: FormalFunction

    def __post_init__(self):
        if self.action.space != self.space.space:
            raise SpaceMismatch("action lives on a different space")
        for key in self.action.terms:
            idx, g = key
            n = len(idx)
            if n < 1 or g < 0 or 2 * g + n < 2:
                raise MalformedAction(f"component S^{g}_{n} is not allowed")
            if self.action.term_degree(key) != 0:
                raise MalformedAction("action is not of degree zero")
        if self.action.w_max < 2:
            raise MalformedAction("truncation must keep the quadratic part")

    @property
    def w_max(self):
        return self.action.w_max

    @cached_property
    def parts(self):
        return split_action(self.action)

    @property
    def s_free(self):
        return self.parts[0]

    @property
    def s_int(self):
        return self.parts[1]

    @cached_property
    def dg(self):
        return DgOddSympSpace(self.space, self.s_free)


# --------------------------------------------------------------- QME


def qme_residual(S, form="decomposed"):
    """Residual of the quantum master equation; zero up to ``w_max`` iff it holds.

    ``form`` is ``"decomposed"`` (``1/2 {S_int, S_int} + (Q + hbar Delta) S_int``),
    ``"full"`` (``1/2 {S, S} + hbar Delta S``) or ``"exponential"``
    (``(Q + hbar Delta) e^{S_int / hbar}``).
    """
    V = S.space
    free, inter = S.s_free, S.s_int
    if form == "decomposed":
        return (bracket(inter, inter, V).scale(Fraction(1, 2)) + bracket(free, inter, V)
                + hbar_laplacian(inter, V)).with_w_max(S.w_max)
    if form == "full":
        A = S.action
        return (bracket(A, A, V).scale(Fraction(1, 2)) + hbar_laplacian(A, V)).with_w_max(S.w_max)
    if form == "exponential":
        E = exp(inter.times_hbar(-1))
        return bracket(free, E, V) + hbar_laplacian(E, V)
    raise ValueError(f"unknown form {form!r}")


@dataclass(frozen=True, eq=False)
class QmeReport:
    holds: bool
    residual: FormalFunction
    w_max: int


def check_qme(S, form="decomposed"):
    r = qme_residual(S, form)
    return QmeReport(r.is_zero(), r, r.w_max)


# --------------------------------------------------------- transfer


@dataclass(frozen=True, eq=False)
class EffectiveAction:
    """Transferred data on the target of a reduction.

    The fiber integral of ``e^{S_int/hbar} rho`` equals
    ``e^{W/hbar} * vacuum * density`` where ``W`` is ``action.s_int`` and
    ``vacuum`` is the hbar series of connected vacuum contributions.
    """

    action: QuantumLInfty
    density: LinDensity
    vacuum: FormalFunction
    fiber: FiberResult


def _exp_interaction(S):
    inter = S.s_int
    if S.w_max == INF:
        raise ValueError("transfer needs a finite truncation")
    return exp(inter.times_hbar(-1)) if not inter.is_zero() else FormalFunction.constant(S.space.space, 1, S.w_max - 2)


def effective_action(S, L, rho=None, route="wick"):
    """Transfer ``S`` along the reduction ``L``.

    ``route`` selects the Wick fiber integral or the perturbation series; both
    must agree.
    """
    if not is_nondegenerate(sy.kernel(L), S.dg):
        raise Degenerate("kernel of the reduction is degenerate for S_free")
    E = _exp_interaction(S)
    fr = fiber_integral(E, L, S.dg, rho)
    F = fr.function if route == "wick" else hpl_projection(E, L, S.dg)
    R = L.target
    Wfull = log(F).times_hbar(1)
    vac_terms = {k: c for k, c in Wfull.terms.items() if not k[0]}
    W = FormalFunction(R.space, {k: c for k, c in Wfull.terms.items() if k[0]}, Wfull.w_max)
    # constants: e^{W_0 / hbar} is an hbar series
    W0 = FormalFunction(GradedSpace(()), {((), g - 1): c for ((), g), c in vac_terms.items()}, Wfull.w_max - 2)
    vacuum = exp(W0) if not W0.is_zero() else FormalFunction.constant(GradedSpace(()), 1, W0.w_max)
    if any(g < 0 for g in W.hbar_powers()):  # pragma: no cover - excluded by the weight count
        raise AssertionError("negative hbar power in the effective action")
    action = QuantumLInfty(R, fr.s_free.with_w_max(Wfull.w_max) + W)
    return EffectiveAction(action, fr.density, vacuum, fr)


# ---------------------------------------------------- relation certificates


@dataclass(frozen=True, eq=False)
class RelationCertificate:
    relation: sy.Relation
    cospan: sy.FactorizationCospan
    nondegenerate: bool
    differentials_equal: bool
    densities_proportional: bool
    ratio: Prefactor = None
    vacuum_ratio: FormalFunction = None
    source_side: EffectiveAction = None
    target_side: EffectiveAction = None
    w_max: int = None
    notes: tuple = field(default_factory=tuple)

    @property
    def verdict(self):
        return self.nondegenerate and self.differentials_equal and self.densities_proportional


def _series_ratio(a, b):
    """``a / b`` for hbar series on the point with unit weight-zero part."""
    return a * _series_inverse(b)


def _series_inverse(b):
    one = FormalFunction.constant(b.space, 1, b.w_max)
    u = one - b
    out = one
    power = one
    for _ in range(b.w_max + 1):
        power = power * u
        if power.is_zero():
            break
        out = out + power
    return out.with_w_max(b.w_max)


def _certificate(L, cospan, SU, SV, effU=None, effV=None, notes=()):
    left, right = cospan.left, cospan.right
    w = min(SU.w_max, SV.w_max)
    nondeg = is_nondegenerate(sy.kernel(left), SU.dg) and is_nondegenerate(sy.kernel(right), SV.dg)
    if not nondeg:
        return RelationCertificate(L, cospan, False, False, False, w_max=w, notes=tuple(notes) + ("degenerate kernel",))
    if effU is None:
        effU = effective_action(SU, left)
    if effV is None:
        effV = effective_action(SV, right)
    QU = effU.fiber.Q
    QV = effV.fiber.Q
    diffs = QU == QV
    AU, AV = effU.action.action, effV.action.action
    same = AU.equal_upto(AV)
    ratio = effU.density.coefficient / effV.density.coefficient
    vr = _series_ratio(effU.vacuum, effV.vacuum)
    return RelationCertificate(L, cospan, True, diffs, same, ratio, vr, effU, effV, min(AU.w_max, AV.w_max), tuple(notes))


def check_relation(SU, SV, L):
    """Decide whether the Lagrangian relation ``L`` relates the two algebras."""
    if L.source != SU.space or L.target != SV.space:
        raise SpaceMismatch("relation does not connect the given spaces")
    if not L.is_lagrangian():
        raise NotLagrangian("relation is not Lagrangian")
    cospan = sy.factorize(L)
    return _certificate(L, cospan, SU, SV)


def _push(eff, K):
    """Transfer an effective action further along the reduction ``K``."""
    nxt = effective_action(eff.action, K)
    # Fubini: densities and vacuum factors multiply
    density = LinDensity(nxt.density.space, nxt.density.coefficient * eff.density.coefficient, nxt.density.weight)
    vacuum = eff.vacuum.with_w_max(nxt.vacuum.w_max) * nxt.vacuum
    return EffectiveAction(nxt.action, density, vacuum, nxt.fiber)


def compose_relations(cert1, cert2):
    """Certificate for ``L2 . L1`` built through the pushout of the middle legs.

    Requires the kernels of ``L1^T`` and ``L2`` to be orthogonal; the
    transferred data are pushed from the middles of the two certificates to
    the pushout rather than recomputed from the ends.
    """
    if not (cert1.verdict and cert2.verdict):
        raise NonComposable("both certificates must hold")
    A1, B1 = cert1.cospan.left, cert1.cospan.right
    A2, B2 = cert2.cospan.left, cert2.cospan.right
    if B1.source != A2.source:
        raise SourceTargetMismatch("relations are not composable")
    if cert1.w_max != cert2.w_max:
        raise NonComposable("certificates use different truncations")
    if not sy.orthogonal_span(B1, A2):
        raise NotOrthogonal("kernel of L1^T is not orthogonal to kernel of L2")
    K, Kt = sy.pushout_span(B1, A2)
    left = sy.compose(A1, K)
    right = sy.compose(B2, Kt)
    L = sy.compose(cert1.relation, cert2.relation)
    phi = sy.identity(left.target)
    cospan = sy.FactorizationCospan(left, right, phi)
    effU = _push(cert1.source_side, K)
    effW = _push(cert2.target_side, Kt)
    return _certificate_from_sides(L, cospan, effU, effW, cert1, cert2)


def _certificate_from_sides(L, cospan, effU, effW, cert1, cert2):
    # both legs were already checked non-degenerate by the pushes
    nondeg = True
    diffs = effU.fiber.Q == effW.fiber.Q
    same = effU.action.action.equal_upto(effW.action.action)
    ratio = effU.density.coefficient / effW.density.coefficient
    vr = _series_ratio(effU.vacuum, effW.vacuum)
    w = min(effU.action.w_max, effW.action.w_max)
    return RelationCertificate(L, cospan, nondeg, diffs, same, ratio, vr, effU, effW, w, ("composed via pushout",))


# ------------------------------------------------ generalized Lagrangians


@dataclass(frozen=True, eq=False)
class GeneralizedLagrangian:
    """``(C, f rho, S_free)`` for a coisotropic relation ``C: V1 -> V2``.

    ``f``, ``rho`` and ``s_free`` live on the reduced space of ``C``.
    """

    relation: sy.Relation
    function: FormalFunction
    density: LinDensity
    s_free: FormalFunction

    def __post_init__(self):
        R = self.reduced
        for obj in (self.function, self.s_free):
            if obj.space != R.space:
                raise SpaceMismatch("data must live on the reduced space")
        DgOddSympSpace(R, self.s_free)

    @cached_property
    def reduced(self):
        return sy.reduced_space(self.relation)

    @property
    def source(self):
        return self.relation.source

    @property
    def target(self):
        return self.relation.target


def identity_genlag(V, w_max):
    R = sy.SYMP_POINT.space
    return GeneralizedLagrangian(
        sy.identity(V), FormalFunction.constant(R, 1, w_max), half_density(R), FormalFunction.zero(R, INF)
    )


def point_genlag(S, rho=None):
    """The morphism ``* -> V`` given by ``e^{S_int/hbar} rho`` with free part ``S_free``."""
    V = S.space
    C = sy.Relation(sy.SYMP_POINT, V, Subspace.full(V.space))
    red = sy.coisotropic_reduce(C.graph, C.ambient)
    A = la.transpose(red.reps, V.dim) if red.reps else tuple(() for _ in range(V.dim))
    R = red.space.space
    f = pullback(_exp_interaction(S), A, R)
    s = pullback(S.s_free, A, R)
    rho = rho or half_density(V.space)
    return GeneralizedLagrangian(C, f, LinDensity(R, rho.evaluate(red.reps), rho.weight), s)


def lagrangian_genlag(L, w_max):
    """``(L, 1, 0)`` for a Lagrangian relation ``L``."""
    R = sy.reduced_space(L).space
    return GeneralizedLagrangian(L, FormalFunction.constant(R, 1, w_max), half_density(R), FormalFunction.zero(R, INF))


def hbar_delta(G):
    """``(C, hbar Delta(f) rho + {S_free, f} rho, S_free)``."""
    R = G.reduced
    f = G.function
    return GeneralizedLagrangian(G.relation, hbar_laplacian(f, R) + bracket(G.s_free, f, R), G.density, G.s_free)


def compose_genlag(G, Gp):
    """``G' . G`` by integrating ``f rho (x) f' rho'`` along the compositor."""
    if G.target != Gp.source:
        raise SourceTargetMismatch("generalized Lagrangians are not composable")
    X = sy.compositor(G.relation, Gp.relation)
    src = X.source
    n1 = G.reduced.dim
    f = embed(G.function, src.space, 0) * embed(Gp.function, src.space, n1)
    s = embed(G.s_free, src.space, 0) + embed(Gp.s_free, src.space, n1)
    dg = DgOddSympSpace(src, s)
    if not is_nondegenerate(sy.kernel(X), dg):
        raise NonComposable("kernel of the compositor is degenerate")
    rho = tensor(G.density, Gp.density)
    fr = fiber_integral(f, X, dg, LinDensity(src.space, rho.coefficient, rho.weight))
    return GeneralizedLagrangian(sy.compose(G.relation, Gp.relation), fr.function, fr.density, fr.s_free)


def pair_genlag(G1, G2):
    """``<G1, G2>`` for ``G1: * -> V`` and ``G2: V -> *``: a series times a prefactor."""
    from .bvintegral import IntegralValue

    if G1.source.dim or G2.target.dim:
        raise NonComposable("pairing needs morphisms from and to the point")
    G = compose_genlag(G1, G2)
    return IntegralValue(G.function, G.density.coefficient)


# -------------------------------------------- solving the QME order by order


def _allowed_monomials(space, w):
    import itertools

    par = [d & 1 for d in space.degrees]
    out = []
    for g in range(0, w // 2 + 1):
        n = w - 2 * g
        if n < 1:
            continue
        for idx in itertools.combinations_with_replacement(range(space.dim), n):
            if any(x == y and par[x] for x, y in zip(idx, idx[1:])):
                continue
            if -sum(space.degrees[i] for i in idx) == 0:
                out.append((idx, g))
    return out


def solve_qme(dg, rng, w_max, density=0.6, seed_terms=None):
    """Build a random action ``S_free + S_int`` solving the QME up to ``w_max``.

    At each weight ``w`` the equation ``(Q + hbar Delta) S_w = -1/2 sum {S_a, S_b}``
    (``a + b = w + 2``) is solved exactly and a random element of the kernel of
    ``Q + hbar Delta`` is added. Raises ``ObstructedQME`` when the obstruction
    is not exact.
    """
    from .generators import small

    V = dg.space
    free = dg.s_free
    parts = {}
    for w in range(3, w_max + 1):
        basis = _allowed_monomials(V.space, w)
        if not basis:
            continue
        cols = []
        for key in basis:
            m = FormalFunction(V.space, {key: 1}, w)
            img = bracket(free, m, V) + hbar_laplacian(m, V)
            cols.append({k: c for k, c in img.terms.items() if 2 * k[1] + len(k[0]) == w})
        obstruction = FormalFunction.zero(V.space, w)
        for a in range(3, w):
            b = w + 2 - a
            if a in parts and b in parts:
                obstruction = obstruction + bracket(parts[a], parts[b], V).scale(Fraction(1, 2))
        obstruction = obstruction.with_w_max(w)
        rows_keys = sorted({k for c in cols for k in c} | set(obstruction.terms))
        index = {k: i for i, k in enumerate(rows_keys)}
        rows = [dict() for _ in rows_keys]
        for j, c in enumerate(cols):
            for k, v in c.items():
                rows[index[k]][j] = v
        rhs = [-obstruction.terms.get(k, 0) for k in rows_keys]
        res = la.sparse_solve(rows, rhs)
        if res is None:
            raise ObstructedQME(f"obstruction at weight {w} is not exact")
        sol, pivots = res
        x = dict(sol)
        free_cols = [j for j in range(len(basis)) if j not in pivots]
        for fc in free_cols:
            if rng.random() < density:
                c = small(rng)
                if c:
                    for j, v in la.sparse_null_vector(pivots, fc).items():
                        x[j] = x.get(j, 0) + c * v
        parts[w] = FormalFunction(V.space, {basis[j]: v for j, v in x.items() if v}, INF)
    total = FormalFunction(V.space, free.terms, w_max)
    for p in parts.values():
        total = total + p.with_w_max(w_max)
    return QuantumLInfty(V, total.with_w_max(w_max))


def quadratic_action(dg, w_max):
    return QuantumLInfty(dg.space, FormalFunction(dg.space.space, dg.s_free.terms, w_max))


__all__ = [
    "QuantumLInfty", "check_qme", "qme_residual", "effective_action", "check_relation",
    "compose_relations", "RelationCertificate", "GeneralizedLagrangian", "hbar_delta",
    "compose_genlag", "pair_genlag", "identity_genlag", "point_genlag", "lagrangian_genlag", "solve_qme", "quadratic_function",
    "canonical_decompose", "Prefactor",
]
