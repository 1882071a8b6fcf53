"""Degree -1 symplectic spaces and linear Lagrangian relations.

A form ``omega`` on a graded space pairs generators whose degrees add up to
one. Relations ``V -> W`` are subspaces of ``V-bar x W`` where ``V-bar``
carries the negated form.
"""

from dataclasses import dataclass
from functools import cached_property

from . import graded as gr
from . import linalg as la
from .errors import (
    DoesNotFactor, NotCoisotropic, NotIsotropic, NotLagrangian, NotOrthogonal,
    NotSymplectic, SourceTargetMismatch, SpaceMismatch,
)
from .graded import GradedSpace, Subspace


@dataclass(frozen=True)
class OddSympSpace:
    space: GradedSpace
    omega: tuple

    def __post_init__(self):
        if not isinstance(self.space, GradedSpace):
            object.__setattr__(self, "space", GradedSpace(tuple(self.space)))
        om = la.mat(self.omega)
        object.__setattr__(self, "omega", om)
        n = self.space.dim
        if len(om) != n or any(len(r) != n for r in om):
            raise NotSymplectic("form has the wrong shape")
        degs = self.space.degrees
        for i in range(n):
            for j in range(n):
                if om[i][j] != -om[j][i]:
                    raise NotSymplectic("form is not antisymmetric")
                if om[i][j] and degs[i] + degs[j] != 1:
                    raise NotSymplectic(f"form pairs degrees {degs[i]} and {degs[j]}")
        if n and la.det(om) == 0:
            raise NotSymplectic("form is degenerate")

    @property
    def degrees(self):
        return self.space.degrees

    @property
    def dim(self):
        return self.space.dim

    @cached_property
    def omega_inv(self):
        return la.inverse(self.omega) if self.dim else ()

    def pair(self, v, w):
        return la.dot(v, la.matvec(self.omega, w))

    def flipped(self):
        return OddSympSpace(self.space, tuple(tuple(-x for x in r) for r in self.omega))

    def __repr__(self):
        return f"OddSympSpace({list(self.degrees)})"


SYMP_POINT = OddSympSpace(GradedSpace(()), ())


def shifted_cotangent(W):
    """``T*[1]W``: fibre coordinates first (degrees ``1 - d``), then ``W``."""
    n = W.dim
    degs = tuple(1 - d for d in W.degrees) + W.degrees
    om = [[la.ZERO] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        om[i][n + i] = la.ONE
        om[n + i][i] = -la.ONE
    return OddSympSpace(GradedSpace(degs), tuple(tuple(r) for r in om))


def symp_product(*spaces):
    return OddSympSpace(gr.product(*(S.space for S in spaces)), la.block_diag(*(S.omega for S in spaces)))


def check_in(W, V):
    if W.ambient != V.space:
        raise SpaceMismatch(f"subspace of {W.ambient!r} used in {V!r}")


def symp_complement(W, V):
    """``W^omega = {v : omega(v, w) = 0 for all w in W}``."""
    check_in(W, V)
    return gr.kernel_of_functionals(V.space, [la.matvec(V.omega, w) for w in W.basis])


def is_isotropic(W, V):
    return symp_complement(W, V).contains(W)


def is_coisotropic(W, V):
    return W.contains(symp_complement(W, V))


def is_lagrangian(W, V):
    return gr.equals(symp_complement(W, V), W)


def is_symplectic_subspace(W, V):
    return gr.intersect(W, symp_complement(W, V)).is_zero()


CLASSES = ("isotropic", "coisotropic", "lagrangian", "symplectic", "none")


def properties(W, V):
    """Every class from ``CLASSES`` that applies to ``W``."""
    Wc = symp_complement(W, V)
    out = set()
    if Wc.contains(W):
        out.add("isotropic")
    if W.contains(Wc):
        out.add("coisotropic")
    if "isotropic" in out and "coisotropic" in out:
        out.add("lagrangian")
    if gr.intersect(W, Wc).is_zero():
        out.add("symplectic")
    return out


def classify(W, V):
    """The finest class: lagrangian, isotropic, coisotropic, symplectic or none."""
    props = properties(W, V)
    for c in ("lagrangian", "isotropic", "coisotropic", "symplectic"):
        if c in props:
            return c
    return "none"


# ---------------------------------------------------------- reduction


@dataclass(frozen=True)
class Reduced:
    """Result of coisotropic reduction ``C -> C / C^omega``.

    ``reps`` are representatives in ``C`` of the basis of ``space``; ``proj``
    is a ``space.dim x ambient.dim`` matrix agreeing with the projection on ``C``.
    """

    space: OddSympSpace
    reps: tuple
    proj: tuple
    coisotrope: Subspace


def coisotropic_reduce(C, V):
    check_in(C, V)
    I = symp_complement(C, V)
    if not C.contains(I):
        raise NotCoisotropic("subspace does not contain its symplectic complement")
    reps = gr.complement_vectors(I, C)
    outside = gr.complement_vectors(C)
    cols = list(reps) + list(I.basis) + list(outside)
    inv = la.inverse(la.transpose(cols)) if cols else ()
    proj = tuple(inv[: len(reps)])
    degs = tuple(gr.vector_degree(V.space, r) for r in reps)
    om = tuple(tuple(V.pair(a, b) for b in reps) for a in reps)
    R = OddSympSpace(GradedSpace(degs), om)
    return Reduced(R, tuple(reps), proj, C)


@dataclass(frozen=True)
class Relation:
    """A linear relation ``source -> target`` given by its graph."""

    source: OddSympSpace
    target: OddSympSpace
    graph: Subspace

    def __post_init__(self):
        expect = gr.product(self.source.space, self.target.space)
        if self.graph.ambient != expect:
            raise SpaceMismatch("graph does not live in source x target")

    @property
    def ambient(self):
        return symp_product(self.source.flipped(), self.target)

    @property
    def split(self):
        return self.source.dim

    def is_lagrangian(self):
        return is_lagrangian(self.graph, self.ambient)

    def classify(self):
        return classify(self.graph, self.ambient)

    def __repr__(self):
        return f"Relation({list(self.source.degrees)} -> {list(self.target.degrees)}, dim={self.graph.dim})"


def relation_from_vectors(source, target, vectors):
    return Relation(source, target, Subspace.span(gr.product(source.space, target.space), vectors))


def require_lagrangian(L):
    if not L.is_lagrangian():
        raise NotLagrangian(f"{L!r} is not Lagrangian")


def compose(L1, L2):
    """``L2 . L1`` for ``L1: U -> V`` and ``L2: V -> W``."""
    if L1.target != L2.source:
        raise SourceTargetMismatch(f"{L1.target!r} does not match {L2.source!r}")
    target = gr.product(L1.source.space, L2.target.space)
    g = gr.compose_relations(L1.graph, L1.split, L2.graph, L2.split, target)
    return Relation(L1.source, L2.target, g)


def transpose(L):
    target = gr.product(L.target.space, L.source.space)
    return Relation(L.target, L.source, gr.swap_graph(L.graph, L.split, target))


def kernel(L):
    return gr.relation_kernel(L.graph, L.split, L.source.space)


def image(L):
    return gr.relation_image(L.graph, L.split, L.target.space)


def identity(V):
    n = V.dim
    return relation_from_vectors(V, V, [la.unit(n, i) + la.unit(n, i) for i in range(n)])


def graph_relation(M, source, target):
    """Graph of the linear map ``M: source -> target``."""
    return Relation(source, target, gr.graph_of_map(M, source.space, target.space))


def relation_equal(L1, L2):
    return L1.source == L2.source and L1.target == L2.target and L1.graph.basis == L2.graph.basis


def relation_product(L1, L2):
    """``L1 x L2 : A x C -> B x D``."""
    a, b = L1.source.dim, L1.target.dim
    c, d = L2.source.dim, L2.target.dim
    vs = []
    for v in L1.graph.basis:
        vs.append(v[:a] + la.zeros(c) + v[a:] + la.zeros(d))
    for v in L2.graph.basis:
        vs.append(la.zeros(a) + v[:c] + la.zeros(b) + v[c:])
    return relation_from_vectors(symp_product(L1.source, L2.source), symp_product(L1.target, L2.target), vs)


def is_reduction(L):
    return L.is_lagrangian() and kernel(transpose(L)).is_zero()


def is_coreduction(L):
    return L.is_lagrangian() and kernel(L).is_zero()


def reduction(C, V):
    """The reduction ``V -> C / C^omega`` of a coisotrope, with its reduced data."""
    red = coisotropic_reduce(C, V)
    vs = [c + la.matvec(red.proj, c) for c in C.basis]
    return relation_from_vectors(V, red.space, vs), red


def reduction_map(L):
    """For a reduction ``L: V -> R`` return ``(C, proj)``.

    ``C = Im L^T`` and ``proj`` is a matrix agreeing with ``L`` on ``C``.
    """
    n = L.source.dim
    srcs = [v[:n] for v in L.graph.basis]
    imgs = [v[n:] for v in L.graph.basis]
    C = Subspace.span(L.source.space, srcs)
    outside = gr.complement_vectors(C)
    cols = srcs + list(outside)
    if la.rank(srcs, n) != len(srcs):
        raise NotLagrangian("relation is not a reduction")
    inv = la.inverse(la.transpose(cols))
    # proj = [imgs | 0] . inv
    m = L.target.dim
    imgmat = [tuple(imgs[k][r] for k in range(len(srcs))) + la.zeros(len(outside)) for r in range(m)]
    return C, la.matmul(imgmat, inv) if m else ()


# ------------------------------------------------------- factorization


@dataclass(frozen=True)
class FactorizationCospan:
    """``L = right^T . left`` with both legs reductions into ``middle``."""

    left: Relation
    right: Relation
    phi: Relation

    @property
    def middle(self):
        return self.left.target


def factorize(L):
    require_lagrangian(L)
    LU, _ = reduction(image(transpose(L)), L.source)
    LV, _ = reduction(image(L), L.target)
    phi = compose(compose(transpose(LU), L), LV)
    right = compose(LV, transpose(phi))
    return FactorizationCospan(LU, right, phi)


def recompose(cospan):
    return compose(cospan.left, transpose(cospan.right))


def cospans_equivalent(a, b):
    """Whether two cospans differ by a symplectic isomorphism of middles."""
    psi = compose(transpose(a.left), b.left)
    if gr.map_from_graph(psi.graph, psi.split) is None or not psi.is_lagrangian():
        return False
    return relation_equal(compose(a.right, psi), b.right)


def cotangent_lift(f, U, W):
    """``T*[1]f : T*[1]U -> T*[1]W`` for a degree-preserving map ``f: U -> W``."""
    for i, row in enumerate(f):
        for j, x in enumerate(row):
            if x and W.degrees[i] != U.degrees[j]:
                raise SpaceMismatch("map does not preserve degrees")
    TU, TW = shifted_cotangent(U), shifted_cotangent(W)
    n, m = U.dim, W.dim
    vs = []
    for j in range(n):
        vs.append(la.zeros(n) + la.unit(n, j) + la.zeros(m) + tuple(f[i][j] for i in range(m)))
    for i in range(m):
        vs.append(tuple(f[i]) + la.zeros(n) + la.unit(m, i) + la.zeros(m))
    return relation_from_vectors(TU, TW, vs)


# ------------------------------------------------ coisotrope decomposition


@dataclass(frozen=True)
class Decomposition:
    """``V = R + I + B`` with ``I = C^omega``, ``C = R + I`` and ``B`` isotropic."""

    R: Subspace
    I: Subspace
    B: Subspace


def decompose_coisotrope(C, V):
    I = symp_complement(C, V)
    if not C.contains(I):
        raise NotCoisotropic("subspace does not contain its symplectic complement")
    B = Subspace.zero(V.space)
    tops = sorted({max(d, 1 - d) for d in V.degrees})
    for n in tops:
        for k in (n, 1 - n):
            want = len(I.block(1 - k))
            while len(B.block(k)) < want:
                Bc = symp_complement(B, V)
                BC = gr.span_sum(B, C)
                pick = next((b for b in Bc.block(k) if b not in BC), None)
                if pick is None:  # pragma: no cover - excluded by a dimension count
                    raise AssertionError("no admissible vector for the complement")
                B = Subspace.span(V.space, B.basis + (pick,))
    R = symp_complement(gr.span_sum(I, B), V)
    return Decomposition(R, I, B)


# ------------------------------------------------------------- spans


def orthogonal_span(L, Lt):
    """Whether the kernels of two reductions out of the same space are orthogonal."""
    if L.source != Lt.source:
        raise SourceTargetMismatch("span legs have different sources")
    V = L.source
    K, Kt = kernel(L), kernel(Lt)
    return all(V.pair(a, b) == 0 for a in K.basis for b in Kt.basis)


def pushout_span(L, Lt):
    """Pushout square of an orthogonal span of reductions.

    Returns ``(K, Kt)`` with ``K . L == Kt . Lt``.
    """
    if not orthogonal_span(L, Lt):
        raise NotOrthogonal("kernels of the span are not orthogonal")
    f = factorize(compose(transpose(L), Lt))
    return f.left, f.right


def factor_through(M, L):
    """The unique ``K`` with ``K . L == M`` when ``Im M^T`` lies in ``Im L^T``."""
    if L.source != M.source:
        raise SourceTargetMismatch("relations have different sources")
    if not image(transpose(L)).contains(image(transpose(M))):
        raise DoesNotFactor("image of the transposes is not contained")
    return compose(transpose(L), M)


# -------------------------------------------------------- compositor


def _coiso_reduce_relation(C):
    require_coisotropic_relation(C)
    return coisotropic_reduce(C.graph, C.ambient)


def require_coisotropic_relation(C):
    if not is_coisotropic(C.graph, C.ambient):
        raise NotCoisotropic(f"{C!r} is not coisotropic")


def compositor(C, Cp):
    """The Lagrangian relation ``R_C x R_C' -> R_{C' . C}``."""
    if C.target != Cp.source:
        raise SourceTargetMismatch("coisotropic relations are not composable")
    red1 = _coiso_reduce_relation(C)
    red2 = _coiso_reduce_relation(Cp)
    red3 = _coiso_reduce_relation(compose(C, Cp))
    n1, n2 = C.source.dim, C.target.dim
    vs = []
    for d in sorted(set(C.graph.ambient.degrees) | set(Cp.graph.ambient.degrees)):
        A, B = C.graph.block(d), Cp.graph.block(d)
        cols = [v[n1:] for v in A] + [la.scale(-1, v[:n2]) for v in B]
        for sol in la.nullspace(la.transpose(cols, n2), len(cols)):
            x, y = sol[: len(A)], sol[len(A):]
            c = la.zeros(n1 + n2)
            for t, v in zip(x, A):
                if t:
                    c = la.add(c, la.scale(t, v))
            cp = la.zeros(Cp.graph.ambient.dim)
            for t, v in zip(y, B):
                if t:
                    cp = la.add(cp, la.scale(t, v))
            v1, v2, v3 = c[:n1], c[n1:], cp[n2:]
            vs.append(la.matvec(red1.proj, c) + la.matvec(red2.proj, v2 + v3) + la.matvec(red3.proj, v1 + v3))
    src = symp_product(red1.space, red2.space)
    return relation_from_vectors(src, red3.space, vs)


def reduced_space(C):
    """The reduced space of a coisotropic relation."""
    return _coiso_reduce_relation(C).space


__all__ = [
    "OddSympSpace", "SYMP_POINT", "shifted_cotangent", "symp_product", "symp_complement",
    "classify", "properties", "coisotropic_reduce", "Relation", "compose", "transpose",
    "kernel", "image", "identity", "is_reduction", "is_coreduction", "reduction",
    "factorize", "recompose", "cotangent_lift", "decompose_coisotrope", "orthogonal_span",
    "pushout_span", "factor_through", "compositor", "NotIsotropic",
]
