"""Gaussian BV integrals over non-degenerate isotropes.

A dg space here is a degree -1 symplectic space together with a quadratic
action ``S_free``; its differential is ``Q^i_j = -omega^{ik} s_kj``.
Integration along an isotrope ``I`` uses the canonical decomposition
``V = R_can + I + Q I`` and Wick contractions with the inverse of ``S_free``
restricted to ``I``. The same normalized integral can be computed by the
homological perturbation series; both routes are exposed.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import graded as gr
from . import linalg as la
from . import symplectic as sy
from .densities import LinDensity, Prefactor, half_density
from .errors import Degenerate, NotCompatible, NotIsotropic, NotLagrangian, SpaceMismatch
from .formal import (
    INF, FormalFunction, apply_derivation, bracket, is_compatible, is_differential, laplacian,
    pullback, quadratic_matrix, restrict, sfree_to_Q, substitute,
)
from .graded import GradedSpace, Subspace


@dataclass(frozen=True, eq=False)
class DgOddSympSpace:
    space: sy.OddSympSpace
    s_free: FormalFunction

    def __post_init__(self):
        if self.s_free.space != self.space.space:
            raise SpaceMismatch("quadratic action lives on a different space")
        # a quadratic form is a polynomial: mark it exact
        object.__setattr__(self, "s_free", FormalFunction(self.space.space, self.s_free.terms, INF))
        for key in self.s_free.terms:
            if key[1] != 0 or len(key[0]) != 2 or self.s_free.term_degree(key) != 0:
                raise NotCompatible("free action must be a degree zero quadratic form")
        Q = self.Q
        if not is_differential(Q, self.space):
            raise NotCompatible("differential does not square to zero")
        if not is_compatible(Q, self.space):  # pragma: no cover - automatic for Q from S_free
            raise NotCompatible("differential is not compatible with the form")

    @cached_property
    def Q(self):
        return sfree_to_Q(self.s_free, self.space)

    @property
    def V(self):
        return self.space

    def apply_Q(self, v):
        return la.matvec(self.Q, v)


def dg_from_Q(V, Q):
    from .formal import Q_to_sfree

    return DgOddSympSpace(V, Q_to_sfree(Q, V))


def _pairing_matrix(I_basis, dg):
    V = dg.space
    return tuple(tuple(V.pair(a, dg.apply_Q(b)) for b in I_basis) for a in I_basis)


def is_nondegenerate(I, dg):
    """Whether ``omega(e_i, Q e_j)`` is invertible on a basis of ``I``."""
    if not sy.is_isotropic(I, dg.space):
        return False
    if not I.basis:
        return True
    return la.det(_pairing_matrix(list(I.basis), dg)) != 0


@dataclass(frozen=True, eq=False)
class CanonicalDecomposition:
    """``V = R_can + I + Q I`` with adapted coordinates.

    ``T`` has the new basis ``[R_can | I | QI]`` as columns; ``adapted`` is the
    symplectic space in those coordinates and ``s_adapted`` the action there.
    """

    dg: DgOddSympSpace
    I: Subspace
    R_basis: tuple
    I_basis: tuple
    QI_basis: tuple
    T: tuple
    T_inv: tuple

    @property
    def m(self):
        return len(self.R_basis)

    @property
    def r(self):
        return len(self.I_basis)

    @cached_property
    def adapted(self):
        om = la.matmul(la.matmul(la.transpose(self.T), self.dg.space.omega), self.T)
        degs = tuple(gr.vector_degree(self.dg.space.space, v) for v in self.basis)
        return sy.OddSympSpace(GradedSpace(degs), om)

    @property
    def basis(self):
        return self.R_basis + self.I_basis + self.QI_basis

    @cached_property
    def s_adapted(self):
        return substitute_to(self.dg.s_free, self.T, self.adapted.space)

    @cached_property
    def R_space(self):
        return sy.OddSympSpace(
            GradedSpace(self.adapted.degrees[: self.m]),
            tuple(tuple(row[: self.m]) for row in self.adapted.omega[: self.m]),
        )

    @cached_property
    def I_space(self):
        return GradedSpace(self.adapted.degrees[self.m: self.m + self.r])

    @cached_property
    def s_I(self):
        """Quadratic form of ``S_free`` on ``I`` in the coordinates of ``I_basis``."""
        s = quadratic_matrix(self.s_adapted)
        a, b = self.m, self.m + self.r
        return tuple(tuple(row[a:b]) for row in s[a:b])

    @cached_property
    def s_R(self):
        s = quadratic_matrix(self.s_adapted)
        return tuple(tuple(row[: self.m]) for row in s[: self.m])

    @cached_property
    def Q_R(self):
        """``Q`` restricted to ``R_can`` in the basis ``R_basis``."""
        cols = [la.matvec(self.T_inv, self.dg.apply_Q(v))[: self.m] for v in self.R_basis]
        return la.transpose(cols, self.m) if cols else ()

    def harmonious(self):
        return all(la.is_zero(r) for r in self.Q_R)

    @cached_property
    def sdr(self):
        return SDR.from_decomposition(self)


def substitute_to(f, T, space):
    return pullback(f, T, space)


def canonical_decompose(I, dg):
    V = dg.space
    sy.check_in(I, V)
    if not sy.is_isotropic(I, V):
        raise NotIsotropic("subspace is not isotropic")
    I_basis = tuple(I.basis)
    if I_basis and la.det(_pairing_matrix(list(I_basis), dg)) == 0:
        raise Degenerate("isotrope is degenerate for the quadratic action")
    QI_basis = tuple(dg.apply_Q(v) for v in I_basis)
    IQI = Subspace.span(V.space, I_basis + QI_basis)
    R = sy.symp_complement(IQI, V)
    R_basis = tuple(R.basis)
    cols = R_basis + I_basis + QI_basis
    T = la.transpose(cols, V.dim) if cols else ()
    T_inv = la.inverse(T) if cols else ()
    return CanonicalDecomposition(dg, I, R_basis, I_basis, QI_basis, T, T_inv)


@dataclass(frozen=True, eq=False)
class SDR:
    """Strong deformation retract ``(p, i, k)`` onto ``R_can`` in its basis."""

    p: tuple
    i: tuple
    k: tuple
    Q: tuple
    Q_R: tuple

    @classmethod
    def from_decomposition(cls, D):
        m, r = D.m, D.r
        n = D.dg.space.dim
        p = tuple(D.T_inv[:m])
        i = la.transpose(D.R_basis, n) if m else tuple(() for _ in range(n))
        # k sends Q e_a to -e_a and kills R_can + I
        block = [[la.ZERO] * n for _ in range(n)]
        for a in range(r):
            block[m + a][m + r + a] = -la.ONE
        k = la.matmul(la.matmul(D.T, block), D.T_inv) if n else ()
        return cls(p, i, k, D.dg.Q, D.Q_R)

    def identities(self):
        """Check ``pi = 1``, ``ip = 1 + Qk + kQ``, ``k^2 = 0``, ``pk = 0``, ``ki = 0``."""
        n = len(self.Q)
        m = len(self.p)
        out = {}
        out["pi"] = (la.matmul(self.p, self.i) == la.identity(m)) if m else True
        ip = la.matmul(self.i, self.p) if m else la.zeros(n, n)
        rhs = la.identity(n)
        for M in (la.matmul(self.Q, self.k), la.matmul(self.k, self.Q)):
            rhs = tuple(la.add(a, b) for a, b in zip(rhs, M))
        out["ip"] = tuple(map(tuple, ip)) == rhs
        out["kk"] = all(la.is_zero(r) for r in la.matmul(self.k, self.k))
        out["pk"] = all(la.is_zero(r) for r in la.matmul(self.p, self.k)) if m else True
        out["ki"] = all(la.is_zero(r) for r in la.matmul(self.k, self.i)) if m else True
        out["chain_p"] = (la.matmul(self.p, self.Q) == la.matmul(self.Q_R, self.p)) if m else True
        out["chain_i"] = (la.matmul(self.Q, self.i) == la.matmul(self.i, self.Q_R)) if m else True
        return out


# ------------------------------------------------------------ Wick


def wick_integrate(word, s_inv, par):
    """Sum over perfect matchings of a word of coordinates.

    Returns the coefficient ``c`` with ``int gamma^word rho = c hbar^(n/2) int rho``;
    each pair ``(a, b)``, ``a`` left of ``b``, contributes ``-s^{ab}`` and the
    sign of bringing ``b`` next to ``a``.
    """
    word = tuple(word)
    if len(word) % 2:
        return Fraction(0)
    return _wick(word, s_inv, par)


def _wick(word, s_inv, par):
    if not word:
        return Fraction(1)
    a = word[0]
    total = Fraction(0)
    odd_between = 0
    for j in range(1, len(word)):
        b = word[j]
        c = s_inv[a][b]
        if c:
            sign = -1 if par[b] and odd_between & 1 else 1
            rest = word[1:j] + word[j + 1:]
            sub = _wick(rest, s_inv, par)
            if sub:
                total -= sign * c * sub
        odd_between += par[b]
    return total


def _integrate_terms(f, split, s_inv, par_I, target_space, w_max):
    """Integrate out the coordinates ``split..`` of ``f`` by Wick contraction."""
    out = {}
    for (idx, g), c in f.terms.items():
        keep = tuple(i for i in idx if i < split)
        word = tuple(i - split for i in idx if i >= split)
        if len(word) % 2:
            continue
        val = wick_integrate(word, s_inv, par_I)
        if val:
            k = (keep, g + len(word) // 2)
            out[k] = out.get(k, 0) + c * val
    return FormalFunction(target_space, list(out.items()), w_max)


def _gaussian_norm(rho, n_even, n_odd, basis):
    base = Prefactor(Fraction(1), 1, n_even, n_even - n_odd)
    return rho.evaluate(list(basis)) * base


@dataclass(frozen=True, eq=False)
class IntegralValue:
    """``series * prefactor``: a Laurent series in hbar times an exact prefactor."""

    series: FormalFunction
    prefactor: Prefactor


def bv_integral(f, L, dg, rho=None):
    """Integral of ``f rho`` over a non-degenerate Lagrangian ``L``.

    Returns an ``IntegralValue`` whose series is normalized by ``int rho``.
    """
    V = dg.space
    sy.check_in(L, V)
    if not sy.is_lagrangian(L, V):
        raise NotLagrangian("integration domain is not Lagrangian")
    if rho is None:
        rho = half_density(V.space)
    D = canonical_decompose(L, dg)
    fL = restrict(f, L)
    sL = quadratic_matrix(restrict(dg.s_free, L))
    s_inv = la.inverse(sL) if sL else ()
    par = tuple(d & 1 for d in fL.space.degrees)
    series = _integrate_terms(fL, 0, s_inv, par, GradedSpace(()), f.w_max)
    ne, no = fL.space.even_odd()
    pref = _gaussian_norm(rho, ne, no, D.I_basis + D.QI_basis)
    del D
    return IntegralValue(series, pref)


# ---------------------------------------------------------- fiber integral


@dataclass(frozen=True, eq=False)
class FiberResult:
    """Output of integrating along a reduction ``V -> R``.

    ``function`` is normalized so that the integral of ``f rho`` equals
    ``function * density``; ``s_free`` and ``Q`` are the transferred quadratic
    action and differential on ``R``.
    """

    function: FormalFunction
    density: LinDensity
    s_free: FormalFunction
    Q: tuple
    decomposition: CanonicalDecomposition


def _reduction_transport(L, D):
    """Matrix of ``L`` restricted to ``R_can`` (in ``R_basis`` coordinates) and its inverse."""
    C, proj = sy.reduction_map(L)
    m = D.m
    cols = [la.matvec(proj, v) for v in D.R_basis]
    Pi = la.transpose(cols, L.target.dim) if cols else tuple(() for _ in range(L.target.dim))
    Pi_inv = la.inverse(Pi) if m else ()
    return Pi, Pi_inv


def _check_reduction(L, dg):
    if L.source != dg.space:
        raise SpaceMismatch("reduction does not start at the dg space")
    if not sy.is_reduction(L):
        raise NotLagrangian("relation is not a reduction")


def fiber_integral(f, L, dg, rho=None):
    """Integrate ``f rho`` along the kernel of the reduction ``L``."""
    _check_reduction(L, dg)
    V = dg.space
    if rho is None:
        rho = half_density(V.space)
    D = canonical_decompose(sy.kernel(L), dg)
    m, r = D.m, D.r
    fa = substitute_to(f, D.T, D.adapted.space)
    fa = FormalFunction(fa.space, {k: c for k, c in fa.terms.items() if all(i < m + r for i in k[0])}, fa.w_max)
    s_inv = la.inverse(D.s_I) if r else ()
    par_I = tuple(d & 1 for d in D.I_space.degrees)
    F_can = _integrate_terms(fa, m, s_inv, par_I, D.R_space.space, f.w_max)
    return _finish(F_can, L, D, rho)


def _finish(F_can, L, D, rho):
    R = L.target
    Pi, Pi_inv = _reduction_transport(L, D)
    m = D.m
    F = pullback(F_can, Pi_inv, R.space) if m else FormalFunction(R.space, F_can.terms, F_can.w_max)
    from .formal import quadratic_function

    s_can = quadratic_function(D.s_R, D.R_space.space)
    s_R = pullback(s_can, Pi_inv, R.space) if m else FormalFunction.zero(R.space, INF)
    Q_R = la.matmul(la.matmul(Pi, D.Q_R), Pi_inv) if m else ()
    # lift of the standard basis of R
    lift = []
    for a in range(m):
        col = tuple(row[a] for row in Pi_inv)
        v = la.zeros(D.dg.space.dim)
        for c, b in zip(col, D.R_basis):
            if c:
                v = la.add(v, la.scale(c, b))
        lift.append(v)
    ne, no = D.I_space.even_odd()
    coeff = _gaussian_norm(rho, ne, no, tuple(lift) + D.I_basis + D.QI_basis)
    return FiberResult(F, LinDensity(R.space, coeff, rho.weight), s_R, Q_R, D)


# ------------------------------------------------------ perturbation side


def hpl_projection(f, L, dg):
    """``P' = P (1 + hbar Delta K + (hbar Delta K)^2 + ...)`` transported to ``R``.

    ``K`` is the homotopy on functions built from the contracting data of the
    canonical decomposition: an odd derivation turning ``I`` coordinates into
    ``Q I`` coordinates, divided by the number of ``I + QI`` factors.
    """
    _check_reduction(L, dg)
    D = canonical_decompose(sy.kernel(L), dg)
    m, r = D.m, D.r
    W = D.adapted
    S = D.s_adapted
    fa = substitute_to(f, D.T, W.space)
    w = f.w_max
    # delta(beta^b) = {S, beta^b} = sum_a Dm[a][b] gamma^a
    Dm = [[la.ZERO] * r for _ in range(r)]
    for b in range(r):
        img = bracket(S, FormalFunction.coordinate(W.space, m + r + b, INF), W)
        for (idx, g), c in img.terms.items():
            (a,) = idx
            if not (m <= a < m + r):  # pragma: no cover - excluded by the block form
                raise AssertionError("differential leaves the contractible block")
            Dm[a - m][b] = c
    Dinv = la.inverse(Dm) if r else ()
    images = {}
    for a in range(r):
        images[m + a] = FormalFunction(W.space, {((m + r + b,), 0): Dinv[b][a] for b in range(r)}, INF)

    def K(g):
        h = apply_derivation(g, images, 1)
        out = {}
        for (idx, gg), c in h.terms.items():
            N = sum(1 for i in idx if i >= m)
            out[(idx, gg)] = -c / N
        return FormalFunction(W.space, out, h.w_max)

    total = fa
    cur = fa
    while True:
        cur = laplacian(K(cur), W).times_hbar(1)
        if cur.is_zero():
            break
        total = total + cur
    P = FormalFunction(D.R_space.space, {k: c for k, c in total.terms.items() if all(i < m for i in k[0])}, w)
    Pi, Pi_inv = _reduction_transport(L, D)
    R = L.target
    return pullback(P, Pi_inv, R.space) if m else FormalFunction(R.space, P.terms, P.w_max)


# ------------------------------------------------------ transferred Q


def transferred_differential(L, dg):
    """``Q^R`` computed as ``L . graph(Q) . L^T`` and as ``proj . Q . incl``.

    Returns ``(relation_path, matrix_path)``.
    """
    _check_reduction(L, dg)
    V, R = dg.space.space, L.target.space
    Vs, Rs = gr.shift(V, 1), gr.shift(R, 1)
    gQ = gr.graph_of_map(dg.Q, V, Vs)
    LT = gr.swap_graph(L.graph, L.split, gr.product(R, V))
    first = gr.compose_relations(LT, R.dim, gQ, V.dim, gr.product(R, Vs))
    L_shift = Subspace.span(gr.product(Vs, Rs), L.graph.basis)
    comp = gr.compose_relations(first, R.dim, L_shift, V.dim, gr.product(R, Rs))
    rel = gr.map_from_graph(comp, R.dim)
    if rel is None:
        raise Degenerate("transferred relation is not the graph of a map")
    D = canonical_decompose(sy.kernel(L), dg)
    m = D.m
    Pi, Pi_inv = _reduction_transport(L, D)
    mat = la.matmul(la.matmul(Pi, D.Q_R), Pi_inv) if m else ()
    return tuple(map(tuple, rel)), mat
