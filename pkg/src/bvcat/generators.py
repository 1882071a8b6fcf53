"""Seeded random instances: graded spaces, symplectomorphisms, dg spaces,
isotropes, Lagrangian relations and formal functions.

All generators take a ``random.Random`` and only produce small rationals so
that exact arithmetic stays cheap.
"""

import itertools
from fractions import Fraction

from . import graded as gr
from . import linalg as la
from . import symplectic as sy
from .bvintegral import DgOddSympSpace, is_nondegenerate
from .formal import FormalFunction, Q_to_sfree
from .graded import GradedSpace, Subspace


def small(rng, lo=-3, hi=3, den=2):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def nonzero(rng):
    while True:
        x = small(rng)
        if x:
            return x


def random_homogeneous(rng, V, degree, vectors=None):
    """Random vector of the given degree, optionally inside span(vectors)."""
    if vectors is not None:
        v = la.zeros(V.dim)
        for b in vectors:
            v = la.add(v, la.scale(small(rng), b))
        return v
    return tuple(small(rng) if d == degree else la.ZERO for d in V.degrees)


def random_gl(rng, W):
    """Random degree-preserving invertible matrix on ``W``."""
    n = W.dim
    while True:
        M = [[la.ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if W.degrees[i] == W.degrees[j]:
                    M[i][j] = small(rng) if i != j else nonzero(rng)
        M = tuple(tuple(r) for r in M)
        if la.det(M) != 0:
            return M


def random_symplectomorphism(rng, V, density=0.5):
    """Cayley transform ``(1 - X)^-1 (1 + X)`` of a random ``X`` with ``omega X`` symmetric."""
    n = V.dim
    if n == 0:
        return ()
    while True:
        H = [[la.ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                if V.degrees[i] + V.degrees[j] == 1 and rng.random() < density:
                    H[i][j] = H[j][i] = small(rng)
        X = la.matmul(V.omega_inv, H)
        one = la.identity(n)
        minus = tuple(la.sub(a, b) for a, b in zip(one, X))
        plus = tuple(la.add(a, b) for a, b in zip(one, X))
        if la.det(minus) == 0:
            continue
        A = la.matmul(la.inverse(minus), plus)
        return A


def random_cotangent_space(rng, dim_base, degrees=(-1, 0, 1)):
    W = GradedSpace(tuple(rng.choice(degrees) for _ in range(dim_base)))
    return W, sy.shifted_cotangent(W)


def cell_differential(rng, W, acyclic_pairs):
    """A differential pairing up ``acyclic_pairs`` generators; returns ``(d, untouched)``."""
    n = W.dim
    d = [[la.ZERO] * n for _ in range(n)]
    used = set()
    count = 0
    for j in rng.sample(range(n), n):
        if count >= acyclic_pairs or j in used:
            continue
        for i in range(n):
            if i not in used and i != j and W.degrees[i] == W.degrees[j] + 1:
                d[i][j] = nonzero(rng)
                used.update((i, j))
                count += 1
                break
    return tuple(tuple(r) for r in d), [i for i in range(n) if i not in used]


def lifted_differential(W, d):
    """Cotangent lift of a differential on ``W`` to ``T*[1]W``."""
    n = W.dim
    N = 2 * n
    Q = [[la.ZERO] * N for _ in range(N)]
    for i in range(n):
        for j in range(n):
            if d[i][j]:
                Q[n + i][n + j] = d[i][j]
                Q[j][i] = d[i][j] if W.degrees[i] % 2 == 0 else -d[i][j]
    return tuple(tuple(r) for r in Q)


def lifted_map(W, M):
    """Cotangent lift ``(M^-T, M)`` of an invertible degree-preserving map."""
    Minv_t = la.transpose(la.inverse(M))
    return la.block_diag(Minv_t, M)


def random_dg_space(rng, dim_base=3, degrees=(-1, 0, 1), acyclic_pairs=1, quadratic=True):
    """A random dg space ``(T*[1]W, S_free)`` in random Darboux coordinates.

    ``Q`` is the cotangent lift of a differential with ``acyclic_pairs``
    contractible cells plus, optionally, a random quadratic form on the
    untouched degree zero base directions. Everything is then moved by a
    random symplectomorphism.
    """
    W, V = random_cotangent_space(rng, dim_base, degrees)
    n = W.dim
    d, free = cell_differential(rng, W, acyclic_pairs)
    Q = [list(r) for r in lifted_differential(W, d)]
    if quadratic:
        zero = [i for i in free if W.degrees[i] == 0]
        for a in zero:
            for b in zero:
                if a <= b and rng.random() < 0.7:
                    x = small(rng)
                    Q[a][n + b] += x
                    if a != b:
                        Q[b][n + a] += x
    Q = tuple(tuple(r) for r in Q)
    A = la.matmul(lifted_map(W, random_gl(rng, W)), random_symplectomorphism(rng, V))
    Q2 = la.matmul(la.matmul(la.inverse(A), Q), A)
    return DgOddSympSpace(V, Q_to_sfree(Q2, V))


def random_isotrope(rng, V, dims):
    """Random isotropic subspace with ``dims[k]`` vectors of degree ``k``.

    Vectors are drawn greedily from the symplectic complement of what has been
    chosen. Returns ``None`` if some degree runs out of room.
    """
    I = Subspace.zero(V.space)
    order = [k for k, c in sorted(dims.items()) for _ in range(c)]
    rng.shuffle(order)
    for k in order:
        room = sy.symp_complement(I, V).block(k)
        for _ in range(10):
            v = random_homogeneous(rng, V.space, k, room)
            if not la.is_zero(v) and v not in I:
                break
        else:
            return None
        I = Subspace.span(V.space, I.basis + (v,))
    return I


def random_nondegenerate_isotrope(rng, dg, max_dim=None, tries=40):
    """Random isotrope ``I`` with ``omega(I, Q I)`` non-degenerate (possibly zero)."""
    V = dg.space
    counts = {}
    for d in V.degrees:
        counts[d] = counts.get(d, 0) + 1
    for _ in range(tries):
        dims = {}
        for k in sorted(counts):
            if k < 0:
                continue
            room = min(counts.get(k, 0), counts.get(-k, 0))
            if k == 0:
                c = rng.randint(0, room)
                dims[0] = c
            else:
                c = rng.randint(0, room)
                dims[k] = dims[-k] = c
        if max_dim is not None and sum(dims.values()) > max_dim:
            continue
        I = random_isotrope(rng, V, {k: c for k, c in dims.items() if c})
        if I is not None and is_nondegenerate(I, dg):
            return I
    return Subspace.zero(V.space)


def random_reduction(rng, V, I=None):
    """Reduction along a random (or given) isotrope, post-composed with a symplectomorphism."""
    if I is None:
        dims = {}
        for k in set(V.degrees):
            dims[k] = rng.randint(0, 1)
        I = random_isotrope(rng, V, dims) or Subspace.zero(V.space)
    L, red = sy.reduction(sy.symp_complement(I, V), V)
    R = red.space
    A = random_symplectomorphism(rng, R)
    if R.dim:
        L = sy.compose(L, sy.graph_relation(A, R, R))
    return L


def random_lagrangian_relation(rng, U_base, W_base, common):
    """Random Lagrangian relation ``T*[1]U -> T*[1]W``.

    ``common`` base coordinates are identified, the rest of each side is sent
    to a point through a conormal-type Lagrangian, and both ends are moved by
    random symplectomorphisms.
    """
    U = sy.shifted_cotangent(U_base)
    W = sy.shifted_cotangent(W_base)
    nU, nW = U_base.dim, W_base.dim
    vs = []
    # identify base coordinates 0..common-1 together with their fibres
    for c in range(common):
        if U_base.degrees[c] != W_base.degrees[c]:
            raise ValueError("identified coordinates must have equal degrees")
        for off_u, off_w in ((0, 0), (nU, nW)):
            v = [la.ZERO] * (2 * nU + 2 * nW)
            v[off_u + c] = la.ONE
            v[2 * nU + off_w + c] = la.ONE
            vs.append(tuple(v))
    # remaining coordinates: random mix of "base" and "fibre" Lagrangians
    for side, (n, off) in (("U", (nU, 0)), ("W", (nW, 2 * nU))):
        for c in range(common, n):
            v = [la.ZERO] * (2 * nU + 2 * nW)
            if rng.random() < 0.5:
                v[off + n + c] = la.ONE  # base direction
            else:
                v[off + c] = la.ONE  # fibre direction
            vs.append(tuple(v))
    L0 = sy.relation_from_vectors(U, W, vs)
    AU = random_symplectomorphism(rng, U)
    AW = random_symplectomorphism(rng, W)
    return sy.compose(sy.compose(sy.graph_relation(AU, U, U), L0), sy.graph_relation(AW, W, W))


def random_function(rng, space, w_max, degree=None, density=0.3, min_weight=0, g_min=0, max_terms=None):
    """Random formal function with terms of weight ``min_weight..w_max``."""
    terms = {}
    for k in range(0, w_max + 1):
        for g in range(g_min, (w_max - k) // 2 + 1):
            if 2 * g + k < min_weight:
                continue
            for idx in itertools.combinations_with_replacement(range(space.dim), k):
                if any(x == y and space.degrees[x] & 1 for x, y in zip(idx, idx[1:])):
                    continue
                if degree is not None and -sum(space.degrees[i] for i in idx) != degree:
                    continue
                if rng.random() < density:
                    terms[(idx, g)] = nonzero(rng)
    items = list(terms.items())
    if max_terms is not None and len(items) > max_terms:
        items = rng.sample(items, max_terms)
    return FormalFunction(space, items, w_max)


def random_nondegenerate_lagrangian(rng, dg, tries=60):
    """Random Lagrangian ``L`` with ``omega(L, Q L)`` non-degenerate, or ``None``."""
    V = dg.space
    counts = {}
    for d in V.degrees:
        counts[d] = counts.get(d, 0) + 1
    for _ in range(tries):
        I = random_nondegenerate_isotrope(rng, dg)
        if sy.is_lagrangian(I, V):
            return I
    return None


def darboux_basis(V):
    """Pairs ``(e, f)`` with ``deg e <= 0``, ``omega(e, f) = 1`` and all other pairings zero."""
    n = V.dim
    vecs = [la.unit(n, i) for i in range(n)]
    pairs = []
    while vecs:
        vecs.sort(key=lambda v: gr.vector_degree(V.space, v))
        e = vecs[0]
        f = next((w for w in vecs if V.pair(e, w)), None)
        if f is None:  # pragma: no cover - excluded by non-degeneracy
            raise ValueError("form is degenerate")
        f = la.scale(1 / V.pair(e, f), f)
        rest = []
        for w in vecs:
            if w is e or w is f:
                continue
            # remove the components along e and f
            w2 = la.sub(w, la.scale(V.pair(e, w), f))
            rest.append(la.sub(w2, la.scale(V.pair(w, f), e)))
        pairs.append((e, f))
        vecs = [w for w in rest if not la.is_zero(w)]
    return pairs


def random_dg_structure(rng, R, acyclic_pairs=1, quadratic=True):
    """A random quadratic action on an arbitrary symplectic space ``R``."""
    if R.dim == 0:
        return DgOddSympSpace(R, FormalFunction.zero(R.space, None))
    pairs = darboux_basis(R)
    W = GradedSpace(tuple(gr.vector_degree(R.space, e) for e, _ in pairs))
    V = sy.shifted_cotangent(W)
    d, free = cell_differential(rng, W, acyclic_pairs)
    Q = [list(r) for r in lifted_differential(W, d)]
    if quadratic:
        n = W.dim
        zero = [i for i in free if W.degrees[i] == 0]
        for a in zero:
            for b in zero:
                if a <= b and rng.random() < 0.7:
                    x = small(rng)
                    Q[a][n + b] += x
                    if a != b:
                        Q[b][n + a] += x
    std = darboux_basis(V)
    # symplectic isomorphism V -> R matching Darboux bases of equal degrees
    src = sorted(std, key=lambda p: gr.vector_degree(V.space, p[0]))
    dst = sorted(pairs, key=lambda p: gr.vector_degree(R.space, p[0]))
    B_src = [v for p in src for v in p]
    B_dst = [v for p in dst for v in p]
    A = la.matmul(la.transpose(B_dst), la.inverse(la.transpose(B_src)))
    A = la.matmul(A, random_symplectomorphism(rng, V))
    QR = la.matmul(la.matmul(A, tuple(map(tuple, Q))), la.inverse(A))
    return DgOddSympSpace(R, Q_to_sfree(QR, R))
