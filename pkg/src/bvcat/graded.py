"""Finite-dimensional Z-graded vector spaces, graded subspaces and linear relations.

A graded space is a list of generator degrees. Subspaces are stored in a
canonical form: every spanning vector is homogeneous, and the spanning set is
the reduced row echelon basis computed separately in each degree, sorted by
pivot index. Two subspaces are equal exactly when their stored bases agree.
"""

from dataclasses import dataclass, field

from . import linalg as la
from .errors import MixedAmbient, MixedDegree, NotASubspace


@dataclass(frozen=True)
class GradedSpace:
    degrees: tuple
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        degs = tuple(self.degrees)
        for d in degs:
            if not isinstance(d, int) or isinstance(d, bool):
                raise TypeError(f"degree {d!r} is not an integer")
        object.__setattr__(self, "degrees", degs)

    @property
    def dim(self):
        return len(self.degrees)

    def parity(self, i):
        return self.degrees[i] & 1

    def indices(self, degree):
        return [i for i, d in enumerate(self.degrees) if d == degree]

    def degree_set(self):
        return sorted(set(self.degrees))

    def dimsum(self):
        return DimPoly.from_degrees(self.degrees)

    def even_odd(self):
        """Return ``(dim V_even, dim V_odd)``."""
        odd = sum(d & 1 for d in self.degrees)
        return self.dim - odd, odd

    def __repr__(self):
        return f"GradedSpace({list(self.degrees)})"


POINT = GradedSpace(())


def shift(V, k):
    """The shifted space ``V[k]``: every degree ``d`` becomes ``d - k``."""
    return GradedSpace(tuple(d - k for d in V.degrees))


def dual(V):
    return GradedSpace(tuple(-d for d in V.degrees))


def product(*spaces):
    return GradedSpace(tuple(d for V in spaces for d in V.degrees))


def dimsum(V):
    return V.dimsum()


@dataclass(frozen=True)
class DimPoly:
    """A Laurent polynomial in ``s`` with non-negative integer coefficients.

    >>> DimPoly.from_degrees([0, 1, 1]).coeff(1)
    2
    """

    terms: tuple  # sorted (degree, count) pairs with count > 0

    @classmethod
    def from_dict(cls, d):
        for k, v in d.items():
            if v < 0:
                raise ValueError("dimension polynomial has a negative coefficient")
        return cls(tuple(sorted((k, v) for k, v in d.items() if v)))

    @classmethod
    def from_degrees(cls, degrees):
        d = {}
        for k in degrees:
            d[k] = d.get(k, 0) + 1
        return cls.from_dict(d)

    def as_dict(self):
        return dict(self.terms)

    def coeff(self, k):
        return self.as_dict().get(k, 0)

    def __add__(self, other):
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, 0) + v
        return DimPoly.from_dict(d)

    def __sub__(self, other):
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, 0) - v
        return DimPoly.from_dict(d)

    def times_power(self, k):
        """Multiply by ``s**k``."""
        return DimPoly(tuple((d + k, v) for d, v in self.terms))

    def reflect(self):
        """Substitute ``s -> 1/s``."""
        return DimPoly(tuple(sorted((-d, v) for d, v in self.terms)))

    def total(self):
        return sum(v for _, v in self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{v}*s^{d}" for d, v in self.terms)


# ---------------------------------------------------------------- subspaces


def vector_degree(V, v):
    """Degree of a homogeneous non-zero vector; ``None`` for zero.

    Raises ``MixedDegree`` if the support spans several degrees.
    """
    degs = {V.degrees[i] for i, x in enumerate(v) if x != 0}
    if not degs:
        return None
    if len(degs) > 1:
        raise MixedDegree(f"vector has components in degrees {sorted(degs)}")
    return degs.pop()


def _canonical_block(V, degree, vectors):
    idx = V.indices(degree)
    rows = [tuple(v[i] for i in idx) for v in vectors]
    R, _ = la.rref(rows, len(idx))
    out = []
    for r in R:
        full = [la.ZERO] * V.dim
        for j, i in enumerate(idx):
            full[i] = r[j]
        out.append(tuple(full))
    return out


def _pivot(v):
    return next(i for i, x in enumerate(v) if x != 0)


@dataclass(frozen=True)
class Subspace:
    ambient: GradedSpace
    basis: tuple

    @classmethod
    def span(cls, ambient, vectors):
        """Span of homogeneous vectors; rejects mixed-degree input."""
        by_degree = {}
        for v in vectors:
            v = la.vec(v)
            if len(v) != ambient.dim:
                raise NotASubspace("vector length does not match the ambient dimension")
            d = vector_degree(ambient, v)
            if d is not None:
                by_degree.setdefault(d, []).append(v)
        return cls._from_blocks(ambient, by_degree)

    @classmethod
    def _from_blocks(cls, ambient, by_degree):
        basis = []
        for d, vs in by_degree.items():
            basis.extend(_canonical_block(ambient, d, vs))
        basis.sort(key=_pivot)
        return cls(ambient, tuple(basis))

    @classmethod
    def span_split(cls, ambient, vectors):
        """Span of the homogeneous components of arbitrary vectors."""
        parts = []
        for v in vectors:
            v = la.vec(v)
            for d in ambient.degree_set():
                part = tuple(x if ambient.degrees[i] == d else la.ZERO for i, x in enumerate(v))
                if not la.is_zero(part):
                    parts.append(part)
        return cls.span(ambient, parts)

    @classmethod
    def zero(cls, ambient):
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient):
        return cls.span(ambient, [la.unit(ambient.dim, i) for i in range(ambient.dim)])

    @property
    def dim(self):
        return len(self.basis)

    def degrees(self):
        """Degree of each basis vector, in basis order."""
        return [vector_degree(self.ambient, v) for v in self.basis]

    def as_space(self):
        return GradedSpace(tuple(self.degrees()))

    def block(self, degree):
        return [v for v in self.basis if vector_degree(self.ambient, v) == degree]

    def dimsum(self):
        return DimPoly.from_degrees(self.degrees())

    def coordinates(self, v):
        """Coefficients of ``v`` in the stored basis, or ``None`` if ``v`` is outside."""
        v = la.vec(v)
        # rref basis: coefficient of basis vector b is v at b's pivot
        coeffs = tuple(v[_pivot(b)] for b in self.basis)
        rest = v
        for c, b in zip(coeffs, self.basis):
            if c:
                rest = la.sub(rest, la.scale(c, b))
        return coeffs if la.is_zero(rest) else None

    def __contains__(self, v):
        return self.coordinates(v) is not None

    def contains(self, other):
        check_same_ambient(self, other)
        return all(b in self for b in other.basis)

    def is_zero(self):
        return not self.basis

    def matrix(self):
        """Basis vectors as the columns of an ``ambient.dim x dim`` matrix."""
        return la.transpose(self.basis, self.ambient.dim) if self.basis else tuple(() for _ in range(self.ambient.dim))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={list(self.ambient.degrees)})"


def check_same_ambient(A, B):
    if A.ambient != B.ambient:
        raise MixedAmbient(f"{A.ambient!r} vs {B.ambient!r}")


def span_sum(A, B):
    check_same_ambient(A, B)
    return Subspace.span(A.ambient, A.basis + B.basis)


def equals(A, B):
    check_same_ambient(A, B)
    return A.basis == B.basis


def contains(A, B):
    """Whether ``B`` is a subspace of ``A``."""
    return A.contains(B)


def kernel_of_functionals(ambient, functionals):
    """Common kernel of homogeneous linear functionals.

    Each functional is a coefficient vector on the ambient coordinates and must
    be supported in a single degree, so the kernel splits degree by degree.
    """
    by_degree = {d: [] for d in ambient.degree_set()}
    for f in functionals:
        f = la.vec(f)
        d = vector_degree(ambient, f)
        if d is not None:
            by_degree[d].append(f)
    blocks = {}
    for d in ambient.degree_set():
        idx = ambient.indices(d)
        rows = [tuple(f[i] for i in idx) for f in by_degree[d]]
        vs = []
        for n in la.nullspace(rows, len(idx)):
            full = [la.ZERO] * ambient.dim
            for j, i in enumerate(idx):
                full[i] = n[j]
            vs.append(tuple(full))
        if vs:
            blocks[d] = vs
    return Subspace._from_blocks(ambient, blocks)


def annihilator(A):
    """The annihilator of ``A`` as a subspace of the dual space."""
    V = A.ambient
    D = dual(V)
    # a functional of dual degree -d only sees degree d vectors
    return kernel_of_functionals(D, A.basis)


def intersect(A, B):
    check_same_ambient(A, B)
    V = A.ambient
    # vectors of A killed by the annihilator of B
    ann = annihilator(B)
    blocks = {}
    for d in V.degree_set():
        Ad = A.block(d)
        if not Ad:
            continue
        ann_d = ann.block(-d)
        rows = [tuple(la.dot(a, f) for a in Ad) for f in ann_d]
        vs = []
        for x in la.nullspace(rows, len(Ad)):
            v = la.zeros(V.dim)
            for c, a in zip(x, Ad):
                if c:
                    v = la.add(v, la.scale(c, a))
            vs.append(v)
        if vs:
            blocks[d] = vs
    return Subspace._from_blocks(V, blocks)


def complement(A, B=None):
    """A deterministic complement of ``A`` inside ``B`` (default: the ambient).

    Spanning vectors are taken greedily, first from the basis of ``B`` (or the
    standard basis) in order.
    """
    V = A.ambient
    candidates = B.basis if B is not None else [la.unit(V.dim, i) for i in range(V.dim)]
    current = A
    chosen = []
    for c in candidates:
        if c not in current:
            chosen.append(c)
            current = Subspace.span(V, current.basis + (c,))
    return Subspace.span(V, chosen)


def complement_vectors(A, B=None):
    """Like ``complement`` but returns the chosen vectors in selection order."""
    V = A.ambient
    candidates = B.basis if B is not None else [la.unit(V.dim, i) for i in range(V.dim)]
    current = A
    chosen = []
    for c in candidates:
        if c not in current:
            chosen.append(c)
            current = Subspace.span(V, current.basis + (c,))
    return chosen


def quotient(V, A):
    """The quotient ``V / A``.

    Returns ``(Q, proj)`` where ``Q`` is a graded space of representatives
    (the standard basis vectors at non-pivot positions of ``A``) and ``proj``
    is the ``Q.dim x V.dim`` matrix of the projection.
    """
    if A.ambient != V:
        raise MixedAmbient("subspace does not live in the given space")
    pivots = [_pivot(b) for b in A.basis]
    free = [i for i in range(V.dim) if i not in pivots]
    rows = []
    for j in free:
        row = [la.ZERO] * V.dim
        row[j] = la.ONE
        # v - sum_r v[p_r] b_r, read off at coordinate j
        for b, p in zip(A.basis, pivots):
            if b[j]:
                row[p] -= b[j]
        rows.append(tuple(row))
    return GradedSpace(tuple(V.degrees[j] for j in free)), tuple(rows)


def apply_matrix(M, A, target):
    """Image of the subspace ``A`` under the degree-preserving matrix ``M``."""
    return Subspace.span(target, [la.matvec(M, b) for b in A.basis])


# ------------------------------------------------------- linear relations


def compose_relations(g1, split1, g2, split2, target):
    """Compose linear relations given by graphs.

    ``g1`` lives in ``A x B`` with ``A`` of dimension ``split1``; ``g2`` lives
    in ``B x C`` with ``B`` of dimension ``split2``. Returns the graph of
    ``g2 . g1`` as a subspace of ``target = A x C``.
    """
    nB = g1.ambient.dim - split1
    if nB != split2:
        raise MixedAmbient("middle spaces of the relations differ")
    degs = set(g1.ambient.degree_set()) | set(g2.ambient.degree_set())
    blocks = {}
    for d in sorted(degs):
        L1 = g1.block(d)
        L2 = g2.block(d)
        # sum x_i b_i - sum y_j b'_j = 0
        cols = [v[split1:] for v in L1] + [la.scale(-1, v[:split2]) for v in L2]
        rows = la.transpose(cols, nB)
        vs = []
        for sol in la.nullspace(rows, len(cols)):
            x, y = sol[: len(L1)], sol[len(L1):]
            a = la.zeros(split1)
            for c, v in zip(x, L1):
                if c:
                    a = la.add(a, la.scale(c, v[:split1]))
            cpart = la.zeros(g2.ambient.dim - split2)
            for c, v in zip(y, L2):
                if c:
                    cpart = la.add(cpart, la.scale(c, v[split2:]))
            w = a + cpart
            if not la.is_zero(w):
                vs.append(w)
        if vs:
            blocks[d] = vs
    return Subspace.span(target, [v for vs in blocks.values() for v in vs])


def swap_graph(g, split, target):
    """Transpose a relation graph living in ``A x B`` (``A`` of dimension ``split``)."""
    return Subspace.span(target, [v[split:] + v[:split] for v in g.basis])


def relation_image(g, split, target):
    return Subspace.span(target, [v[split:] for v in g.basis])


def relation_kernel(g, split, source):
    """``{a : (a, 0) in g}``."""
    n = g.ambient.dim
    zero_tail = Subspace.span(g.ambient, [la.unit(n, i) for i in range(split)])
    return Subspace.span(source, [v[:split] for v in intersect(g, zero_tail).basis])


def graph_of_map(M, source, target):
    """Graph ``{(v, M v)}`` in ``source x target``."""
    P = product(source, target)
    return Subspace.span(P, [la.unit(source.dim, j) + tuple(row[j] for row in M) for j in range(source.dim)])


def map_from_graph(g, split):
    """Matrix of the map whose graph is ``g``, or ``None`` if ``g`` is not a graph."""
    n = g.ambient.dim
    m = n - split
    src = [v[:split] for v in g.basis]
    if la.rank(src, split) != split or len(g.basis) != split:
        return None
    cols = []
    for j in range(split):
        c = la.combination(src, la.unit(split, j))
        img = la.zeros(m)
        for x, v in zip(c, g.basis):
            if x:
                img = la.add(img, la.scale(x, v[split:]))
        cols.append(img)
    return la.transpose(cols) if m else tuple()


__all__ = [
    "GradedSpace", "DimPoly", "Subspace", "POINT", "shift", "dual", "product", "dimsum",
    "span_sum", "intersect", "quotient", "annihilator", "equals", "contains", "complement",
    "compose_relations", "swap_graph", "graph_of_map", "map_from_graph",
]
