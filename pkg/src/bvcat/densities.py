"""Exact prefactors, Berezinians and linear (half-)densities.

A ``Prefactor`` stands for the real number

    q * sqrt(r) * (2 pi)^(a/2) * hbar^(b/2)

with ``q`` rational, ``r`` a squarefree positive integer and ``a, b``
integers. The representation is normalised so that equality is structural.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import NotABasis, NotComplementary, NotInvertible
from .graded import GradedSpace, vector_degree


def _squarefree_split(n):
    """Write ``n = s * k**2`` with ``s`` squarefree; return ``(s, k)``."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    r = math.isqrt(n)
    if r * r == n:
        return 1, r
    s, k = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            k *= p ** (e // 2)
            if e & 1:
                s *= p
        p += 1 if p == 2 else 2
    return s * n, k


@dataclass(frozen=True)
class Prefactor:
    q: Fraction
    r: int = 1
    two_pi_half: int = 0
    hbar_half: int = 0

    def __post_init__(self):
        q = la.frac(self.q)
        r = self.r
        if isinstance(r, Fraction):
            if r.denominator != 1:
                raise ValueError("radicand must be an integer")
            r = r.numerator
        if r <= 0:
            raise ValueError("radicand must be positive")
        s, k = _squarefree_split(r)
        q *= k
        if q == 0:
            s, a, b = 1, 0, 0
        else:
            a, b = self.two_pi_half, self.hbar_half
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", s)
        object.__setattr__(self, "two_pi_half", a)
        object.__setattr__(self, "hbar_half", b)

    @classmethod
    def sqrt_of(cls, x):
        """``sqrt(x)`` for a non-negative rational ``x``."""
        x = la.frac(x)
        if x < 0:
            raise ValueError("square root of a negative number")
        if x == 0:
            return cls(Fraction(0))
        # sqrt(p/q) = sqrt(p q) / q
        return cls(Fraction(1, x.denominator), x.numerator * x.denominator)

    @classmethod
    def one(cls):
        return cls(Fraction(1))

    def __mul__(self, other):
        if not isinstance(other, Prefactor):
            other = Prefactor(la.frac(other))
        g = math.gcd(self.r, other.r)
        # sqrt(r1) sqrt(r2) = g sqrt(r1 r2 / g^2)
        return Prefactor(
            self.q * other.q * g,
            (self.r // g) * (other.r // g),
            self.two_pi_half + other.two_pi_half,
            self.hbar_half + other.hbar_half,
        )

    __rmul__ = __mul__

    def inverse(self):
        if self.q == 0:
            raise ZeroDivisionError("zero prefactor")
        return Prefactor(1 / (self.q * self.r), self.r, -self.two_pi_half, -self.hbar_half)

    def __truediv__(self, other):
        if not isinstance(other, Prefactor):
            other = Prefactor(la.frac(other))
        return self * other.inverse()

    def __neg__(self):
        return Prefactor(-self.q, self.r, self.two_pi_half, self.hbar_half)

    def abs(self):
        return Prefactor(abs(self.q), self.r, self.two_pi_half, self.hbar_half)

    def __pow__(self, n):
        out = Prefactor.one()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_zero(self):
        return self.q == 0

    def __str__(self):
        parts = [str(self.q)]
        if self.r != 1:
            parts.append(f"sqrt({self.r})")
        for name, k in (("2pi", self.two_pi_half), ("hbar", self.hbar_half)):
            if k:
                parts.append(f"{name}^{k // 2}" if k % 2 == 0 else f"{name}^({k}/2)")
        return " * ".join(parts)


def abs_power(x, weight):
    """``|x|**weight`` as a Prefactor, for ``weight`` a multiple of one half."""
    weight = la.frac(weight)
    if (2 * weight).denominator != 1:
        raise ValueError("only half-integral weights are representable")
    x = abs(la.frac(x))
    n = int(2 * weight)
    if x == 0:
        if n <= 0:
            raise ZeroDivisionError("zero to a non-positive power")
        return Prefactor(Fraction(0))
    base = Prefactor.sqrt_of(x)
    return base ** n


# ---------------------------------------------------------- Berezinian


def berezinian(space, vectors):
    """Berezinian of the basis change from the standard basis to ``vectors``.

    ``vectors`` must be homogeneous and form a basis of ``space``; the result
    is ``det(even block) / det(odd block)``.
    """
    n = space.dim
    if len(vectors) != n:
        raise NotABasis(f"expected {n} vectors, got {len(vectors)}")
    even = [i for i in range(n) if not space.parity(i)]
    odd = [i for i in range(n) if space.parity(i)]
    ev, od = [], []
    for v in vectors:
        d = vector_degree(space, v)
        if d is None:
            raise NotABasis("zero vector in basis")
        (od if d & 1 else ev).append(v)
    if len(ev) != len(even):
        raise NotABasis("wrong number of even vectors")
    de = la.det([[v[i] for v in ev] for i in even]) if even else la.ONE
    do = la.det([[v[i] for v in od] for i in odd]) if odd else la.ONE
    if de == 0 or do == 0:
        raise NotABasis("vectors are linearly dependent")
    return de / do


def berezinian_matrix(space, A):
    """Berezinian of a degree-preserving matrix (columns are images of the basis)."""
    return berezinian(space, la.transpose(A))


@dataclass(frozen=True)
class LinDensity:
    """A linear density of given weight, stored by its value on the standard basis."""

    space: GradedSpace
    coefficient: Prefactor
    weight: Fraction = Fraction(1, 2)

    def evaluate(self, vectors):
        """Value on the basis ``vectors``: ``coefficient * |Ber|^weight``."""
        return self.coefficient * abs_power(berezinian(self.space, vectors), self.weight)

    def __mul__(self, other):
        if isinstance(other, LinDensity):
            raise TypeError("use tensor() for products of densities")
        return LinDensity(self.space, self.coefficient * other, self.weight)


def half_density(space, coefficient=None):
    return LinDensity(space, coefficient or Prefactor.one(), Fraction(1, 2))


def tensor(rho1, rho2):
    """Density on the product space with the concatenated standard basis."""
    if rho1.weight != rho2.weight:
        raise ValueError("densities of different weights")
    sp = GradedSpace(rho1.space.degrees + rho2.space.degrees)
    return LinDensity(sp, rho1.coefficient * rho2.coefficient, rho1.weight)


def _check_complementary(space, A, B):
    vs = list(A) + list(B)
    if len(vs) != space.dim or la.rank(vs, space.dim) != space.dim:
        raise NotComplementary("pieces do not span the space directly")


def split_density(rho, A, B, rho_A=None):
    """Split ``rho`` along ``V = A + B`` given by bases ``A`` and ``B``.

    The pieces are densities on the coordinate spaces of the bases. ``rho_A``
    fixes the first factor (default: value one on ``A``); the second factor is
    then determined.
    """
    _check_complementary(rho.space, A, B)
    SA = GradedSpace(tuple(vector_degree(rho.space, a) for a in A))
    SB = GradedSpace(tuple(vector_degree(rho.space, b) for b in B))
    if rho_A is None:
        rho_A = LinDensity(SA, Prefactor.one(), rho.weight)
    total = rho.evaluate(list(A) + list(B))
    return rho_A, LinDensity(SB, total / rho_A.coefficient, rho.weight)


def fuse_density(rho_A, rho_B, space, A, B):
    """Inverse of ``split_density``: the density on ``space`` with the given pieces."""
    _check_complementary(space, A, B)
    if rho_A.weight != rho_B.weight:
        raise ValueError("densities of different weights")
    value = rho_A.coefficient * rho_B.coefficient
    return LinDensity(space, value / abs_power(berezinian(space, list(A) + list(B)), rho_A.weight), rho_A.weight)


def lagrangian_density(rho, V, L_basis):
    """The weight-one density on a Lagrangian induced by a half-density on ``V``.

    Uses the complement dual to ``L_basis`` under the symplectic form.
    """
    dual = dual_complement(V, L_basis)
    S = GradedSpace(tuple(vector_degree(V.space, a) for a in L_basis))
    return LinDensity(S, rho.evaluate(list(L_basis) + dual), Fraction(1))


def dual_complement(V, basis):
    """Vectors ``b_j`` with ``omega(basis_i, b_j) = delta_ij``.

    Only the pairing matters for densities, so any solution will do.
    """
    n = V.dim
    out = []
    for j, _ in enumerate(basis):
        # omega(a_i, b) = a_i^T Omega b
        rows = [tuple(la.dot(a, col) for col in la.transpose(V.omega)) for a in basis]
        target = la.unit(len(basis), j)
        deg = 1 - vector_degree(V.space, basis[j])
        idx = V.space.indices(deg)
        sub = [tuple(r[i] for i in idx) for r in rows]
        sol = la.solve(sub, target, len(idx))
        if sol is None:
            raise NotInvertible("basis does not pair non-degenerately")
        b = [la.ZERO] * n
        for k, i in enumerate(idx):
            b[i] = sol[k]
        out.append(tuple(b))
    return out
