"""Truncated formal functions on a graded space.

A formal function is a finite sum of terms ``c * hbar^g * phi^{i1} ... phi^{ik}``
in the coordinates ``phi^i`` dual to the standard basis. The coordinate
``phi^i`` has degree ``-deg e_i``; only its parity enters the Koszul signs.
The weight of a term is ``2 g + k``. Every function carries a bound
``w_max``: all terms of weight at most ``w_max`` are exact, nothing above is
stored. ``w_max = INF`` marks an exact polynomial.
"""

from fractions import Fraction
from math import factorial

from . import linalg as la
from .errors import NotCompatible, NotUnital, SpaceMismatch, WeightNotPositive
from .graded import GradedSpace

#: truncation bound of an exact (polynomial) function
INF = float("inf")


def _weight(key):
    return 2 * key[1] + len(key[0])


def merge_monomials(a, b, par):
    """Product of sorted index tuples with its Koszul sign.

    Returns ``(sign, indices)`` or ``None`` when an odd coordinate repeats.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    odd_left = [0] * (len(a) + 1)
    for i in range(len(a) - 1, -1, -1):
        odd_left[i] = odd_left[i + 1] + par[a[i]]
    out = []
    i = j = 0
    flips = 0
    while i < len(a) and j < len(b):
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            i += 1
        elif x > y:
            if par[y]:
                flips += odd_left[i]
            out.append(y)
            j += 1
        else:
            if par[x]:
                return None
            out.append(x)
            i += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return (-1 if flips & 1 else 1), tuple(out)


def sort_with_sign(indices, par):
    """Sort a word of coordinates, returning ``(sign, sorted)`` or ``None``."""
    word = list(indices)
    sign = 1
    # insertion sort counting odd transpositions
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            if par[word[j - 1]] and par[word[j]]:
                sign = -sign
            word[j - 1], word[j] = word[j], word[j - 1]
            j -= 1
    for x, y in zip(word, word[1:]):
        if x == y and par[x]:
            return None
    return sign, tuple(word)


class FormalFunction:
    """An element of ``Sym(V*)((hbar))`` truncated at weight ``w_max``."""

    __slots__ = ("space", "terms", "w_max", "_par")

    def __init__(self, space, terms, w_max):
        if not isinstance(space, GradedSpace):
            space = GradedSpace(tuple(space))
        self.space = space
        self.w_max = INF if w_max is None or w_max == INF else int(w_max)
        self._par = tuple(d & 1 for d in space.degrees)
        clean = {}
        for key, c in (terms.items() if isinstance(terms, dict) else terms):
            idx, g = key
            idx = tuple(idx)
            c = la.frac(c)
            if c == 0 or 2 * g + len(idx) > self.w_max:
                continue
            if any(i < 0 or i >= space.dim for i in idx):
                raise IndexError("coordinate index out of range")
            if list(idx) != sorted(idx):
                res = sort_with_sign(idx, self._par)
                if res is None:
                    continue
                s, idx = res
                c = s * c
            else:
                if any(x == y and self._par[x] for x, y in zip(idx, idx[1:])):
                    continue
            k = (idx, int(g))
            v = clean.get(k, 0) + c
            if v:
                clean[k] = v
            else:
                clean.pop(k, None)
        self.terms = clean

    # ---------------------------------------------------------- builders

    @classmethod
    def zero(cls, space, w_max):
        return cls(space, {}, w_max)

    @classmethod
    def constant(cls, space, c, w_max, g=0):
        return cls(space, {((), g): c}, w_max)

    @classmethod
    def coordinate(cls, space, i, w_max):
        return cls(space, {((i,), 0): 1}, w_max)

    @classmethod
    def linear(cls, space, coeffs, w_max):
        return cls(space, {((i,), 0): c for i, c in enumerate(coeffs)}, w_max)

    def with_w_max(self, w_max):
        """Drop terms above ``w_max`` (never raises the bound)."""
        return FormalFunction(self.space, self.terms, min(w_max, self.w_max))

    # ---------------------------------------------------------- queries

    def weights(self):
        return {_weight(k) for k in self.terms}

    @property
    def min_weight(self):
        """Smallest weight present, ``None`` for the zero function."""
        return min(self.weights(), default=None)

    def lower_bound(self):
        """A lower bound on the weights of the untruncated function."""
        return min(self.weights() | {self.w_max + 1})

    def is_zero(self):
        return not self.terms

    def term_degree(self, key):
        return -sum(self.space.degrees[i] for i in key[0])

    def degree(self):
        """Degree of a homogeneous function (``None`` for zero)."""
        degs = {self.term_degree(k) for k in self.terms}
        if len(degs) > 1:
            raise ValueError("function is not homogeneous")
        return degs.pop() if degs else None

    def parity(self):
        d = self.degree()
        return 0 if d is None else d & 1

    def hbar_powers(self):
        return {k[1] for k in self.terms}

    def coefficient(self, indices, g=0):
        return self.terms.get((tuple(indices), g), Fraction(0))

    def part(self, weight=None, g=None, n=None):
        """Terms of the given weight, hbar power and/or polynomial degree."""
        out = {}
        for k, c in self.terms.items():
            if weight is not None and _weight(k) != weight:
                continue
            if g is not None and k[1] != g:
                continue
            if n is not None and len(k[0]) != n:
                continue
            out[k] = c
        return FormalFunction(self.space, out, self.w_max)

    def equal_upto(self, other, w=None):
        _same_space(self, other)
        w = min(self.w_max, other.w_max) if w is None else w
        a = {k: c for k, c in self.terms.items() if _weight(k) <= w}
        b = {k: c for k, c in other.terms.items() if _weight(k) <= w}
        return a == b

    def __eq__(self, other):
        if not isinstance(other, FormalFunction):
            return NotImplemented
        return self.space == other.space and self.w_max == other.w_max and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return f"FormalFunction(0, w_max={self.w_max})"
        parts = []
        for (idx, g), c in sorted(self.terms.items(), key=lambda kv: (_weight(kv[0]), kv[0])):
            mono = "*".join(f"x{i}" for i in idx)
            h = f"h^{g}" if g else ""
            parts.append("*".join(p for p in (str(c), h, mono) if p))
        return " + ".join(parts) + f"  [w<={self.w_max}]"

    # ------------------------------------------------------- arithmetic

    def __add__(self, other):
        if not isinstance(other, FormalFunction):
            other = FormalFunction.constant(self.space, other, self.w_max)
        _same_space(self, other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return FormalFunction(self.space, t, min(self.w_max, other.w_max))

    __radd__ = __add__

    def __neg__(self):
        return FormalFunction(self.space, {k: -c for k, c in self.terms.items()}, self.w_max)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = la.frac(c)
        return FormalFunction(self.space, {k: c * v for k, v in self.terms.items()}, self.w_max)

    def times_hbar(self, g):
        """Multiply by ``hbar^g``; the exact range moves with it."""
        return FormalFunction(self.space, {(k[0], k[1] + g): c for k, c in self.terms.items()}, self.w_max + 2 * g)

    def __mul__(self, other):
        if not isinstance(other, FormalFunction):
            return self.scale(other)
        _same_space(self, other)
        w = _product_bound(self, other)
        par = self._par
        out = {}
        for (a, ga), ca in self.terms.items():
            wa = 2 * ga + len(a)
            for (b, gb), cb in other.terms.items():
                if wa + 2 * gb + len(b) > w:
                    continue
                m = merge_monomials(a, b, par)
                if m is None:
                    continue
                s, idx = m
                k = (idx, ga + gb)
                v = out.get(k, 0) + (ca * cb if s > 0 else -ca * cb)
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return FormalFunction(self.space, out, w)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n):
        out = FormalFunction.constant(self.space, 1, self.w_max)
        for _ in range(n):
            out = out * self
        return out


def _same_space(f, g):
    if f.space != g.space:
        raise SpaceMismatch(f"functions on {f.space!r} and {g.space!r}")


def _product_bound(f, g):
    # a product term of weight w is exact once every split w = a + b is known
    return min(f.w_max + g.lower_bound(), g.w_max + f.lower_bound())


# ---------------------------------------------------------- derivatives


def d_left(f, i):
    """Left derivative with respect to ``phi^i``."""
    par = f._par
    out = {}
    for (idx, g), c in f.terms.items():
        if i not in idx:
            continue
        p = idx.index(i)
        if par[i]:
            sign = -1 if sum(par[x] for x in idx[:p]) & 1 else 1
            coeff = sign * c
        else:
            coeff = idx.count(i) * c
        k = (idx[:p] + idx[p + 1:], g)
        out[k] = out.get(k, 0) + coeff
    return FormalFunction(f.space, out, f.w_max - 1)


def d_right(f, i):
    """Right derivative with respect to ``phi^i``."""
    par = f._par
    out = {}
    for (idx, g), c in f.terms.items():
        if i not in idx:
            continue
        p = idx.index(i)
        if par[i]:
            sign = -1 if sum(par[x] for x in idx[p + 1:]) & 1 else 1
            coeff = sign * c
        else:
            coeff = idx.count(i) * c
        k = (idx[:p] + idx[p + 1:], g)
        out[k] = out.get(k, 0) + coeff
    return FormalFunction(f.space, out, f.w_max - 1)


def _check_on(f, V):
    if f.space != V.space:
        raise SpaceMismatch(f"function on {f.space!r} used on {V!r}")


def bracket(f, g, V):
    """``{f, g} = d_R f / d phi^i  omega^{ij}  d_L g / d phi^j``."""
    _check_on(f, V)
    _check_on(g, V)
    inv = V.omega_inv
    w = min(f.w_max + g.lower_bound(), g.w_max + f.lower_bound()) - 2
    out = FormalFunction.zero(V.space, w)
    dR = {}
    dL = {}
    for i in range(V.dim):
        for j in range(V.dim):
            c = inv[i][j]
            if not c:
                continue
            if i not in dR:
                dR[i] = d_right(f, i)
            if j not in dL:
                dL[j] = d_left(g, j)
            if dR[i].is_zero() or dL[j].is_zero():
                continue
            out = out + (dR[i] * dL[j]).scale(c)
    return out.with_w_max(w)


def laplacian(f, V):
    """``Delta f = 1/2 (-1)^{deg i} omega^{ij} d_L d_L f / d phi^i d phi^j``."""
    _check_on(f, V)
    inv = V.omega_inv
    out = FormalFunction.zero(V.space, f.w_max - 2)
    half = Fraction(1, 2)
    for j in range(V.dim):
        col = [(i, inv[i][j]) for i in range(V.dim) if inv[i][j]]
        if not col:
            continue
        dj = d_left(f, j)
        if dj.is_zero():
            continue
        for i, c in col:
            sign = -1 if V.space.parity(i) else 1
            out = out + d_left(dj, i).scale(half * sign * c)
    return out.with_w_max(f.w_max - 2)


def hbar_laplacian(f, V):
    return laplacian(f, V).times_hbar(1)


# ------------------------------------------------------------ series


def exp(f):
    """Truncated exponential; ``f`` must have strictly positive weight."""
    if f.lower_bound() < 1:
        raise WeightNotPositive("exponent has terms of non-positive weight")
    w = f.w_max
    if w == INF:
        raise ValueError("exponential of an exact function needs a finite truncation")
    one = FormalFunction.constant(f.space, 1, w)
    out = one
    power = one
    for n in range(1, w + 1):
        power = power * f
        if power.is_zero():
            break
        out = out + power.scale(Fraction(1, factorial(n)))
    return out.with_w_max(w)


def log(f):
    """Truncated logarithm of a function whose weight-zero part is one."""
    if f.w_max == INF:
        raise ValueError("logarithm of an exact function needs a finite truncation")
    one = FormalFunction.constant(f.space, 1, f.w_max)
    u = f - one
    if u.lower_bound() < 1:
        raise NotUnital("weight-zero part is not the constant one")
    out = FormalFunction.zero(f.space, f.w_max)
    power = one
    for n in range(1, f.w_max + 1):
        power = power * u
        if power.is_zero():
            break
        out = out + power.scale(Fraction((-1) ** (n + 1), n))
    return out.with_w_max(f.w_max)


# ----------------------------------------------------- linear changes


def pullback(f, A, new_space):
    """Pull ``f`` back along the linear map ``A: new_space -> f.space``.

    The coordinate ``phi^i`` becomes ``sum_a A[i][a] psi^a``. ``A`` must be
    degree preserving.
    """
    if not isinstance(new_space, GradedSpace):
        new_space = GradedSpace(tuple(new_space))
    for i, row in enumerate(A):
        for a, x in enumerate(row):
            if x and f.space.degrees[i] != new_space.degrees[a]:
                raise SpaceMismatch("linear map does not preserve degrees")
    forms = {}
    out = {}
    w = f.w_max
    par = tuple(d & 1 for d in new_space.degrees)
    for (idx, g), c in f.terms.items():
        # expand the product of linear forms left to right
        acc = {(): la.frac(c)}
        for i in idx:
            if i not in forms:
                forms[i] = [(a, x) for a, x in enumerate(A[i]) if x]
            nxt = {}
            for mono, cm in acc.items():
                for a, x in forms[i]:
                    m = merge_monomials(mono, (a,), par)
                    if m is None:
                        continue
                    s, new = m
                    v = nxt.get(new, 0) + (s * cm * x)
                    if v:
                        nxt[new] = v
                    else:
                        nxt.pop(new, None)
            acc = nxt
            if not acc:
                break
        for mono, cm in acc.items():
            k = (mono, g)
            v = out.get(k, 0) + cm
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return FormalFunction(new_space, out, w)


def substitute(f, M):
    """Rewrite ``f`` in new coordinates for the basis given by the columns of ``M``."""
    return pullback(f, M, f.space)


def restrict(f, C):
    """Restriction of ``f`` to the subspace ``C`` (coordinates dual to its basis)."""
    if C.ambient != f.space:
        raise SpaceMismatch("subspace of a different space")
    if not C.basis:
        return pullback(f, tuple(() for _ in range(f.space.dim)), GradedSpace(()))
    return pullback(f, C.matrix(), C.as_space())


def embed(f, space, offset):
    """Extend ``f`` to a larger space, shifting coordinate indices by ``offset``."""
    return FormalFunction(space, {(tuple(i + offset for i in k[0]), k[1]): c for k, c in f.terms.items()}, f.w_max)


def apply_derivation(f, images, parity):
    """Apply the derivation of the given parity determined by its values on coordinates.

    ``images`` maps a coordinate index to a FormalFunction; missing entries
    are sent to zero.
    """
    par = f._par
    w = f.w_max
    out = FormalFunction.zero(f.space, w)
    for (idx, g), c in f.terms.items():
        for p, i in enumerate(idx):
            img = images.get(i)
            if img is None or img.is_zero():
                continue
            if p and idx[p - 1] == i and not par[i]:
                continue  # repeated even coordinate handled by multiplicity below
            mult = idx.count(i) if not par[i] else 1
            sign = -1 if parity and sum(par[x] for x in idx[:p]) & 1 else 1
            # phi^{idx[:p]} * D(phi^i) * phi^{idx[p+1:]}; the monomial factors are exact
            big = w + 2 * abs(g) + 2 + len(idx)
            left = FormalFunction(f.space, {(idx[:p], g): c * sign * mult}, big)
            right = FormalFunction(f.space, {(idx[p + 1:], 0): 1}, big)
            term = left * img * right
            out = out + term.with_w_max(w)
    return out.with_w_max(w)


# ------------------------------------------------- quadratic functions


def quadratic_matrix(S):
    """The graded-symmetric matrix ``s`` with ``S = 1/2 s_ij phi^i phi^j``."""
    n = S.space.dim
    par = S._par
    s = [[la.ZERO] * n for _ in range(n)]
    for (idx, g), c in S.terms.items():
        if g != 0 or len(idx) != 2:
            raise NotCompatible("expected a purely quadratic function")
        i, j = idx
        if i == j:
            s[i][i] = 2 * c
        else:
            s[i][j] = c
            s[j][i] = -c if par[i] and par[j] else c
    return tuple(tuple(r) for r in s)


def quadratic_function(s, space, w_max=INF):
    """``1/2 s_ij phi^i phi^j`` for a graded-symmetric matrix ``s``."""
    n = space.dim
    terms = {}
    half = Fraction(1, 2)
    for i in range(n):
        for j in range(n):
            if s[i][j]:
                terms[((i, j), 0)] = terms.get(((i, j), 0), 0) + half * s[i][j]
    return FormalFunction(space, list(terms.items()), w_max)


def sfree_to_Q(S, V):
    """The differential ``Q^i_j = -omega^{ik} s_kj`` of a quadratic action."""
    _check_on(S, V)
    s = quadratic_matrix(S)
    inv = V.omega_inv
    n = V.dim
    return tuple(tuple(-sum((inv[i][k] * s[k][j] for k in range(n)), la.ZERO) for j in range(n)) for i in range(n))


def Q_to_sfree(Q, V, w_max=INF):
    """Inverse of ``sfree_to_Q``: ``s = -omega Q``."""
    n = V.dim
    s = tuple(tuple(-sum((V.omega[i][k] * Q[k][j] for k in range(n)), la.ZERO) for j in range(n)) for i in range(n))
    return quadratic_function(s, V.space, w_max)


def is_compatible(Q, V):
    """``omega(Q v, w) + (-1)^{deg v} omega(v, Q w) = 0`` on basis vectors."""
    n = V.dim
    for a in range(n):
        ea = la.unit(n, a)
        Qa = la.matvec(Q, ea)
        for b in range(n):
            eb = la.unit(n, b)
            sign = -1 if V.space.parity(a) else 1
            if V.pair(Qa, eb) + sign * V.pair(ea, la.matvec(Q, eb)) != 0:
                return False
    return True


def is_differential(Q, V):
    n = V.dim
    for i, row in enumerate(Q):
        for j, x in enumerate(row):
            if x and V.degrees[i] != V.degrees[j] + 1:
                return False
    return all(la.is_zero(r) for r in la.matmul(Q, Q)) if n else True
