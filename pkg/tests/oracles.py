"""Independent reference implementations used as test oracles.

Functions here work on plain dictionaries ``{(word, g): coeff}`` and share no
code with the package: signs come from counting inversions of odd letters,
derivatives from scanning words, Wick sums from enumerating matchings.
"""

from fractions import Fraction
from itertools import permutations


def koszul_sort(word, par):
    """Sort a word; return ``(sign, sorted_word)`` or ``None`` if an odd letter repeats."""
    inv = sum(
        1
        for p in range(len(word))
        for q in range(p + 1, len(word))
        if word[p] > word[q] and par[word[p]] and par[word[q]]
    )
    out = tuple(sorted(word))
    if any(a == b and par[a] for a, b in zip(out, out[1:])):
        return None
    return (-1) ** inv, out


def normalize(terms, par):
    out = {}
    for (word, g), c in terms:
        r = koszul_sort(word, par)
        if r is None:
            continue
        s, w = r
        out[(w, g)] = out.get((w, g), 0) + s * Fraction(c)
    return {k: v for k, v in out.items() if v}


def mul(f, g, par):
    prods = [((a + b, ga + gb), ca * cb) for (a, ga), ca in f.items() for (b, gb), cb in g.items()]
    return normalize(prods, par)


def add(*fs):
    out = {}
    for f in fs:
        for k, c in f.items():
            out[k] = out.get(k, 0) + c
    return {k: v for k, v in out.items() if v}


def scale(c, f):
    return {k: c * v for k, v in f.items() if c * v}


def d_left(f, i, par):
    """Move each occurrence of ``i`` to the front and strip it."""
    out = []
    for (word, g), c in f.items():
        for p, x in enumerate(word):
            if x != i:
                continue
            odd_before = sum(par[y] for y in word[:p])
            s = -1 if par[i] and odd_before % 2 else 1
            out.append(((word[:p] + word[p + 1:], g), s * c))
    return normalize(out, par)


def word_parity(word, par):
    return sum(par[x] for x in word) % 2


def d_right(f, i, par):
    """Right derivative from the left one: sign ``(-1)^{|i| (|F| - |i|)}`` per monomial."""
    out = {}
    for (word, g), c in f.items():
        mono = {(word, g): c}
        s = -1 if par[i] and (word_parity(word, par) - par[i]) % 2 else 1
        out = add(out, scale(s, d_left(mono, i, par)))
    return out


def bracket(f, g, omega_inv, par):
    n = len(par)
    out = {}
    for i in range(n):
        for j in range(n):
            if omega_inv[i][j]:
                out = add(out, scale(omega_inv[i][j], mul(d_right(f, i, par), d_left(g, j, par), par)))
    return out


def laplacian(f, omega_inv, par):
    n = len(par)
    out = {}
    for i in range(n):
        for j in range(n):
            if omega_inv[i][j]:
                s = Fraction(-1 if par[i] else 1, 2)
                out = add(out, scale(s * omega_inv[i][j], d_left(d_left(f, j, par), i, par)))
    return out


def matchings(positions):
    if not positions:
        yield []
        return
    a = positions[0]
    for k in range(1, len(positions)):
        rest = positions[1:k] + positions[k + 1:]
        for m in matchings(rest):
            yield [(a, positions[k])] + m


def wick(word, s_inv, par):
    """Sum over all perfect matchings; each pair ``(p, q)`` gives ``-s^{word[p] word[q]}``.

    The sign is that of the permutation bringing the word to the order
    ``p1 q1 p2 q2 ...``, counted over odd letters only.
    """
    if len(word) % 2:
        return Fraction(0)
    total = Fraction(0)
    for m in matchings(list(range(len(word)))):
        order = [x for pair in m for x in pair]
        inv = sum(
            1
            for u in range(len(order))
            for v in range(u + 1, len(order))
            if order[u] > order[v] and par[word[order[u]]] and par[word[order[v]]]
        )
        val = Fraction((-1) ** inv)
        for p, q in m:
            val *= -s_inv[word[p]][word[q]]
        total += val
    return total


def permutation_sign(word, perm, par):
    """Koszul sign of reordering ``word`` by ``perm``."""
    inv = sum(
        1
        for u in range(len(perm))
        for v in range(u + 1, len(perm))
        if perm[u] > perm[v] and par[word[perm[u]]] and par[word[perm[v]]]
    )
    return (-1) ** inv


def all_permutations(n):
    return permutations(range(n))
