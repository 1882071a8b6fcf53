"""Exact linear algebra over the rationals.

Vectors are tuples of ``Fraction``; matrices are tuples of row tuples.
Everything here is plain Gaussian elimination, small and deterministic.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x):
    """Coerce ints, strings like ``"3/4"`` and Fractions to ``Fraction``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


def vec(xs):
    return tuple(frac(x) for x in xs)


def mat(rows):
    return tuple(vec(r) for r in rows)


def zeros(n, m=None):
    if m is None:
        return (ZERO,) * n
    return tuple((ZERO,) * m for _ in range(n))


def identity(n):
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def unit(n, i):
    return tuple(ONE if j == i else ZERO for j in range(n))


def is_zero(v):
    return all(x == 0 for x in v)


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v):
    return tuple(c * a for a in v)


def dot(u, v):
    s = ZERO
    for a, b in zip(u, v):
        if a and b:
            s += a * b
    return s


def transpose(A, ncols=None):
    if not A:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*A))


def matvec(A, v):
    return tuple(dot(row, v) for row in A)


def matmul(A, B, inner=None):
    """Product ``A @ B``; ``inner`` is only needed when ``A`` has no columns."""
    if not A:
        return ()
    Bt = transpose(B)
    if not Bt:
        ncols = len(B[0]) if B else 0
        return tuple((ZERO,) * ncols for _ in A)
    return tuple(tuple(dot(row, col) for col in Bt) for row in A)


def block_diag(*blocks):
    n = sum(len(b) for b in blocks)
    out = [[ZERO] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(b)
    return tuple(tuple(r) for r in out)


def rref(rows, ncols):
    """Reduced row echelon form.

    Returns ``(nonzero_rows, pivots)`` where ``pivots[i]`` is the pivot
    column of row ``i``.
    """
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return tuple(tuple(row) for row in M[:r]), tuple(pivots)


def rank(rows, ncols):
    return len(rref(rows, ncols)[1])


def nullspace(rows, ncols):
    """Basis of ``{x : A x = 0}`` for ``A`` given by ``rows`` (canonical order)."""
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * ncols
        x[f] = ONE
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(A, b, ncols):
    """One solution ``x`` of ``A x = b`` or ``None``."""
    aug = [tuple(row) + (bi,) for row, bi in zip(A, b)]
    R, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [ZERO] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[ncols]
    return tuple(x)


def combination(vectors, v):
    """Coefficients ``c`` with ``sum c_i vectors[i] == v`` or ``None``."""
    n = len(v)
    if not vectors:
        return () if is_zero(v) else None
    A = transpose(vectors)
    return solve(A, v, len(vectors)) if n else tuple(ZERO for _ in vectors)


def inverse(A):
    n = len(A)
    if n == 0:
        return ()
    aug = [tuple(row) + unit(n, i) for i, row in enumerate(A)]
    R, pivots = rref(aug, 2 * n)
    if len(pivots) < n or pivots[n - 1] != n - 1:
        raise ZeroDivisionError("matrix is singular")
    return tuple(tuple(row[n:]) for row in R)


def det(A):
    n = len(A)
    M = [list(r) for r in A]
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        inv = 1 / M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] * inv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d


def sparse_solve(rows, b):
    """Solve a sparse system exactly.

    ``rows`` is a list of ``{column: coefficient}`` dicts and ``b`` the
    right-hand side. Returns ``(solution_dict, pivot_rows)`` with the reduced rows keyed by
    pivot column, or ``None`` when the system is inconsistent.
    """
    pivot_rows = {}  # pivot column -> (row dict, rhs)
    order = []
    for row, rhs in zip(rows, b):
        row = {c: v for c, v in row.items() if v}
        rhs = frac(rhs)
        for c in order:
            if c in row:
                prow, prhs = pivot_rows[c]
                f = row[c]
                for k, v in prow.items():
                    nv = row.get(k, ZERO) - f * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
                rhs -= f * prhs
        if not row:
            if rhs != 0:
                return None
            continue
        c = min(row)
        inv = 1 / row[c]
        row = {k: v * inv for k, v in row.items()}
        rhs *= inv
        # keep existing pivot rows reduced
        for pc in order:
            prow, prhs = pivot_rows[pc]
            if c in prow:
                f = prow[c]
                for k, v in row.items():
                    nv = prow.get(k, ZERO) - f * v
                    if nv:
                        prow[k] = nv
                    else:
                        prow.pop(k, None)
                pivot_rows[pc] = (prow, prhs - f * rhs)
        pivot_rows[c] = (row, rhs)
        order.append(c)
    sol = {c: rhs for c, (row, rhs) in pivot_rows.items() if rhs}
    return sol, pivot_rows


def sparse_null_vector(pivot_rows, free_col):
    """Null vector of a reduced sparse system with ``free_col`` set to one."""
    x = {free_col: ONE}
    for c, (row, _) in pivot_rows.items():
        v = row.get(free_col)
        if v:
            x[c] = -v
    return x
