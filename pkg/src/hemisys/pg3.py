"""Points, lines, planes and the Hermitian surface of PG(3,q^2).

A point is a 4-tuple of field-element ints, normalized so the first
nonzero coordinate is 1.  Normalized points are packed into a single
int64 whose numeric order is digit-lex order on the coordinate digits,
so minima over packed arrays pick canonical representatives.  A line is
identified by its canonical key: the ordered pair of the two smallest
packed points on it.

Two Hermitian frames are supported, both with Gram matrix G satisfying
G = G^T with entries in the prime field:

* diagonal_cp:  X1^(q+1) +   X2^(q+1) = X0^q X3 + X0 X3^q
* ft:           X1^(q+1) + 2 X2^(q+1) = X3^q X0 + X3 X0^q

and the surface predicate is x^T G x^(q) = 0 in both cases.
"""

from __future__ import annotations

import numpy as np

from .gf import FieldCtx, vec_add, vec_mul


class EqualPoints(ValueError):
    pass


class NotOnSurface(ValueError):
    pass


class TooLarge(ValueError):
    pass


class HermitianFrame:
    """Hermitian surface frame: field, Gram matrix and derived counts."""

    def __init__(self, tag: str, ctx: FieldCtx, gram):
        assert ctx.d % 2 == 0
        self.tag = tag
        self.ctx = ctx
        self.q = ctx.p ** (ctx.d // 2)
        self.gram = tuple(tuple(int(x) for x in row) for row in gram)
        self.sparse = [(i, j, self.gram[i][j])
                       for i in range(4) for j in range(4) if self.gram[i][j]]
        q2 = ctx.order
        for i in range(4):
            for j in range(4):
                gij = self.gram[i][j]
                assert ctx.pow(gij, self.q) == self.gram[j][i], "Gram not Hermitian"
        self.num_points = (self.q ** 3 + 1) * (self.q ** 2 + 1)
        self.num_generators = (self.q ** 3 + 1) * (self.q + 1)
        assert q2 == self.q ** 2

    def __repr__(self):
        return f"HermitianFrame({self.tag}, q={self.q})"


def cp_frame(ctx: FieldCtx) -> HermitianFrame:
    n1 = ctx.neg_np[1]
    g = [[0, 0, 0, n1], [0, 1, 0, 0], [0, 0, 1, 0], [n1, 0, 0, 0]]
    return HermitianFrame("diagonal_cp", ctx, g)


def ft_frame(ctx: FieldCtx) -> HermitianFrame:
    n1 = ctx.neg_np[1]
    g = [[0, 0, 0, n1], [0, 1, 0, 0], [0, 0, 2 % ctx.p, 0], [n1, 0, 0, 0]]
    return HermitianFrame("ft", ctx, g)


# ---------------------------------------------------------------------------
# points

def normalize(ctx: FieldCtx, coords) -> tuple:
    c = tuple(int(x) for x in coords)
    for x in c:
        if x:
            s = ctx.inv(x)
            return tuple(ctx.mul(y, s) for y in c)
    raise ValueError("zero vector is not a projective point")


def pack(ctx: FieldCtx, coords) -> int:
    n = ctx.order
    r = ctx.rank_np
    c = coords
    return int(((int(r[c[0]]) * n + int(r[c[1]])) * n + int(r[c[2]])) * n + int(r[c[3]]))


def unpack(ctx: FieldCtx, packed: int) -> tuple:
    n = ctx.order
    u = ctx.unrank_np
    r3 = packed % n
    packed //= n
    r2 = packed % n
    packed //= n
    r1 = packed % n
    r0 = packed // n
    return (int(u[r0]), int(u[r1]), int(u[r2]), int(u[r3]))


def pack_point(ctx: FieldCtx, coords) -> int:
    return pack(ctx, normalize(ctx, coords))


def norm_pack_batch(ctx: FieldCtx, c0, c1, c2, c3):
    """Normalize and pack arrays of coordinates (no all-zero rows allowed)."""
    piv = np.where(c0 != 0, c0, np.where(c1 != 0, c1, np.where(c2 != 0, c2, c3)))
    s = ctx.inv_np[piv]
    r = ctx.rank_np
    n = ctx.order
    out = r[vec_mul(ctx, c0, s)].astype(np.int64)
    out = out * n + r[vec_mul(ctx, c1, s)]
    out = out * n + r[vec_mul(ctx, c2, s)]
    out = out * n + r[vec_mul(ctx, c3, s)]
    return out


def unpack_batch(ctx: FieldCtx, packed):
    n = ctx.order
    u = ctx.unrank_np
    v = np.asarray(packed, dtype=np.int64)
    c3 = u[v % n]
    v = v // n
    c2 = u[v % n]
    v = v // n
    c1 = u[v % n]
    c0 = u[v // n]
    return c0, c1, c2, c3


# ---------------------------------------------------------------------------
# Hermitian form, surface, tangent planes

def herm_form(frame: HermitianFrame, A, B) -> int:
    """Sesquilinear form A^T G B^(q); zero iff A is on B's tangent plane."""
    ctx = frame.ctx
    h = ctx.d // 2
    acc = 0
    for i, j, g in frame.sparse:
        acc = ctx.add(acc, ctx.mul(g, ctx.mul(A[i], ctx.frobenius(B[j], h))))
    return acc


def on_surface(frame: HermitianFrame, P) -> bool:
    return herm_form(frame, P, P) == 0


def on_surface_batch(frame: HermitianFrame, c0, c1, c2, c3):
    ctx = frame.ctx
    fr = ctx.frob_np(ctx.d // 2)
    cs = (c0, c1, c2, c3)
    acc = np.zeros_like(np.asarray(c0, dtype=np.int64))
    for i, j, g in frame.sparse:
        term = vec_mul(ctx, cs[i], fr[cs[j]])
        if g != 1:
            term = vec_mul(ctx, np.full_like(term, g), term)
        acc = vec_add(ctx, acc, term)
    return acc == 0


def tangent_plane(frame: HermitianFrame, P) -> tuple:
    """Coefficients (a0..a3) of the tangent plane sum a_i X_i = 0 at P."""
    if not on_surface(frame, P):
        raise NotOnSurface(f"{P} is not on the surface")
    ctx = frame.ctx
    h = ctx.d // 2
    Pq = [ctx.frobenius(x, h) for x in P]
    return tuple(
        _dot4(ctx, frame.gram[i], Pq) for i in range(4))


def _dot4(ctx, row, vec):
    acc = 0
    for a, b in zip(row, vec):
        if a and b:
            acc = ctx.add(acc, ctx.mul(a, b))
    return acc


def on_plane(ctx: FieldCtx, coeffs, P) -> bool:
    return _dot4(ctx, coeffs, P) == 0


def pole(frame: HermitianFrame, coeffs) -> tuple:
    """Pole of a plane under the unitary polarity (inverse of tangent_plane)."""
    ctx = frame.ctx
    h = ctx.d // 2
    gi = mat_inv(ctx, frame.gram)
    v = [_dot4(ctx, gi[i], coeffs) for i in range(4)]
    return normalize(ctx, tuple(ctx.frobenius(x, ctx.d - h) for x in v))


# ---------------------------------------------------------------------------
# 4x4 matrix helpers over the field

def mat_vec(ctx: FieldCtx, M, v):
    return tuple(_dot4(ctx, M[i], v) for i in range(4))


def mat_mul(ctx: FieldCtx, A, B):
    return tuple(
        tuple(
            _sum4(ctx, [ctx.mul(A[i][k], B[k][j]) for k in range(4)])
            for j in range(4))
        for i in range(4))


def _sum4(ctx, xs):
    acc = 0
    for x in xs:
        acc = ctx.add(acc, x)
    return acc


def mat_inv(ctx: FieldCtx, M):
    n = 4
    a = [list(row) for row in M]
    b = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        s = ctx.inv(a[col][col])
        a[col] = [ctx.mul(x, s) for x in a[col]]
        b[col] = [ctx.mul(x, s) for x in b[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(a[r], a[col])]
                b[r] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(b[r], b[col])]
    return tuple(tuple(row) for row in b)


def mat_frob(ctx: FieldCtx, M, k: int):
    return tuple(tuple(ctx.frobenius(x, k) for x in row) for row in M)


def mat_transpose(M):
    return tuple(tuple(M[j][i] for j in range(4)) for i in range(4))


# ---------------------------------------------------------------------------
# lines

def line_points_batch(ctx: FieldCtx, A, B):
    """Packed point lists of the lines through row pairs of A, B; (n, q^2+1)."""
    n = ctx.order
    lam = np.arange(n, dtype=np.int64)
    cols = []
    for j in range(4):
        lb = vec_mul(ctx, lam[None, :], B[:, j][:, None])
        cols.append(vec_add(ctx, A[:, j][:, None], lb))
    for j in range(4):
        cols[j] = np.concatenate([cols[j], B[:, j][:, None]], axis=1)
    return norm_pack_batch(ctx, cols[0], cols[1], cols[2], cols[3])


def line_keys_batch(ctx: FieldCtx, A, B):
    """Canonical keys (two smallest packed points, ordered) for line batches."""
    pts = line_points_batch(ctx, A, B)
    two = np.partition(pts, 1, axis=1)[:, :2]
    two.sort(axis=1)
    return two


def line_points_table(ctx: FieldCtx, keys) -> np.ndarray:
    """(n, q^2+1) packed point table of the lines given by key rows."""
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 2)
    out = []
    for lo in range(0, len(keys), 4096):
        chunk = keys[lo:lo + 4096]
        a = np.stack(unpack_batch(ctx, chunk[:, 0]), axis=1)
        b = np.stack(unpack_batch(ctx, chunk[:, 1]), axis=1)
        out.append(line_points_batch(ctx, a, b))
    return np.concatenate(out, axis=0)


def line_points(ctx: FieldCtx, A, B) -> np.ndarray:
    A = np.asarray([A], dtype=np.int64)
    B = np.asarray([B], dtype=np.int64)
    return np.sort(line_points_batch(ctx, A, B)[0])


def line_key(ctx: FieldCtx, A, B) -> tuple:
    if normalize(ctx, A) == normalize(ctx, B):
        raise EqualPoints("line through equal points")
    k = line_keys_batch(ctx,
                        np.asarray([A], dtype=np.int64),
                        np.asarray([B], dtype=np.int64))
    return (int(k[0, 0]), int(k[0, 1]))


def key_points(ctx: FieldCtx, key) -> tuple:
    return unpack(ctx, key[0]), unpack(ctx, key[1])


def point_on_line(ctx: FieldCtx, A, B, P) -> bool:
    """Linear dependence of P on {A, B} via 3x3 minors."""
    rows = (A, B, P)
    for drop in range(4):
        idx = [i for i in range(4) if i != drop]
        m = [[rows[r][c] for c in idx] for r in range(3)]
        det = _det3(ctx, m)
        if det != 0:
            return False
    return True


def _det3(ctx, m):
    t1 = ctx.mul(m[0][0], ctx.sub(ctx.mul(m[1][1], m[2][2]), ctx.mul(m[1][2], m[2][1])))
    t2 = ctx.mul(m[0][1], ctx.sub(ctx.mul(m[1][0], m[2][2]), ctx.mul(m[1][2], m[2][0])))
    t3 = ctx.mul(m[0][2], ctx.sub(ctx.mul(m[1][0], m[2][1]), ctx.mul(m[1][1], m[2][0])))
    return ctx.add(ctx.sub(t1, t2), t3)


def is_generator(frame: HermitianFrame, A, B) -> bool:
    """Two-point criterion: both on the surface and mutually conjugate."""
    return (herm_form(frame, A, A) == 0 and herm_form(frame, B, B) == 0
            and herm_form(frame, A, B) == 0)


def is_generator_key(frame: HermitianFrame, key) -> bool:
    A, B = key_points(frame.ctx, key)
    return is_generator(frame, A, B)


def check_generators_batch(frame: HermitianFrame, keys):
    """Indices of key rows that fail the generator criterion."""
    ctx = frame.ctx
    a0, a1, a2, a3 = unpack_batch(ctx, keys[:, 0])
    b0, b1, b2, b3 = unpack_batch(ctx, keys[:, 1])
    ok = on_surface_batch(frame, a0, a1, a2, a3)
    ok &= on_surface_batch(frame, b0, b1, b2, b3)
    fr = ctx.frob_np(ctx.d // 2)
    acc = np.zeros(len(keys), dtype=np.int64)
    av = (a0, a1, a2, a3)
    bv = (b0, b1, b2, b3)
    for i, j, g in frame.sparse:
        term = vec_mul(ctx, av[i], fr[bv[j]])
        if g != 1:
            term = vec_mul(ctx, np.full_like(term, g), term)
        acc = vec_add(ctx, acc, term)
    ok &= acc == 0
    return np.nonzero(~ok)[0]


# ---------------------------------------------------------------------------
# generators through a point

def plane_kernel_basis(ctx: FieldCtx, coeffs):
    """Three spanning points of the plane sum c_i X_i = 0."""
    piv = next(i for i in range(4) if coeffs[i])
    s = ctx.inv(coeffs[piv])
    basis = []
    for i in range(4):
        if i == piv:
            continue
        v = [0, 0, 0, 0]
        v[i] = 1
        v[piv] = ctx.neg(ctx.mul(coeffs[i], s))
        basis.append(tuple(v))
    return basis


def generators_through(frame: HermitianFrame, P) -> list:
    """The q+1 generator keys through a surface point P."""
    ctx = frame.ctx
    P = normalize(ctx, P)
    partners = _generator_partners(frame, P)
    A = np.asarray([P] * len(partners), dtype=np.int64)
    B = np.asarray(partners, dtype=np.int64)
    keys = line_keys_batch(ctx, A, B)
    out = sorted({(int(a), int(b)) for a, b in keys})
    assert len(out) == frame.q + 1, f"expected {frame.q + 1} generators, got {len(out)}"
    return out


def _generator_partners(frame: HermitianFrame, P):
    """One surface point on each generator through P (transversal scan)."""
    ctx = frame.ctx
    coeffs = tangent_plane(frame, P)
    piv = next(i for i in range(4) if coeffs[i])
    i0 = next(i for i in range(4) if i != piv and P[i])
    basis = [v for v in plane_kernel_basis(ctx, coeffs)
             if v[i0] == 0]
    u, v = basis[0], basis[1]
    hits = []
    for lam in range(ctx.order):
        R = tuple(ctx.add(u[j], ctx.mul(lam, v[j])) for j in range(4))
        if on_surface(frame, R):
            hits.append(normalize(ctx, R))
    if on_surface(frame, v):
        hits.append(normalize(ctx, v))
    return hits


# ---------------------------------------------------------------------------
# bulk enumeration

def _trace_fibers(ctx: FieldCtx):
    """Map value -> sorted array of x with x + x^q = value (q fibres of size q)."""
    h = ctx.d // 2
    xs = np.arange(ctx.order, dtype=np.int64)
    tr = vec_add(ctx, xs, ctx.frob_np(h)[xs])
    fibers = {}
    order = np.argsort(tr, kind="stable")
    sorted_tr = tr[order]
    bounds = np.searchsorted(sorted_tr, np.unique(sorted_tr))
    uniq = np.unique(sorted_tr)
    for i, c in enumerate(uniq):
        lo = bounds[i]
        hi = bounds[i + 1] if i + 1 < len(bounds) else ctx.order
        fibers[int(c)] = np.sort(order[lo:hi])
    return fibers


def enumerate_surface(frame: HermitianFrame) -> np.ndarray:
    """Sorted packed array of all (q^3+1)(q^2+1) surface points."""
    ctx = frame.ctx
    q, n = frame.q, ctx.order
    h = ctx.d // 2
    e = frame.gram[2][2]
    fr = ctx.frob_np(h)
    xs = np.arange(n, dtype=np.int64)
    norms = vec_mul(ctx, xs, fr[xs])          # x^(q+1)
    x1 = np.repeat(xs, n)
    x2 = np.tile(xs, n)
    rhs = vec_add(ctx, norms[x1],
                  vec_mul(ctx, np.full(n * n, e, dtype=np.int64), norms[x2]))
    fibers = _trace_fibers(ctx)
    fiber_rows = np.zeros((n, q), dtype=np.int64)
    for c, arr in fibers.items():
        fiber_rows[c] = arr
    x3 = fiber_rows[rhs]                      # (n*n, q)
    m = n * n * q
    c0 = np.ones(m, dtype=np.int64)
    c1 = np.repeat(x1, q)
    c2 = np.repeat(x2, q)
    c3 = x3.reshape(-1)
    affine = norm_pack_batch(ctx, c0, c1, c2, c3)

    # X0 = 0 part: (0,0,0,1) plus (0,1,x2,x3) with 1 + e*x2^(q+1) = 0
    neg_inv_e = ctx.neg(ctx.inv(e))
    sols = ctx.power_residue_solutions(neg_inv_e, q + 1)
    parts = [np.asarray([pack_point(ctx, (0, 0, 0, 1))], dtype=np.int64)]
    if sols:
        s2 = np.repeat(np.asarray(sols, dtype=np.int64), n)
        s3 = np.tile(xs, len(sols))
        z = np.zeros(len(s2), dtype=np.int64)
        parts.append(norm_pack_batch(ctx, z, np.ones_like(s2), s2, s3))
    out = np.concatenate([affine] + parts)
    out = np.unique(out)
    assert len(out) == frame.num_points, (len(out), frame.num_points)
    return out


def enumerate_generators(frame: HermitianFrame, force: bool = False) -> list:
    """All generator keys; intended for q <= 7 unless force is set."""
    if frame.q > 7 and not force:
        raise TooLarge(f"full generator enumeration at q={frame.q} is heavy; pass force")
    ctx = frame.ctx
    pts = enumerate_surface(frame)
    pairs_a = []
    pairs_b = []
    for packed in pts:
        P = unpack(ctx, int(packed))
        for R in _generator_partners(frame, P):
            pairs_a.append(P)
            pairs_b.append(R)
    A = np.asarray(pairs_a, dtype=np.int64)
    B = np.asarray(pairs_b, dtype=np.int64)
    keys = set()
    for lo in range(0, len(A), 4096):
        kb = line_keys_batch(ctx, A[lo:lo + 4096], B[lo:lo + 4096])
        keys.update((int(a), int(b)) for a, b in kb)
    out = sorted(keys)
    assert len(out) == frame.num_generators, (len(out), frame.num_generators)
    return out
