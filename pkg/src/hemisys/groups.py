"""Collineation groups acting on the surface and orbit computation.

Collineations are invertible 4x4 matrices over GF(q^2) modulo scalars,
acting on column points by left multiplication.  Group generators are
checked to preserve the active Hermitian form up to a scalar.

For the rational curve the relevant group is the lift of PGL(2,q^2)
acting as fractional maps t -> (at+b)/(ct+d) on the curve parameter;
for the Fuhrmann-Torres pair it is the group generated by the five
matrix families T_a, M_rho, N_sigma, R_mu, L_lambda together with the
extra commuting involution w = diag(1,-1,1,1) which swaps the two
curves.  The same five families act on parameter quadruples (u,v,s,t)
of the Delta-meeting generators; quadruple_action_check certifies that
each matrix realizes its quadruple map.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .gf import FieldCtx, vec_add, vec_mul
from . import pg3
from .pg3 import HermitianFrame
from .curves import FTFrame


class Singular(ValueError):
    pass


class OrbitBudgetExceeded(RuntimeError):
    pass


class Collineation:
    """Projective 4x4 matrix, normalized so the first nonzero entry is 1."""

    __slots__ = ("mat", "_key")

    def __init__(self, ctx: FieldCtx, mat):
        flat = [int(x) for row in mat for x in row]
        s = next((x for x in flat if x), 0)
        if not s:
            raise Singular("zero matrix")
        si = ctx.inv(s)
        flat = [ctx.mul(x, si) for x in flat]
        self.mat = tuple(tuple(flat[4 * i + j] for j in range(4)) for i in range(4))
        self._key = tuple(flat)

    def __eq__(self, other):
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def apply(self, ctx: FieldCtx, P) -> tuple:
        return pg3.normalize(ctx, pg3.mat_vec(ctx, self.mat, P))

    def apply_batch(self, ctx: FieldCtx, cols):
        """Image coordinates of points given as four equal-shape arrays."""
        out = []
        for i in range(4):
            acc = None
            for j in range(4):
                m = self.mat[i][j]
                if not m:
                    continue
                term = cols[j] if m == 1 else vec_mul(
                    ctx, np.full_like(cols[j], m), cols[j])
                acc = term if acc is None else vec_add(ctx, acc, term)
            out.append(acc if acc is not None else np.zeros_like(cols[0]))
        return out

    def compose(self, ctx: FieldCtx, other: "Collineation") -> "Collineation":
        return Collineation(ctx, pg3.mat_mul(ctx, self.mat, other.mat))

    def __repr__(self):
        return f"Collineation({self.mat})"


@dataclass
class GroupSpec:
    name: str
    gens: list


def preserves_form(frame: HermitianFrame, col: Collineation):
    """Scalar lam with M^(q)T G M = lam G, or None."""
    ctx = frame.ctx
    h = ctx.d // 2
    mq = pg3.mat_frob(ctx, col.mat, h)
    lhs = pg3.mat_mul(ctx, pg3.mat_mul(ctx, pg3.mat_transpose(mq), frame.gram),
                      col.mat)
    lam = None
    for i in range(4):
        for j in range(4):
            g = frame.gram[i][j]
            if g:
                cand = ctx.div(lhs[i][j], g)
                if lam is None:
                    lam = cand
                elif cand != lam:
                    return None
            elif lhs[i][j] != 0:
                return None
    return lam if lam else None


def apply_to_key(ctx: FieldCtx, col: Collineation, key) -> tuple:
    A, B = pg3.key_points(ctx, key)
    return pg3.line_key(ctx, col.apply(ctx, A), col.apply(ctx, B))


def apply_to_keys(ctx: FieldCtx, col: Collineation, keys) -> np.ndarray:
    """Canonical keys of the images of a batch of lines; (n,2) -> (n,2)."""
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 2)
    out = np.empty_like(keys)
    for lo in range(0, len(keys), 4096):
        hi = min(len(keys), lo + 4096)
        a = pg3.unpack_batch(ctx, keys[lo:hi, 0])
        b = pg3.unpack_batch(ctx, keys[lo:hi, 1])
        ia = col.apply_batch(ctx, a)
        ib = col.apply_batch(ctx, b)
        A = np.stack(ia, axis=1)
        B = np.stack(ib, axis=1)
        out[lo:hi] = pg3.line_keys_batch(ctx, A, B)
    return out


def orbit(ctx: FieldCtx, gens, seed_key, max_size=None) -> list:
    """Breadth-first line orbit; deterministic (sorted FIFO levels)."""
    seed = (int(seed_key[0]), int(seed_key[1]))
    seen = {seed}
    frontier = [seed]
    while frontier:
        frontier.sort()
        arr = np.asarray(frontier, dtype=np.int64)
        nxt = []
        for g in gens:
            imgs = apply_to_keys(ctx, g, arr)
            for a, b in imgs:
                k = (int(a), int(b))
                if k not in seen:
                    seen.add(k)
                    nxt.append(k)
            if max_size is not None and len(seen) > max_size:
                raise OrbitBudgetExceeded(f"orbit exceeded {max_size} lines")
        frontier = nxt
    return sorted(seen)


# ---------------------------------------------------------------------------
# rational-curve group: lift of PGL(2, q^2)

def cp_lift(ctx: FieldCtx, moeb) -> Collineation:
    """Lift of t -> (at+b)/(ct+d) to the diagonal frame.

    Acts when the curve is parametrized by (u u^s, v u^s, u v^s, v v^s)
    with s the q-power and t = v/u; the lift of a product is the product
    of the lifts up to scalars.
    """
    a, b, c, d = (x % ctx.order for x in moeb)
    ctxh = ctx.d // 2
    det = ctx.sub(ctx.mul(a, d), ctx.mul(b, c))
    if det == 0:
        raise Singular("Moebius map is singular")
    ap, bp, cp, dp = d, c, b, a            # action on (u, v)
    f = lambda x: ctx.frobenius(x, ctxh)
    m = ctx.mul
    rows = [
        [m(ap, f(ap)), m(f(ap), bp), m(ap, f(bp)), m(bp, f(bp))],
        [m(cp, f(ap)), m(dp, f(ap)), m(cp, f(bp)), m(dp, f(bp))],
        [m(ap, f(cp)), m(bp, f(cp)), m(ap, f(dp)), m(bp, f(dp))],
        [m(cp, f(cp)), m(dp, f(cp)), m(cp, f(dp)), m(dp, f(dp))],
    ]
    return Collineation(ctx, rows)


def cp_group_gens(ctx: FieldCtx) -> tuple:
    """Full lift of PGL(2,q^2) and its PSL(2,q^2) subgroup generators."""
    g = ctx.gen
    n1 = ctx.neg(1)
    shift = cp_lift(ctx, (1, 1, 0, 1))
    invmap = cp_lift(ctx, (0, n1, 1, 0))
    G = GroupSpec("cp_pgl", [shift, cp_lift(ctx, (g, 0, 0, 1)), invmap])
    H = GroupSpec("cp_psl", [shift, cp_lift(ctx, (ctx.mul(g, g), 0, 0, 1)), invmap])
    frame = pg3.cp_frame(ctx)
    for col in G.gens + H.gens:
        assert preserves_form(frame, col) is not None
    return G, H


# ---------------------------------------------------------------------------
# Fuhrmann-Torres groups: matrices and quadruple maps

def mat_T(ctx: FieldCtx, a: int):
    a2 = ctx.mul(a, a)
    return Collineation(ctx, [[1, 0, 0, 0], [0, 1, 0, 0], [a, 0, 1, 0],
                              [a2, 0, ctx.mul(2 % ctx.p, a), 1]])


def mat_M(ctx: FieldCtx, rho: int):
    return Collineation(ctx, [[ctx.inv(rho), 0, 0, 0], [0, 1, 0, 0],
                              [0, 0, 1, 0], [0, 0, 0, rho]])


def mat_L(ctx: FieldCtx, lam: int):
    return Collineation(ctx, [[1, 0, 0, 0], [0, lam, 0, 0],
                              [0, 0, 1, 0], [0, 0, 0, 1]])


def mat_N(ctx: FieldCtx, sigma: int):
    return Collineation(ctx, [[0, 0, 0, 1], [0, sigma, 0, 0],
                              [0, 0, 1, 0], [1, 0, 0, 0]])


def mat_R(ctx: FieldCtx, mu: int):
    return Collineation(ctx, [[0, 0, 0, ctx.inv(mu)], [0, 1, 0, 0],
                              [0, 0, 1, 0], [mu, 0, 0, 0]])


def mat_W(ctx: FieldCtx):
    return Collineation(ctx, [[1, 0, 0, 0], [0, ctx.neg(1), 0, 0],
                              [0, 0, 1, 0], [0, 0, 0, 1]])


def quad_T(ctx, a):
    return lambda q: (q[0], ctx.add(q[1], a), q[2], ctx.add(q[3], a))


def quad_M(ctx, rho):
    return lambda q: tuple(ctx.mul(rho, x) for x in q)


def quad_N(ctx, sigma):
    def f(q):
        u, v, s, t = q
        vi, ti = ctx.inv(v), ctx.inv(t)
        return (ctx.mul(sigma, ctx.mul(ctx.mul(vi, vi), u)), vi,
                ctx.mul(sigma, ctx.mul(ctx.mul(ti, ti), s)), ti)
    return f


def quad_R(ctx, mu):
    def f(q):
        u, v, s, t = q
        vi, ti = ctx.inv(v), ctx.inv(t)
        return (ctx.mul(mu, ctx.mul(ctx.mul(vi, vi), u)), ctx.mul(mu, vi),
                ctx.mul(mu, ctx.mul(ctx.mul(ti, ti), s)), ctx.mul(mu, ti))
    return f


def quad_L(ctx, lam):
    return lambda q: (ctx.mul(lam, q[0]), q[1], ctx.mul(lam, q[2]), q[3])


def quad_W(ctx):
    # diag(1,-1,1,1) sends (1,u,v,v^2) to (1,-u,v,v^2), which lies on the
    # opposite curve with parameters (-u, v); the line swaps its two
    # parameter pairs accordingly.
    return lambda q: (ctx.neg(q[2]), q[3], ctx.neg(q[0]), q[1])


def ft_group_gens(fr: FTFrame) -> tuple:
    """Generators of the full group, the index-2 subgroup, and w.

    The subgroup uses translations, square dilations, one sigma-inversion
    and one central scalar; adding one non-square dilation-inversion R
    yields the full group.  Orbit cardinalities certify the closure.
    """
    ctx = fr.ctx2
    q = fr.q
    eta = ctx.pow(ctx.gen, q + 1)               # primitive in GF(q)
    rho0 = ctx.mul(eta, eta)
    sigma0 = ctx.pow(ctx.gen, q - 1)            # sigma0^((q+1)/2) = -1
    lam0 = ctx.pow(ctx.gen, 2 * (q - 1))        # order (q+1)/2
    assert ctx.pow(sigma0, (q + 1) // 2) == ctx.neg(1)
    assert ctx.pow(lam0, (q + 1) // 2) == 1
    h_pairs = [
        ("T", 1, mat_T(ctx, 1), quad_T(ctx, 1)),
        ("T", eta, mat_T(ctx, eta), quad_T(ctx, eta)),
        ("M", rho0, mat_M(ctx, rho0), quad_M(ctx, rho0)),
        ("N", sigma0, mat_N(ctx, sigma0), quad_N(ctx, sigma0)),
        ("L", lam0, mat_L(ctx, lam0), quad_L(ctx, lam0)),
    ]
    g_pairs = h_pairs + [("R", eta, mat_R(ctx, eta), quad_R(ctx, eta))]
    for _, _, col, _ in g_pairs:
        assert preserves_form(fr.frame, col) is not None
    H = GroupSpec("ft_h", [c for _, _, c, _ in h_pairs])
    G = GroupSpec("ft_g", [c for _, _, c, _ in g_pairs])
    w = mat_W(ctx)
    assert preserves_form(fr.frame, w) is not None
    assert w.compose(ctx, w).mat == Collineation(
        ctx, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]).mat
    for col in G.gens:
        assert w.compose(ctx, col) == col.compose(ctx, w), "w must commute"
    return G, H, w


# ---------------------------------------------------------------------------
# quadruples of Delta-meeting generators

def quad_relations_hold(fr: FTFrame, quad) -> bool:
    ctx = fr.ctx2
    q = fr.q
    m = (q + 1) // 2
    u, v, s, t = quad
    if fr.in_gfq(v) or fr.in_gfq(t):
        return False
    fv = ctx.frobenius(v, fr.h)
    ft = ctx.frobenius(t, fr.h)
    if ctx.pow(u, m) != ctx.sub(fv, v):
        return False
    if ctx.neg(ctx.pow(s, m)) != ctx.sub(ft, t):
        return False
    d = ctx.sub(t, fv)
    if s != ctx.div(ctx.mul(d, d), ctx.frobenius(u, fr.h)):
        return False
    vt = ctx.mul(v, t)
    lhs = ctx.pow(ctx.add(v, t), q + 1)
    rhs = ctx.mul(2 % ctx.p, ctx.add(vt, ctx.frobenius(vt, fr.h)))
    return lhs == rhs


def quad_line(fr: FTFrame, quad) -> tuple:
    u, v, s, t = quad
    ctx = fr.ctx2
    P = (1, u, v, ctx.mul(v, v))
    Q = (1, s, t, ctx.mul(t, t))
    return pg3.line_key(ctx, P, Q)


def base_quadruple(fr: FTFrame) -> tuple:
    """Deterministic first quadruple: smallest v, u, t in digit-lex order."""
    ctx = fr.ctx2
    q = fr.q
    m = (q + 1) // 2
    v = next(x for x in ctx.elements_by_rank() if x and not fr.in_gfq(x))
    u = ctx.power_residue_solutions(
        ctx.sub(ctx.frobenius(v, fr.h), v), m)[0]
    two = 2 % ctx.p
    for t in ctx.elements_by_rank():
        if not t or fr.in_gfq(t):
            continue
        vt = ctx.mul(v, t)
        if ctx.pow(ctx.add(v, t), q + 1) == ctx.mul(two, ctx.add(vt, ctx.frobenius(vt, fr.h))):
            d = ctx.sub(t, ctx.frobenius(v, fr.h))
            s = ctx.div(ctx.mul(d, d), ctx.frobenius(u, fr.h))
            quad = (u, v, s, t)
            if quad_relations_hold(fr, quad):
                return quad
    raise RuntimeError("no base quadruple found")


def _random_square(ctx, q, rng):
    eta = ctx.pow(ctx.gen, q + 1)
    return ctx.pow(eta, 2 * rng.randrange(1, (q - 1) // 2 + 1))


def quadruple_action_check(fr: FTFrame, n_samples: int, seed: int = 0) -> bool:
    """Matrix action and quadruple-map action agree on sampled generators."""
    ctx = fr.ctx2
    q = fr.q
    rng = random.Random(seed)
    eta = ctx.pow(ctx.gen, q + 1)
    quad = base_quadruple(fr)

    def random_pair(rng):
        kind = rng.randrange(6)
        if kind == 0:
            a = ctx.pow(eta, rng.randrange(q - 1)) if rng.random() < 0.9 else 0
            return mat_T(ctx, a), quad_T(ctx, a)
        if kind == 1:
            rho = _random_square(ctx, q, rng)
            return mat_M(ctx, rho), quad_M(ctx, rho)
        if kind == 2:
            sigma = ctx.mul(ctx.pow(ctx.gen, q - 1),
                            ctx.pow(ctx.pow(ctx.gen, 2 * (q - 1)), rng.randrange((q + 1) // 2)))
            return mat_N(ctx, sigma), quad_N(ctx, sigma)
        if kind == 3:
            mu = ctx.mul(eta, _random_square(ctx, q, rng))
            return mat_R(ctx, mu), quad_R(ctx, mu)
        if kind == 4:
            lam = ctx.pow(ctx.pow(ctx.gen, 2 * (q - 1)), rng.randrange((q + 1) // 2))
            return mat_L(ctx, lam), quad_L(ctx, lam)
        return mat_W(ctx), quad_W(ctx)

    for _ in range(n_samples):
        col, qmap = random_pair(rng)
        image = qmap(quad)
        if not quad_relations_hold(fr, image):
            return False
        key = quad_line(fr, quad)
        if apply_to_key(ctx, col, key) != quad_line(fr, image):
            return False
        quad = image
    return True
