"""Hemisystem candidates: assembly, exhaustive verification, file format.

A candidate is half of the generators of the surface: the orbit part
(one or two half-orbits of curve-meeting generators under the index-2
subgroup) together with all imaginary chords of the curve.  Verification
is exact: every point of every candidate line is counted and the full
incidence histogram must be (q+1)/2 at every one of the (q^3+1)(q^2+1)
surface points.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gf import FieldCtx, make_field, embed_subfield, vec_add, vec_mul, vec_neg
from . import pg3, curves, groups
from .curves import FTFrame
from .pg3 import HermitianFrame


class SeedInvariantFailed(RuntimeError):
    pass


class ConditionBFails(RuntimeError):
    pass


class TieRR(RuntimeError):
    pass


class NotGeneratorInSet(ValueError):
    pass


class ParseError(ValueError):
    pass


class ChecksumMismatch(ValueError):
    pass


@dataclass
class HemisystemCandidate:
    family: str                       # "cp" or "ft"
    p: int
    h: int
    eps: int | None
    chi: int | None
    lines: np.ndarray                 # (n, 2) int64, sorted rows
    provenance: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return self.p ** self.h

    def ctx2(self) -> FieldCtx:
        return make_field(self.p, 2 * self.h)

    def expected_size(self) -> int:
        q = self.q
        return (q ** 3 + 1) * (q + 1) // 2

    def key_set(self) -> set:
        return {(int(a), int(b)) for a, b in self.lines}


@dataclass
class VerificationReport:
    passed: bool
    line_count: int
    point_count: int
    histogram: dict
    wall_time: float
    expected_lines: int
    expected_points: int
    expected_incidence: int

    def summary(self) -> str:
        hist = " ".join(f"{k}:{v}" for k, v in sorted(self.histogram.items()))
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} lines={self.line_count}/{self.expected_lines} "
                f"points={self.point_count}/{self.expected_points} "
                f"histogram={{{hist}}} wall={self.wall_time:.2f}s")


def _sorted_lines(keys) -> np.ndarray:
    arr = np.asarray(sorted({(int(a), int(b)) for a, b in keys}), dtype=np.int64)
    return arr.reshape(-1, 2)


# ---------------------------------------------------------------------------
# seed generator for the ft family

def seed_generator_g0(fr: FTFrame) -> tuple:
    """The seed generator of the Delta-meeting half-orbit.

    Built from v0 = -2(1 - chi*sqrt2) b and t0 = -2(1 + chi*sqrt2) b with
    the frame's chi, the u-component sign fixed by its power relation and
    s forced by s = (t0 - v0^q)^2 / u0^q.  The line always contains
    exactly one of the two tangency points (1, +-sqrt(-2) b, b, 0); which
    one is recorded in the provenance rather than enforced, because the
    labels are pinned by the balance count instead: the half-orbit this
    seed generates meets the plus-side pencil in (q-1)/4 of its (q+1)/2
    members, which is what the half-orbit choice rule keys on.
    Returns (key, quadruple, provenance).
    """
    ctx = fr.ctx2
    q = fr.q
    m = (q + 1) // 2
    two = 2 % ctx.p
    b = fr.b
    sixteen_b2 = ctx.mul(16 % ctx.p, ctx.mul(b, b))
    chi = fr.chi
    root = fr.sqrt2 if chi == 1 else ctx.neg(fr.sqrt2)       # chi * sqrt2
    v0 = ctx.mul(ctx.neg(two), ctx.mul(ctx.sub(1, root), b))
    t0 = ctx.mul(ctx.neg(two), ctx.mul(ctx.add(1, root), b))
    denom = fr.sqrtm2 if fr.eps == 1 else ctx.neg(fr.sqrtm2)
    base = ctx.mul(ctx.div(ctx.neg(4 % ctx.p), denom),
                   ctx.mul(ctx.sub(two, root), b))
    target = ctx.sub(ctx.frobenius(v0, fr.h), v0)
    u0 = None
    u_sign = None
    for sgn, cand in ((1, base), (-1, ctx.neg(base))):
        if ctx.pow(cand, m) == target:
            u0 = cand
            u_sign = sgn
            break
    if u0 is None:
        raise SeedInvariantFailed("no sign makes u0^((q+1)/2) = v0^q - v0")
    d = ctx.sub(t0, ctx.frobenius(v0, fr.h))
    s0 = ctx.div(ctx.mul(d, d), ctx.frobenius(u0, fr.h))
    quad = (u0, v0, s0, t0)
    checks = [
        groups.quad_relations_hold(fr, quad),
        ctx.mul(ctx.frobenius(u0, fr.h), s0) == sixteen_b2,
        ctx.mul(d, d) == sixteen_b2,
        ctx.add(v0, t0) == ctx.mul(ctx.neg(4 % ctx.p), b),
        ctx.mul(v0, t0) == ctx.mul(ctx.neg(4 % ctx.p), ctx.mul(b, b)),
    ]
    if not all(checks):
        raise SeedInvariantFailed(f"structural checks failed: {checks}")
    key = groups.quad_line(fr, quad)
    A, B = pg3.key_points(ctx, key)
    if not pg3.is_generator(fr.frame, A, B):
        raise SeedInvariantFailed("seed line is not a generator")
    pts = set(int(x) for x in pg3.line_points(ctx, A, B))
    through = [e for e in (1, -1)
               if pg3.pack_point(ctx, fr.p_eps(e)) in pts]
    if len(through) != 1:
        raise SeedInvariantFailed(f"seed meets {len(through)} tangency points")
    # the closed-form sign rule picks + exactly when sqrt2 is itself a square
    rule_sign = 1 if fr.chi_q(fr.sqrt2) == 1 else -1
    prov = {"chi_used": chi, "u_sign": u_sign,
            "u_sign_matches_rule": u_sign == rule_sign,
            "tangency_point": "plus" if through[0] == 1 else "minus",
            "through_p_eps": through[0] == fr.eps}
    return key, quad, prov


def ell_line(fr: FTFrame, eps: int) -> tuple:
    """Generator joining the origin (1,0,0,0) to (1, eps*sqrt(-2)b, b, 0)."""
    return pg3.line_key(fr.ctx2, (1, 0, 0, 0), fr.p_eps(eps))


def through_point_mask(ctx: FieldCtx, keys: np.ndarray, P) -> np.ndarray:
    """Boolean mask of key rows whose line passes through the point P.

    Membership is rank([A, B, P]) = 2, tested by vanishing of all four
    3x3 minors, vectorized over the key rows.
    """
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 2)
    a = pg3.unpack_batch(ctx, keys[:, 0])
    b = pg3.unpack_batch(ctx, keys[:, 1])
    P = pg3.normalize(ctx, P)
    mask = np.ones(len(keys), dtype=bool)

    def det2(x0, y0, x1, y1):
        return vec_add(ctx, vec_mul(ctx, x0, y1), vec_neg(ctx, vec_mul(ctx, x1, y0)))

    for drop in range(4):
        idx = [i for i in range(4) if i != drop]
        m = ([a[i] for i in idx], [b[i] for i in idx],
             [np.full(len(keys), P[i], dtype=np.int64) for i in idx])
        d = vec_mul(ctx, m[0][0], det2(m[1][1], m[1][2], m[2][1], m[2][2]))
        d = vec_add(ctx, d, vec_neg(ctx, vec_mul(
            ctx, m[0][1], det2(m[1][0], m[1][2], m[2][0], m[2][2]))))
        d = vec_add(ctx, d, vec_mul(
            ctx, m[0][2], det2(m[1][0], m[1][1], m[2][0], m[2][1])))
        mask &= d == 0
    return mask


def count_r_rprime(fr: FTFrame, m1_keys, which_point: str = "plus") -> tuple:
    """Generators of the half-orbit through the tangency point, split (r, r')."""
    eps = 1 if which_point == "plus" else -1
    P = fr.p_eps(eps)
    r = int(through_point_mask(fr.ctx2, m1_keys, P).sum())
    return r, (fr.q + 1) // 2 - r


# ---------------------------------------------------------------------------
# builders

def build_cp(p: int, h: int = 1, seed_orbit: str = "plus",
             force: bool = False) -> HemisystemCandidate:
    """Rational-curve hemisystem: a PSL(2,q^2) half-orbit plus all chords."""
    q = p ** h
    if q % 2 == 0:
        raise ValueError("q must be odd")
    if q > 7 and not force:
        raise pg3.TooLarge(f"cp build at q={q} is heavy; pass force")
    ctx2 = make_field(p, 2 * h)
    ctx4 = make_field(p, 4 * h)
    emb, inv_emb = embed_subfield(ctx2, ctx4)
    frame = pg3.cp_frame(ctx2)
    curve = curves.cp_curve_points(ctx2)
    gcp = set()
    for packed in curve:
        gcp.update(pg3.generators_through(frame, pg3.unpack(ctx2, int(packed))))
    assert len(gcp) == (q + 1) * (q * q + 1)
    G, H = groups.cp_group_gens(ctx2)
    seed = min(pg3.generators_through(frame, (0, 0, 0, 1)))
    M = set(groups.orbit(ctx2, H.gens, seed))
    assert 2 * len(M) == len(gcp), "index-2 split failed"
    other = set(groups.orbit(ctx2, H.gens, min(gcp - M)))
    assert other == gcp - M, "complementary orbit mismatch"
    if seed_orbit == "minus":
        M, other = other, M
    chords = curves.cp_imaginary_chords(ctx2, ctx4, emb, inv_emb)
    lines = _sorted_lines(list(M) + [tuple(r) for r in chords])
    cand = HemisystemCandidate(
        family="cp", p=p, h=h, eps=None, chi=None, lines=lines,
        provenance={"seed": list(seed), "seed_orbit": seed_orbit,
                    "orbit_size": len(M), "chords": int(len(chords))})
    assert len(lines) == cand.expected_size()
    return cand


def build_ft(p: int, h: int = 1, eps: int = 1, force: bool = False,
             fr: FTFrame | None = None,
             sets: curves.CurvePointSets | None = None,
             chords: np.ndarray | None = None) -> HemisystemCandidate:
    """Fuhrmann-Torres hemisystem candidate (orbit rule, no verification)."""
    from . import numbers
    q = p ** h
    if not force and not numbers.condition_B_holds(q):
        raise ConditionBFails(
            f"the point-count criterion fails at q={q}; pass force to build anyway")
    if fr is None:
        fr = curves.ft_frame_setup(p, h, eps)
    if sets is None:
        sets = curves.ft_point_sets(fr.ctx2)
    G, H, w = groups.ft_group_gens(fr)
    key0, quad0, seed_prov = seed_generator_g0(fr)
    m1 = groups.orbit(fr.ctx2, H.gens, key0)
    assert 4 * len(m1) == (q ** 3 - q) * (q + 1), "half-orbit size mismatch"
    r, rp = count_r_rprime(fr, np.asarray(m1, dtype=np.int64), "plus")
    if r == rp:
        raise TieRR(f"r = r' = {r}")
    pick_eps = 1 if r < rp else -1
    m2 = groups.orbit(fr.ctx2, H.gens, ell_line(fr, pick_eps))
    assert 2 * len(m2) == (q + 1) ** 2
    if chords is None:
        chords = curves.ft_imaginary_chords(fr.ctx2, fr.ctx4, fr.emb, fr.inv_emb)
    lines = _sorted_lines(list(m1) + list(m2) + [tuple(rw) for rw in chords])
    n_rational = (q ** 3 + q + 2) // 2
    assert len(m1) + len(m2) == (q + 1) * n_rational // 2
    cand = HemisystemCandidate(
        family="ft", p=p, h=h, eps=eps, chi=fr.chi, lines=lines,
        provenance={"seed": list(key0), "r": r, "r_prime": rp,
                    "m1_size": len(m1), "m2_size": len(m2),
                    "m2_point": "plus" if pick_eps == 1 else "minus",
                    "chords": int(len(chords)), **seed_prov})
    assert len(lines) == cand.expected_size()
    return cand


def build_ft_verified(p: int, h: int = 1, eps: int = 1, force: bool = False,
                      threads: int = 1) -> tuple:
    """Build, verify, and fall back to the other half-orbit on failure.

    Verification is ground truth for the half-orbit choice; the fallback
    outcome is recorded in the provenance.  Returns (candidate, report).
    """
    fr = curves.ft_frame_setup(p, h, eps)
    sets = curves.ft_point_sets(fr.ctx2)
    chords = curves.ft_imaginary_chords(fr.ctx2, fr.ctx4, fr.emb, fr.inv_emb)
    cand = build_ft(p, h, eps, force=force, fr=fr, sets=sets, chords=chords)
    report = verify(cand, threads=threads, frame=fr.frame)
    if report.passed:
        cand.provenance["m2_choice"] = "rule"
        return cand, report
    flipped = "minus" if cand.provenance["m2_point"] == "plus" else "plus"
    H = groups.ft_group_gens(fr)[1]
    m2 = groups.orbit(fr.ctx2, H.gens, ell_line(fr, 1 if flipped == "plus" else -1))
    m2_old = set(groups.orbit(fr.ctx2, H.gens,
                              ell_line(fr, 1 if cand.provenance["m2_point"] == "plus" else -1)))
    lines = _sorted_lines([k for k in cand.key_set() if k not in m2_old] + list(m2))
    cand2 = HemisystemCandidate(
        family="ft", p=p, h=h, eps=eps, chi=fr.chi, lines=lines,
        provenance={**cand.provenance, "m2_point": flipped, "m2_choice": "fallback"})
    report2 = verify(cand2, threads=threads, frame=fr.frame)
    if report2.passed:
        return cand2, report2
    cand.provenance["m2_choice"] = "both_failed"
    return cand, report


# ---------------------------------------------------------------------------
# exact verification

def _frame_for(cand: HemisystemCandidate) -> HermitianFrame:
    ctx2 = cand.ctx2()
    return pg3.cp_frame(ctx2) if cand.family == "cp" else pg3.ft_frame(ctx2)


def _count_chunk(ctx, keys):
    a = pg3.unpack_batch(ctx, keys[:, 0])
    b = pg3.unpack_batch(ctx, keys[:, 1])
    pts = pg3.line_points_batch(ctx, np.stack(a, axis=1), np.stack(b, axis=1))
    vals, counts = np.unique(pts.reshape(-1), return_counts=True)
    return vals, counts


def _merge_counts(parts):
    vals = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    counts = counts[order]
    uniq, start = np.unique(vals, return_index=True)
    summed = np.add.reduceat(counts, start)
    return uniq, summed


def verify(cand: HemisystemCandidate, threads: int = 1,
           frame: HermitianFrame | None = None) -> VerificationReport:
    """Exact incidence verification of a candidate line set."""
    t0 = time.time()
    if frame is None:
        frame = _frame_for(cand)
    ctx = frame.ctx
    keys = np.asarray(cand.lines, dtype=np.int64).reshape(-1, 2)
    bad = pg3.check_generators_batch(frame, keys)
    if len(bad):
        k = keys[int(bad[0])]
        raise NotGeneratorInSet(f"line {(int(k[0]), int(k[1]))} is not a generator")
    chunks = [keys[lo:lo + 2048] for lo in range(0, len(keys), 2048)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda c: _count_chunk(ctx, c), chunks))
    else:
        parts = [_count_chunk(ctx, c) for c in chunks]
    vals, counts = _merge_counts(parts)
    assert int(counts.sum()) == len(keys) * (ctx.order + 1), "incidence sum mismatch"
    hist_vals, hist_counts = np.unique(counts, return_counts=True)
    histogram = {int(v): int(c) for v, c in zip(hist_vals, hist_counts)}
    expected_lines = (frame.q ** 3 + 1) * (frame.q + 1) // 2
    expected_inc = (frame.q + 1) // 2
    passed = (len(keys) == expected_lines
              and len(vals) == frame.num_points
              and histogram == {expected_inc: frame.num_points})
    return VerificationReport(
        passed=passed, line_count=len(keys), point_count=int(len(vals)),
        histogram=histogram, wall_time=time.time() - t0,
        expected_lines=expected_lines, expected_points=frame.num_points,
        expected_incidence=expected_inc)


# ---------------------------------------------------------------------------
# per-point condition diagnostics

def condition_checks(fr: FTFrame, m_keys, P,
                     sets: curves.CurvePointSets) -> dict:
    """Balance record for one surface point against the curve-meeting half-set."""
    ctx = fr.ctx2
    P = pg3.normalize(ctx, P)
    rational = sets.rational_plus
    on_curve = pg3.pack(ctx, P) in rational
    gens = pg3.generators_through(fr.frame, P)
    rows = pg3.line_points_table(ctx, np.asarray(gens, dtype=np.int64))
    meeting = [k for k, pts in zip(gens, rows)
               if set(int(x) for x in pts) & rational]
    if isinstance(m_keys, (set, frozenset)):
        m_set = m_keys
    else:
        m_set = {(int(a), int(b)) for a, b in np.asarray(m_keys).reshape(-1, 2)}
    in_m = sum(1 for k in meeting if k in m_set)
    if on_curve:
        tag = "CURVE_POINT"
        passed = in_m == (fr.q + 1) // 2
    else:
        tag = curves.classify_point_type(ctx, P)
        passed = 2 * in_m == len(meeting)
    return {"n_P": len(meeting), "in_M": in_m, "type": tag, "passed": passed}


# ---------------------------------------------------------------------------
# candidate files

MAGIC = "#hemis v1"


def _coord_str(ctx: FieldCtx, x: int) -> str:
    return ":".join(str(d) for d in ctx.digits(x))


def _point_str(ctx: FieldCtx, packed: int) -> str:
    return ",".join(_coord_str(ctx, c) for c in pg3.unpack(ctx, packed))


def _body_lines(cand: HemisystemCandidate, ctx: FieldCtx):
    for a, b in cand.lines:
        yield f"{_point_str(ctx, int(a))};{_point_str(ctx, int(b))}"


def export(cand: HemisystemCandidate, path: str) -> None:
    ctx = cand.ctx2()
    body = "\n".join(_body_lines(cand, ctx))
    if body:
        body += "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    eps = "na" if cand.eps is None else ("+1" if cand.eps > 0 else "-1")
    chi = "na" if cand.chi is None else ("+1" if cand.chi > 0 else "-1")
    head = [MAGIC,
            f"family={cand.family} p={cand.p} h={cand.h} eps={eps} chi={chi}",
            "poly2=" + ",".join(str(c) for c in ctx.poly),
            f"count={len(cand.lines)} sha256={digest}"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(head) + "\n")
        fh.write(body)


def _parse_point(ctx: FieldCtx, text: str, lineno: int) -> int:
    coords = text.split(",")
    if len(coords) != 4:
        raise ParseError(f"line {lineno}: expected 4 coordinates")
    out = []
    for c in coords:
        digs = c.split(":")
        if len(digs) != ctx.d:
            raise ParseError(f"line {lineno}: expected {ctx.d} digits per coordinate")
        try:
            vals = [int(x) for x in digs]
        except ValueError:
            raise ParseError(f"line {lineno}: bad digit")
        if any(v < 0 or v >= ctx.p for v in vals):
            raise ParseError(f"line {lineno}: digit out of range")
        out.append(ctx.from_digits(vals))
    coordst = tuple(out)
    if pg3.normalize(ctx, coordst) != coordst:
        raise ParseError(f"line {lineno}: point is not normalized")
    return pg3.pack(ctx, coordst)


def import_candidate(path: str) -> HemisystemCandidate:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.split("\n")
    if len(lines) < 4 or lines[0] != MAGIC:
        raise ParseError("line 1: bad magic")
    try:
        kv = dict(part.split("=", 1) for part in lines[1].split())
        family = kv["family"]
        p, h = int(kv["p"]), int(kv["h"])
        eps = None if kv["eps"] == "na" else int(kv["eps"])
        chi = None if kv["chi"] == "na" else int(kv["chi"])
    except (KeyError, ValueError):
        raise ParseError("line 2: bad header")
    if family not in ("cp", "ft"):
        raise ParseError("line 2: unknown family")
    if not lines[2].startswith("poly2="):
        raise ParseError("line 3: missing poly2")
    poly2 = tuple(int(c) for c in lines[2][len("poly2="):].split(","))
    try:
        kv4 = dict(part.split("=", 1) for part in lines[3].split())
        count = int(kv4["count"])
        digest = kv4["sha256"]
    except (KeyError, ValueError):
        raise ParseError("line 4: bad count/checksum header")
    body = "\n".join(lines[4:])
    if hashlib.sha256(body.encode()).hexdigest() != digest:
        raise ChecksumMismatch("body checksum does not match header")
    ctx = make_field(p, 2 * h)
    if ctx.poly != poly2:
        raise ParseError(f"line 3: non-canonical polynomial {poly2}")
    rows = []
    body_lines = [ln for ln in lines[4:] if ln]
    if len(body_lines) != count:
        raise ParseError(f"line 4: count={count} but body has {len(body_lines)} lines")
    for i, ln in enumerate(body_lines):
        parts = ln.split(";")
        if len(parts) != 2:
            raise ParseError(f"line {5 + i}: expected two points")
        a = _parse_point(ctx, parts[0], 5 + i)
        b = _parse_point(ctx, parts[1], 5 + i)
        if a >= b:
            raise ParseError(f"line {5 + i}: key points out of order")
        rows.append((a, b))
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    prev = None
    for row in rows:
        if prev is not None and row <= prev:
            raise ParseError("body lines are not sorted by key")
        prev = row
    return HemisystemCandidate(family=family, p=p, h=h, eps=eps, chi=chi,
                               lines=arr, provenance={"imported_from": path})
