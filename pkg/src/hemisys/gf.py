"""Table-driven arithmetic in GF(p^d) for odd p.

Field elements are plain ints: the element with digit vector
(c0, c1, ..., c_{d-1}) in the power basis of the construction polynomial
is the index c0 + c1*p + ... + c_{d-1}*p^(d-1).  Zero and one are the
ints 0 and 1.  All operations take the FieldCtx along with the elements.

Two total orders on elements are used:

* the index itself (internal, used for table addressing), and
* digit-lexicographic order, comparing (c0, c1, ...) componentwise with
  the constant term first.  Canonical choices (construction polynomial,
  generator, square roots) are always minimal in digit-lex order.

The FieldCtx carries numpy lookup tables so that bulk geometry code can
run vectorised: exp/log of the fixed generator for every field, and full
2-D add/mul tables for fields of order <= MUL_TABLE_MAX.
"""

from __future__ import annotations

import numpy as np

MUL_TABLE_MAX = 2048       # full 2-D tables up to this order
ORDER_CAP = 10 ** 8        # loud-failure cap on p^d

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NotPrime(ValueError):
    pass


class EvenCharacteristic(ValueError):
    pass


class FieldTooLarge(ValueError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


class ZeroInput(ValueError):
    pass


class BadExponent(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact for n < 3.3e24 with these bases)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict:
    """Prime factorisation by trial division (n <= ~1e12 in practice)."""
    fs = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            fs[d] = fs.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        fs[n] = fs.get(n, 0) + 1
    return fs


# ---------------------------------------------------------------------------
# dense polynomial helpers over GF(p), coefficient lists with constant first

def _poly_trim(f):
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _poly_mulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    # reduce modulo monic f
    df = len(f) - 1
    for i in range(len(out) - 1, df - 1, -1):
        c = out[i]
        if c:
            out[i] = 0
            for j in range(df):
                out[i - df + j] = (out[i - df + j] - c * f[j]) % p
    return _poly_trim(out[:df] + [0] * max(0, df - len(out)))


def _poly_powmod(a, n, f, p):
    r = [1]
    b = list(a)
    while n:
        if n & 1:
            r = _poly_mulmod(r, b, f, p)
        b = _poly_mulmod(b, b, f, p)
        n >>= 1
    return r


def _poly_gcd(a, b, p):
    a, b = list(a), list(b)
    while any(b):
        # reduce a mod b (b made monic on the fly)
        inv = pow(b[-1], p - 2, p)
        bm = [(c * inv) % p for c in b]
        r = list(a)
        while len(r) >= len(bm) and any(r):
            if r[-1] == 0:
                r.pop()
                continue
            c = r[-1]
            off = len(r) - len(bm)
            for j in range(len(bm)):
                r[off + j] = (r[off + j] - c * bm[j]) % p
            _poly_trim(r)
        a, b = b, _poly_trim(r)
    return _poly_trim(a)


def _is_irreducible(f, p: int) -> bool:
    """Rabin test: x^(p^d) = x mod f and gcd(x^(p^(d/l)) - x, f) = 1."""
    d = len(f) - 1
    x = [0, 1]
    xp = _poly_powmod(x, p ** d, f, p)
    if _poly_trim(list(xp)) != [0, 1]:
        return False
    for ell in factorize(d):
        g = _poly_powmod(x, p ** (d // ell), f, p)
        h = [(gi - xi) % p for gi, xi in zip(g + [0] * 2, x + [0] * len(g))]
        if len(_poly_gcd(_poly_trim(h), f, p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, d: int) -> tuple:
    """Digit-lex smallest monic irreducible of degree d over GF(p)."""
    if d == 1:
        return (0, 1)
    # iterate coefficient tuples (c0, .., c_{d-1}) in lex order, c0 major
    coeffs = [0] * d
    while True:
        f = list(coeffs) + [1]
        if coeffs[0] != 0 and _is_irreducible(f, p):
            return tuple(f)
        i = d - 1
        while i >= 0 and coeffs[i] == p - 1:
            coeffs[i] = 0
            i -= 1
        if i < 0:
            raise RuntimeError("no irreducible polynomial found")
        coeffs[i] += 1


class FieldCtx:
    """GF(p^d) with exp/log tables of a fixed multiplicative generator.

    Attributes: p, d, order, poly (monic, constant first), gen, and numpy
    tables exp_np/log_np (+ full add/mul/inv/neg tables for small orders).
    log_np[0] is 0 as a harmless sentinel; callers mask zeros themselves.
    """

    def __init__(self, p: int, d: int, poly: tuple):
        self.p = p
        self.d = d
        self.order = p ** d
        self.poly = poly
        self._pp = [p ** i for i in range(d)]
        self._build_tables()

    # -- construction ------------------------------------------------------

    def _mul_digits(self, a, b):
        out = [0] * (2 * self.d - 1)
        p = self.p
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = (out[i + j] + ai * bj) % p
        f = self.poly
        for i in range(len(out) - 1, self.d - 1, -1):
            c = out[i]
            if c:
                out[i] = 0
                for j in range(self.d):
                    out[i - self.d + j] = (out[i - self.d + j] - c * f[j]) % p
        return out[: self.d]

    def digits(self, x: int) -> tuple:
        out = []
        for _ in range(self.d):
            out.append(x % self.p)
            x //= self.p
        return tuple(out)

    def from_digits(self, dg) -> int:
        return sum(int(c) % self.p * pp for c, pp in zip(dg, self._pp))

    def _pow_digits(self, a, n):
        r = [1] + [0] * (self.d - 1)
        b = list(a)
        while n:
            if n & 1:
                r = self._mul_digits(r, b)
            b = self._mul_digits(b, b)
            n >>= 1
        return r

    def _build_tables(self):
        n1 = self.order - 1
        fac = factorize(n1)
        # digit-lex rank permutation: rank r corresponds to digits read as a
        # base-p number with the constant term most significant
        idx = np.arange(self.order, dtype=np.int64)
        rank = np.zeros(self.order, dtype=np.int64)
        rem = idx.copy()
        for i in range(self.d):
            rank += (rem % self.p) * (self.p ** (self.d - 1 - i))
            rem //= self.p
        self.rank_np = rank
        unrank = np.empty(self.order, dtype=np.int64)
        unrank[rank] = idx
        self.unrank_np = unrank

        # generator: digit-lex smallest element of full order
        gen_digits = None
        for r in range(1, self.order):
            cand = int(unrank[r])
            dg = list(self.digits(cand))
            ok = True
            for ell in fac:
                pw = self._pow_digits(dg, n1 // ell)
                if pw == [1] + [0] * (self.d - 1):
                    ok = False
                    break
            if ok:
                gen_digits = dg
                self.gen = cand
                break
        if gen_digits is None:
            raise RuntimeError("no generator found")

        exp = np.empty(2 * n1, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        cur = [1] + [0] * (self.d - 1)
        for k in range(n1):
            e = self.from_digits(cur)
            exp[k] = e
            exp[k + n1] = e
            log[e] = k
            cur = self._mul_digits(cur, gen_digits)
        assert cur == [1] + [0] * (self.d - 1), "generator order mismatch"
        self.exp_np = exp
        self.log_np = log

        neg = np.empty(self.order, dtype=np.int64)
        for x in range(self.order):
            neg[x] = self.from_digits([(-c) % self.p for c in self.digits(x)])
        self.neg_np = neg
        inv = np.zeros(self.order, dtype=np.int64)
        nz = exp[:n1]
        inv[nz] = exp[(n1 - log[nz]) % n1]
        self.inv_np = inv

        # per-digit decomposition for vectorised addition in large fields
        self.dig_np = []
        rem = idx.copy()
        for _ in range(self.d):
            self.dig_np.append((rem % self.p).astype(np.int64))
            rem //= self.p

        if self.order <= MUL_TABLE_MAX:
            a = idx[:, None]
            b = idx[None, :]
            add = np.zeros((self.order, self.order), dtype=np.int64)
            rem_a, rem_b = a, b
            for i in range(self.d):
                add += ((rem_a % self.p + rem_b % self.p) % self.p) * self._pp[i]
                rem_a = rem_a // self.p
                rem_b = rem_b // self.p
            self.add_np = add.astype(np.int32)
            mul = np.zeros((self.order, self.order), dtype=np.int64)
            la = log[nz]
            mul[np.ix_(nz, nz)] = exp[(la[:, None] + la[None, :])]
            self.mul_np = mul.astype(np.int32)
        else:
            self.add_np = None
            self.mul_np = None
        self._frob_cache = {}

    # -- scalar operations --------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.add_np is not None:
            return int(self.add_np[a, b])
        return self.from_digits(
            [(x + y) % self.p for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a: int) -> int:
        return int(self.neg_np[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, int(self.neg_np[b]))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_np[self.log_np[a] + self.log_np[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return int(self.inv_np[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            if n == 0:
                return 1
            if n < 0:
                raise DivisionByZero("negative power of zero")
            return 0
        e = (self.log_np[a] * n) % (self.order - 1)
        return int(self.exp_np[e])

    def frobenius(self, a: int, k: int = 1) -> int:
        """x -> x^(p^k)."""
        return self.pow(a, self.p ** k)

    def frob_np(self, k: int):
        """Permutation table of x -> x^(p^k), cached."""
        k = k % self.d
        if k not in self._frob_cache:
            tab = np.zeros(self.order, dtype=np.int64)
            n1 = self.order - 1
            nz = self.exp_np[:n1]
            tab[nz] = self.exp_np[(self.log_np[nz] * (self.p ** k)) % n1]
            self._frob_cache[k] = tab
        return self._frob_cache[k]

    def in_subfield(self, a: int, k: int) -> bool:
        """Membership in GF(p^k), k | d."""
        return self.frobenius(a, k) == a

    def trace_to_subfield(self, a: int, k: int) -> int:
        """Trace onto GF(p^k) for k | d."""
        if self.d % k:
            raise BadExponent("subfield degree must divide d")
        t, cur = 0, a
        for _ in range(self.d // k):
            t = self.add(t, cur)
            cur = self.frobenius(cur, k)
        return t

    def norm_to_subfield(self, a: int, k: int) -> int:
        if self.d % k:
            raise BadExponent("subfield degree must divide d")
        if a == 0:
            return 0
        e = (self.order - 1) // (self.p ** k - 1)
        return self.pow(a, e)

    def is_square(self, a: int) -> bool:
        if a == 0:
            return True
        return bool(self.log_np[a] % 2 == 0)

    def sqrt(self, a: int):
        """Digit-lex smaller square root, or None for non-squares."""
        if a == 0:
            return 0
        la = int(self.log_np[a])
        if la % 2:
            return None
        r = int(self.exp_np[la // 2])
        r2 = int(self.neg_np[r])
        return r if self.rank_np[r] <= self.rank_np[r2] else r2

    def power_residue_solutions(self, c: int, m: int) -> list:
        """All x with x^m = c, via discrete logs; empty if c is no m-th power."""
        if c == 0:
            raise ZeroInput("c must be nonzero")
        n1 = self.order - 1
        if m <= 0 or n1 % m:
            raise BadExponent(f"exponent {m} does not divide order-1")
        lc = int(self.log_np[c])
        if lc % m:
            return []
        step = n1 // m
        return sorted(int(self.exp_np[(lc // m + i * step) % n1]) for i in range(m))

    def elements(self):
        return range(self.order)

    def elements_by_rank(self):
        """All elements in digit-lex order."""
        return [int(x) for x in self.unrank_np]

    def lex_min(self, a: int, b: int) -> int:
        return a if self.rank_np[a] <= self.rank_np[b] else b

    def descriptor(self) -> str:
        return "p=%d d=%d poly=%s" % (
            self.p, self.d, ",".join(str(c) for c in self.poly))

    def __repr__(self):
        return f"FieldCtx(GF({self.p}^{self.d}), poly={list(self.poly)})"


def make_field(p: int, d: int) -> FieldCtx:
    """GF(p^d) with the canonical (digit-lex smallest) construction data."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is not supported")
    if p ** d > ORDER_CAP:
        raise FieldTooLarge(f"{p}^{d} exceeds the table cap {ORDER_CAP}")
    poly = smallest_irreducible(p, d)
    return FieldCtx(p, d, poly)


def parse_descriptor(line: str) -> FieldCtx:
    kv = dict(part.split("=", 1) for part in line.split())
    p, d = int(kv["p"]), int(kv["d"])
    poly = tuple(int(c) for c in kv["poly"].split(","))
    ctx = make_field(p, d)
    if ctx.poly != poly:
        raise ValueError(f"descriptor polynomial {poly} is not canonical")
    return ctx


def embed_subfield(small: FieldCtx, big: FieldCtx):
    """Embedding GF(p^k) -> GF(p^d) as a lookup array, plus partial inverse.

    Sends the power-basis root of small.poly to its digit-lex smallest root
    inside the big field; the image array has big-field indices, the inverse
    array holds -1 off the image.
    """
    if big.p != small.p or big.d % small.d:
        raise BadExponent("no subfield embedding")
    p = big.p
    # evaluate small.poly at every element of the big field (Horner, vectorised)
    xs = np.arange(big.order, dtype=np.int64)
    acc = np.zeros(big.order, dtype=np.int64)
    for c in reversed(small.poly):
        acc = _vec_mul(big, acc, xs)
        if c % p:
            acc = _vec_add(big, acc, np.full(big.order, c % p, dtype=np.int64))
    roots = np.nonzero(acc == 0)[0]
    assert len(roots) == small.d, "root count mismatch for subfield embedding"
    rho = int(roots[np.argmin(big.rank_np[roots])])
    emb = np.zeros(small.order, dtype=np.int64)
    pw = [1]
    for _ in range(small.d - 1):
        pw.append(big.mul(pw[-1], rho))
    for x in range(small.order):
        acc_x = 0
        for c, w in zip(small.digits(x), pw):
            if c:
                acc_x = big.add(acc_x, big.mul(c, w))
        emb[x] = acc_x
    inv = np.full(big.order, -1, dtype=np.int64)
    inv[emb] = np.arange(small.order, dtype=np.int64)
    assert big.mul(int(emb[small.gen]), int(emb[small.gen])) == int(emb[small.mul(small.gen, small.gen)])
    return emb, inv


# ---------------------------------------------------------------------------
# vectorised arithmetic on int64 arrays of element indices

def _vec_add(ctx: FieldCtx, A, B):
    if ctx.add_np is not None:
        return ctx.add_np[A, B].astype(np.int64)
    out = np.zeros_like(A)
    for i in range(ctx.d):
        out += ((ctx.dig_np[i][A] + ctx.dig_np[i][B]) % ctx.p) * ctx._pp[i]
    return out


def _vec_mul(ctx: FieldCtx, A, B):
    if ctx.mul_np is not None:
        return ctx.mul_np[A, B].astype(np.int64)
    n1 = ctx.order - 1
    out = ctx.exp_np[(ctx.log_np[A] + ctx.log_np[B]) % n1]
    return np.where((A != 0) & (B != 0), out, 0)


def vec_add(ctx: FieldCtx, A, B):
    return _vec_add(ctx, np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64))


def vec_mul(ctx: FieldCtx, A, B):
    return _vec_mul(ctx, np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64))


def vec_neg(ctx: FieldCtx, A):
    return ctx.neg_np[np.asarray(A, dtype=np.int64)]


def vec_frob(ctx: FieldCtx, A, k: int = 1):
    return ctx.frob_np(k)[np.asarray(A, dtype=np.int64)]
