"""Brute-force cross-checks, deliberately built on different algorithms.

* H^1 is enumerated coset by coset instead of read off a Smith form, and
  its kernel lattice comes from a unimodular column reduction instead of
  a rational kernel plus saturation.
* K-theory of Z^d is obtained by iterating the one-variable splitting
  instead of the closed binomial formula.
* The L-groups of Z come from an if-chain instead of the rewrite table.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Any

from . import formalgroups as fg
from .errors import NotOrderP, QuotientTooLarge, ValidationError
from .formalgroups import ZERO, GradedExpr, RingSpec
from .intlattice import FiniteAbelian, IntMatrix

DEFAULT_BOUND = 10**6


def default_bound() -> int:
    return int(os.environ.get("KLA_ORACLE_BOUND", DEFAULT_BOUND))


@dataclass(frozen=True)
class OracleReport:
    name: str
    input_digest: str
    main_value: Any
    oracle_value: Any
    agree: bool

    def to_json(self) -> dict:
        return {"name": self.name, "inputDigest": self.input_digest,
                "mainValue": self.main_value, "oracleValue": self.oracle_value,
                "agree": self.agree}


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


# ------------------------------------------------------------ H^1 by cosets


def _mat(rho) -> list[list[int]]:
    return rho.tolist() if isinstance(rho, IntMatrix) else [list(r) for r in rho]


def _mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def _integer_kernel(m: list[list[int]], ncols: int) -> list[list[int]]:
    """Basis of {v : m v = 0} from column reduction of m with a tracked transform."""
    cols = [[r[j] for r in m] for j in range(ncols)]
    trans = [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    used = set()
    for i in range(len(m)):
        while True:
            nz = [j for j in range(ncols) if j not in used and cols[j][i]]
            if len(nz) <= 1:
                if nz:
                    used.add(nz[0])
                break
            nz.sort(key=lambda j: abs(cols[j][i]))
            piv = nz[0]
            for j in nz[1:]:
                q = cols[j][i] // cols[piv][i]
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[piv])]
                trans[j] = [x - q * y for x, y in zip(trans[j], trans[piv])]
    return [trans[j] for j in range(ncols) if not any(cols[j])]


def _echelon(vectors: list[list[int]], dim: int) -> list[tuple[int, list[int]]]:
    """Triangular basis (pivot index, vector) of the Z-span of ``vectors``."""
    basis: list[tuple[int, list[int]]] = []
    pending = [list(v) for v in vectors]
    for i in range(dim):
        rows = [v for v in pending if v[i]]
        rest = [v for v in pending if not v[i]]
        while len(rows) > 1:
            rows.sort(key=lambda v: abs(v[i]))
            piv = rows[0]
            new = [piv]
            for v in rows[1:]:
                q = v[i] // piv[i]
                w = [x - q * y for x, y in zip(v, piv)]
                (new if w[i] else rest).append(w)
            rows = new
        if rows:
            v = rows[0]
            basis.append((i, v if v[i] > 0 else [-x for x in v]))
        pending = [v for v in rest if any(v)]
    return basis


def _reduce(v: list[int], basis) -> tuple[int, ...]:
    v = list(v)
    for i, b in basis:
        q = v[i] // b[i]
        if q:
            v = [x - q * y for x, y in zip(v, b)]
    return tuple(v)


def _coords(v: list[int], basis: list[list[int]]) -> list[int]:
    """Coordinates of v in a lattice basis (columns), by exact rational solve."""
    from fractions import Fraction
    k = len(basis)
    n = len(v)
    a = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    r = 0
    piv = []
    for c in range(k):
        p = next((i for i in range(r, n) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        a[r] = [x / a[r][c] for x in a[r]]
        for i in range(n):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
    out = [0] * k
    for row, c in enumerate(piv):
        if a[row][k].denominator != 1:
            raise ValueError("vector is not an integral combination")
        out[c] = int(a[row][k])
    return out


def _structure_from_elements(elements: list[tuple[int, ...]], add, zero) -> FiniteAbelian:
    """Invariant factors from counting q^k-torsion for every prime q."""
    order = len(elements)
    primes = []
    m, q = order, 2
    while m > 1:
        if m % q == 0:
            primes.append(q)
            while m % q == 0:
                m //= q
        q += 1

    def times(x, k):
        out = zero
        for _ in range(k):
            out = add(out, x)
        return out

    # partition of the q-part: |G[q^k]| = q^{sum_i min(k, a_i)}
    cyclic: list[int] = []
    for q in primes:
        exps = []
        k = 1
        prev = 0
        while True:
            cnt = sum(1 for x in elements if times(x, q ** k) == zero)
            logc = 0
            while cnt > 1:
                cnt //= q
                logc += 1
            exps.append(logc - prev)  # number of cyclic factors of exponent >= k
            if q ** logc == _q_part(order, q):
                break
            prev = logc
            k += 1
        counts = exps + [0]
        for k in range(1, len(counts)):
            for _ in range(counts[k - 1] - counts[k]):
                cyclic.append(q ** k)
    # combine prime powers into invariant factors, largest first
    by_prime: dict[int, list[int]] = {}
    for c in cyclic:
        p = next(pr for pr in primes if c % pr == 0)
        by_prime.setdefault(p, []).append(c)
    for v in by_prime.values():
        v.sort(reverse=True)
    length = max((len(v) for v in by_prime.values()), default=0)
    inv = []
    for i in range(length):
        x = 1
        for v in by_prime.values():
            if i < len(v):
                x *= v[i]
        inv.append(x)
    return FiniteAbelian(tuple(reversed(inv)))


def _q_part(n: int, q: int) -> int:
    out = 1
    while n % q == 0:
        n //= q
        out *= q
    return out


def h1_coset_enum(rho, p: int, bound: int | None = None) -> FiniteAbelian:
    """H^1(Z/p; Z^d) by breadth-first enumeration of ker N / im(rho - 1)."""
    bound = default_bound() if bound is None else bound
    r = _mat(rho)
    d = len(r)
    ident = [[int(i == j) for j in range(d)] for i in range(d)]
    power, norm = ident, [[0] * d for _ in range(d)]
    for _ in range(p):
        norm = [[x + y for x, y in zip(a, b)] for a, b in zip(norm, power)]
        power = _mul(power, r) if d else power
    if d and power != ident:
        raise NotOrderP(f"rho^{p} != I")
    if d == 0:
        return FiniteAbelian()
    cocycles = _integer_kernel(norm, d)
    k = len(cocycles)
    # im(rho - 1) written in cocycle coordinates
    diff = [[r[i][j] - ident[i][j] for j in range(d)] for i in range(d)]
    images = [[diff[i][j] for i in range(d)] for j in range(d)]
    image_coords = [_coords(v, cocycles) for v in images if any(v)]
    tri = _echelon(image_coords, k)
    if len(tri) != k:
        raise ValidationError("coboundaries do not have full rank in the cocycles")
    zero = tuple([0] * k)
    gens = [tuple(int(i == j) for i in range(k)) for j in range(k)]

    def add(x, y):
        return _reduce([a + b for a, b in zip(x, y)], tri)

    seen = {zero}
    queue = deque([zero])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = add(x, g)
            if y not in seen:
                seen.add(y)
                if len(seen) > bound:
                    raise QuotientTooLarge(f"more than {bound} cosets")
                queue.append(y)
    return _structure_from_elements(sorted(seen), add, zero)


# ----------------------------------------------------------- K of Z^d by BHS


def bhs_iterate(d: int, ring: RingSpec, n: int) -> GradedExpr:
    """K_n(R[Z^d]) by d-fold use of K_n(R[Z^k]) = K_n(R[Z^(k-1)]) + K_{n-1}(R[Z^(k-1)]).

    Nil terms are dropped, so the ring must be regular.
    """
    if not ring.has("Regular"):
        raise ValidationError("iteration drops Nil terms and needs a regular ring")
    if d < 0:
        raise ValidationError("d must be nonnegative")
    if d == 0:
        return fg.simplify(fg.K(n, ring))
    return fg.dsum(bhs_iterate(d - 1, ring, n), bhs_iterate(d - 1, ring, n - 1))


def l_periodic_table(n: int, deco: str = "-inf") -> GradedExpr:
    """L_n(Z), independent of decoration."""
    fg.decoration(deco)
    r = n - 4 * (n // 4)
    if r == 0:
        return fg.Z()
    if r == 2:
        return fg.Zmod(2)
    return ZERO


# ---------------------------------------------------- stabilizer probe


def _primitive_up_to_sign(d: int, bound: int):
    def rec(prefix):
        if len(prefix) == d:
            yield tuple(prefix)
            return
        for x in range(-bound, bound + 1):
            yield from rec(prefix + [x])
    for v in rec([]):
        if not any(v) or gcd(*v) != 1:
            continue
        first = next(x for x in v if x)
        if first > 0:
            yield v


def _canon(v):
    first = next(x for x in v if x)
    return tuple(v) if first > 0 else tuple(-x for x in v)


def primitive_orbit_probe(rho, p: int, bound: int) -> dict:
    """Orbits and stabilizers of primitive vectors (up to sign) of sup-norm <= bound."""
    r = _mat(rho)
    d = len(r)
    if d == 0:
        return {"classes": 0, "orbits": 0, "stabilizerOrders": [], "i1": 0, "i2": 0,
                "dichotomy": True, "matchesParityRule": True}

    def act(v):
        return tuple(sum(r[i][j] * v[j] for j in range(d)) for i in range(d))

    classes = list(_primitive_up_to_sign(d, bound))
    seen: set = set()
    stab_orders = []
    i1 = i2 = 0
    for v in classes:
        if v in seen:
            continue
        orbit = [v]
        w = v
        stab = 1
        neg = False
        for _ in range(1, p):
            w = act(w)
            c = _canon(w)
            if c == v:
                stab += 1
                neg = neg or w != v
            orbit.append(c)
        seen.update(orbit)
        stab_orders.append(stab)
        if stab == 1:
            i1 += 1
        elif stab == 2 and neg:
            i2 += 1
    orders = sorted(set(stab_orders))
    dichotomy = set(orders) <= {1, 2}
    parity = (i1 == 0) if p == 2 else (i2 == 0)
    return {"classes": len(classes), "orbits": len(stab_orders), "stabilizerOrders": orders,
            "i1": i1, "i2": i2, "dichotomy": dichotomy, "matchesParityRule": parity}


# ------------------------------------------------- random order-p matrices


def _companion(poly_low_to_high: list[int]) -> list[list[int]]:
    n = len(poly_low_to_high)
    m = [[0] * n for _ in range(n)]
    for i in range(1, n):
        m[i][i - 1] = 1
    for i in range(n):
        m[i][n - 1] = -poly_low_to_high[i]
    return m


def order_p_blocks(p: int) -> list[list[list[int]]]:
    """Indecomposable-ish building blocks of order dividing p."""
    cyclotomic = _companion([1] * (p - 1)) if p > 2 else [[-1]]
    perm = [[int(i == (j + 1) % p) for j in range(p)] for i in range(p)]
    return [[[1]], cyclotomic, perm]


def random_unimodular(d: int, rng: random.Random, steps: int = 12):
    """A random unimodular matrix and its inverse, from elementary operations."""
    u = [[int(i == j) for j in range(d)] for i in range(d)]
    ui = [[int(i == j) for j in range(d)] for i in range(d)]
    if d < 2:
        if d == 1 and rng.random() < 0.5:
            return [[-1]], [[-1]]
        return u, ui
    for _ in range(steps):
        i, j = rng.sample(range(d), 2)
        q = rng.choice([-2, -1, 1, 2])
        # u <- E u with E = I + q e_ij ; ui <- ui E^{-1}
        u[i] = [x + q * y for x, y in zip(u[i], u[j])]
        for row in ui:
            row[j] -= q * row[i]
    return u, ui


def random_order_p_matrix(p: int, max_d: int, rng: random.Random) -> list[list[int]]:
    """Block sum of order-p pieces conjugated by a random unimodular matrix."""
    blocks = order_p_blocks(p)
    chosen = []
    size = 0
    target = rng.randint(1, max_d)
    while size < target:
        fits = [b for b in blocks if size + len(b) <= max_d]
        b = rng.choice(fits)
        chosen.append(b)
        size += len(b)
    m = [[0] * size for _ in range(size)]
    off = 0
    for b in chosen:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                m[off + i][off + j] = x
        off += len(b)
    u, ui = random_unimodular(size, rng)
    return _mul(_mul(u, m), ui)


# ---------------------------------------------------------------- the suite


def run_suite(seed: int = 0, quick: bool = False, bug: str | None = None) -> list[OracleReport]:
    """Run every oracle against the main code paths.

    ``bug`` injects a deliberate fault (used to self-test the harness).
    """
    from . import assembly, groupcat
    from .intlattice import h1_cyclic

    rng = random.Random(seed)
    reports: list[OracleReport] = []
    regular = fg.PRESETS["regular"]

    n_h1 = 20 if quick else 200
    for k in range(n_h1):
        p = (2, 3, 5)[k % 3]
        rho = random_order_p_matrix(p, 6, rng)
        main = list(h1_cyclic(IntMatrix.from_rows(rho), p).divisors)
        if bug == "h1":
            main = main + [p]
        oracle = list(h1_coset_enum(rho, p).divisors)
        reports.append(OracleReport("h1", digest({"rho": rho, "p": p}), main, oracle,
                                    main == oracle and all(x == p for x in main)))

    dmax = 4 if quick else 8
    for d in range(dmax + 1):
        for n in range(-5, 6):
            main = assembly.k_zd(d, regular, n)
            oracle = bhs_iterate(d, regular, n)
            reports.append(OracleReport("bhs", digest({"d": d, "n": n}), fg.render(main),
                                        fg.render(oracle), main == oracle))

    zr = fg.PRESETS["Z"]
    for deco in ("s", "h", "p", "-1", "-2", "-inf"):
        for n in range(-8, 9):
            main = fg.simplify(fg.L(n, zr, deco))
            oracle = l_periodic_table(n, deco)
            reports.append(OracleReport("L(Z)", digest({"n": n, "deco": deco}), fg.render(main),
                                        fg.render(oracle), main == oracle))

    for d in range(1, 11 if not quick else 6):
        minus = [[-int(i == j) for j in range(d - 1)] for i in range(d - 1)]
        main = groupcat.analyze_action(d, 2, [[-int(i == j) for j in range(d)] for i in range(d)]).jc_size.n
        oracle = h1_coset_enum(minus, 2).order
        reports.append(OracleReport("jc", digest({"d": d}), main, oracle, main == oracle))

    probes = [([[-1]], 2, 3), ([[-1, 0], [0, -1]], 2, 5), ([[0, -1], [1, -1]], 3, 5)]
    if not quick:
        probes.append(([[-1, 0, 0], [0, -1, 0], [0, 0, -1]], 2, 3))
        probes.append((_companion([1, 1, 1, 1]), 5, 2))
    for rho, p, b in probes:
        a = groupcat.analyze_action(len(rho), p, rho)
        rep = primitive_orbit_probe(rho, p, b)
        expected_i2_empty = a.i2_card == fg.Card(0)
        ok = rep["dichotomy"] and rep["matchesParityRule"] and ((rep["i2"] == 0) == expected_i2_empty)
        reports.append(OracleReport("orbits", digest({"rho": rho, "p": p, "bound": b}),
                                    {"i1": a.i1_card.to_json(), "i2": a.i2_card.to_json()},
                                    rep, ok))
    return reports
