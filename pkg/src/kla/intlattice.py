"""Exact integer matrices, normal forms and sublattices of Z^d.

Everything is done with Python ints, so there is no magnitude bound.
Row/column reductions are fraction-free; the only rational arithmetic is
the kernel computation, which clears denominators and then saturates.

Conventions
-----------
* ``hnf`` is column style: ``H = M U`` for a unimodular ``U``.  Nonzero
  columns come first.  The pivot of a column is its lowest nonzero entry,
  pivot rows strictly increase from left to right (so a full-rank square
  result is upper triangular), pivots are positive, and every entry lying
  in a pivot row to the right of that pivot is reduced into
  ``[0, pivot)``.  Zero columns trail.
* ``snf`` returns ``d, U, V`` with ``U M V = diag(d)``; ``d`` has length
  ``min(rows, cols)``, each entry divides the next and zeros trail.
* Pivot choice is always "smallest nonzero magnitude, then lowest index".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .errors import InfiniteQuotient, NotContained, NotOrderP, ValidationError


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValidationError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValidationError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}")
        for x in self.entries:
            if not isinstance(x, int) or isinstance(x, bool):
                raise ValidationError(f"matrix entries must be integers, got {x!r}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValidationError("ragged matrix: all rows need the same length")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        columns = [list(c) for c in columns]
        return cls.from_rows([[c[i] for c in columns] for i in range(rows)], len(columns))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diagonal(cls, diag: Sequence[int]) -> IntMatrix:
        n = len(diag)
        return cls(n, n, tuple(diag[i] if i == j else 0 for i in range(n) for j in range(n)))

    def tolist(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [[self[i, j] for i in range(self.rows)] for j in range(self.cols)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows(self.columns(), self.rows)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValidationError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        a, b = self.tolist(), other.columns()
        return IntMatrix.from_rows([[sum(x * y for x, y in zip(r, c)) for c in b] for r in a],
                                   other.cols)

    def __add__(self, other: IntMatrix) -> IntMatrix:
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols,
                         tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols,
                         tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(-x for x in self.entries))

    def __pow__(self, k: int) -> IntMatrix:
        if not self.is_square or k < 0:
            raise ValidationError("only nonnegative powers of square matrices")
        out, base = IntMatrix.identity(self.rows), self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def apply(self, v: Sequence[int]) -> list[int]:
        return [sum(self[i, j] * v[j] for j in range(self.cols)) for i in range(self.rows)]

    def _check_same_shape(self, other: IntMatrix):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValidationError("shape mismatch")


@dataclass(frozen=True)
class SNFResult:
    d: tuple[int, ...]
    U: IntMatrix
    V: IntMatrix


@dataclass(frozen=True)
class Sublattice:
    """A sublattice of Z^ambient_rank; basis columns are in canonical HNF."""

    ambient_rank: int
    basis: IntMatrix

    @classmethod
    def span(cls, generators: IntMatrix) -> Sublattice:
        """Sublattice spanned by the columns of ``generators``."""
        h = hnf(generators)
        r = sum(1 for c in h.columns() if any(c))
        return cls(generators.rows, IntMatrix.from_columns(h.columns()[:r], generators.rows))

    @classmethod
    def full(cls, n: int) -> Sublattice:
        return cls(n, IntMatrix.identity(n))

    @property
    def rank(self) -> int:
        return self.basis.cols

    def vectors(self) -> list[list[int]]:
        return self.basis.columns()

    def coordinates(self, v: Sequence[int]) -> list[int] | None:
        """Integer coordinates of ``v`` in the basis, or None if ``v`` is not in the lattice."""
        if len(v) != self.ambient_rank:
            raise ValidationError("vector length does not match ambient rank")
        residual = list(v)
        cols = self.vectors()
        coeffs = [0] * len(cols)
        for k in reversed(range(len(cols))):
            h = cols[k]
            p = _pivot_row(h)
            q, r = divmod(residual[p], h[p])
            if r:
                return None
            if q:
                residual = [x - q * y for x, y in zip(residual, h)]
            coeffs[k] = q
        return coeffs if not any(residual) else None

    def __contains__(self, v: Sequence[int]) -> bool:
        return self.coordinates(v) is not None

    def contains_lattice(self, other: Sublattice) -> bool:
        return other.ambient_rank == self.ambient_rank and all(
            v in self for v in other.vectors())


@dataclass(frozen=True)
class FiniteAbelian:
    """Finite abelian group as a divisibility chain of invariant factors (all >= 2)."""

    divisors: tuple[int, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.divisors, self.divisors[1:]):
            if b % a:
                raise ValidationError(f"{a} does not divide {b}")
        if any(x < 2 for x in self.divisors):
            raise ValidationError("invariant factors must be >= 2")

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> FiniteAbelian:
        """Direct sum of cyclic groups of the given orders, normalised."""
        orders = [abs(o) for o in orders if abs(o) != 1]
        if any(o == 0 for o in orders):
            raise ValidationError("Z/0 is not finite")
        d = snf(IntMatrix.diagonal(orders)).d
        return cls(tuple(x for x in d if x != 1))

    @property
    def order(self) -> int:
        out = 1
        for x in self.divisors:
            out *= x
        return out

    @property
    def is_trivial(self) -> bool:
        return not self.divisors

    def __str__(self) -> str:
        if not self.divisors:
            return "0"
        return " + ".join(f"Z/{m}" for m in self.divisors)


def as_matrix(m) -> IntMatrix:
    """Accept an IntMatrix or a row-major list of lists."""
    if isinstance(m, IntMatrix):
        return m
    return IntMatrix.from_rows(m)


def _pivot_row(col: Sequence[int]) -> int:
    for i in reversed(range(len(col))):
        if col[i]:
            return i
    raise ValueError("zero column has no pivot")


def hnf(m: IntMatrix) -> IntMatrix:
    """Column-style Hermite normal form (see module docstring for the convention)."""
    m = as_matrix(m)
    R, C = m.rows, m.cols
    cols = m.columns()
    active = list(range(C))
    found: list[tuple[int, int]] = []
    for i in reversed(range(R)):
        nz = [j for j in active if cols[j][i]]
        if not nz:
            continue
        while len(nz) > 1:
            piv = min(nz, key=lambda j: (abs(cols[j][i]), j))
            pv = cols[piv]
            for j in nz:
                if j != piv:
                    q = cols[j][i] // pv[i]
                    cols[j] = [x - q * y for x, y in zip(cols[j], pv)]
            nz = [j for j in nz if cols[j][i]]
        piv = nz[0]
        if cols[piv][i] < 0:
            cols[piv] = [-x for x in cols[piv]]
        active.remove(piv)
        found.append((i, piv))
    found.reverse()
    basis = [cols[j] for _, j in found]
    rows_ = [i for i, _ in found]
    for k in reversed(range(len(basis))):
        p, hk = rows_[k], basis[k]
        for l in range(k + 1, len(basis)):
            q = basis[l][p] // hk[p]
            if q:
                basis[l] = [x - q * y for x, y in zip(basis[l], hk)]
    basis += [[0] * R for _ in range(C - len(basis))]
    return IntMatrix.from_columns(basis, R)


def _snf_full(m: IntMatrix):
    A = m.tolist()
    R, C = m.rows, m.cols
    U = IntMatrix.identity(R).tolist()
    Uinv = IntMatrix.identity(R).tolist()
    V = IntMatrix.identity(C).tolist()

    # every row operation on A is mirrored on U and, inverted, on the columns of Uinv
    def row_swap(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]
        for r in Uinv:
            r[i], r[k] = r[k], r[i]

    def row_addmul(i, k, q):  # row_i += q * row_k
        A[i] = [x + q * y for x, y in zip(A[i], A[k])]
        U[i] = [x + q * y for x, y in zip(U[i], U[k])]
        for r in Uinv:
            r[k] -= q * r[i]

    def row_neg(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]
        for r in Uinv:
            r[i] = -r[i]

    def col_swap(j, k):
        for M in (A, V):
            for r in M:
                r[j], r[k] = r[k], r[j]

    def col_addmul(j, k, q):  # col_j += q * col_k
        for M in (A, V):
            for r in M:
                r[j] += q * r[k]

    n = min(R, C)
    for t in range(n):
        cand = [(abs(A[i][j]), i, j) for i in range(t, R) for j in range(t, C) if A[i][j]]
        if not cand:
            break
        _, i0, j0 = min(cand)
        row_swap(t, i0)
        col_swap(t, j0)
        while True:
            for i in range(t + 1, R):
                if A[i][t]:
                    row_addmul(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, C):
                if A[t][j]:
                    col_addmul(j, t, -(A[t][j] // A[t][t]))
            rest = [(abs(A[i][t]), 0, i) for i in range(t + 1, R) if A[i][t]]
            rest += [(abs(A[t][j]), 1, j) for j in range(t + 1, C) if A[t][j]]
            if rest:
                _, kind, k = min(rest)
                if kind == 0:
                    row_swap(t, k)
                else:
                    col_swap(t, k)
                continue
            bad = next((i for i in range(t + 1, R) for j in range(t + 1, C)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            row_addmul(t, bad, 1)
        if A[t][t] < 0:
            row_neg(t)
    d = tuple(A[i][i] for i in range(n))
    return d, IntMatrix.from_rows(U, R), IntMatrix.from_rows(V, C), IntMatrix.from_rows(Uinv, R)


def snf(m: IntMatrix) -> SNFResult:
    """Smith normal form with unimodular transforms, ``U M V = diag(d)``."""
    d, U, V, _ = _snf_full(as_matrix(m))
    return SNFResult(d, U, V)


def rank(m: IntMatrix) -> int:
    return sum(1 for x in snf(m).d if x)


def _rational_kernel(m: IntMatrix) -> list[list[Fraction]]:
    a = [[Fraction(x) for x in r] for r in m.tolist()]
    R, C = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(C):
        p = next((i for i in range(r, R) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(R):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == R:
            break
    free = [c for c in range(C) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * C
        v[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -a[row][f]
        basis.append(v)
    return basis


def saturate(generators: IntMatrix) -> Sublattice:
    """Saturation (L tensor Q) cap Z^n of the column span of ``generators``."""
    n = generators.rows
    k = rank(generators)
    if k == 0:
        return Sublattice(n, IntMatrix.zeros(n, 0))
    _, _, _, Uinv = _snf_full(generators)
    # U B V = D with D's first k diagonal entries nonzero, so B's Q-span is
    # the span of the first k columns of U^{-1}, which extend to a basis of Z^n.
    cols = Uinv.columns()[:k]
    return Sublattice.span(IntMatrix.from_columns(cols, n))


def kernel_saturated(m: IntMatrix) -> Sublattice:
    """The lattice {v in Z^cols : M v = 0}."""
    m = as_matrix(m)
    vecs = []
    for v in _rational_kernel(m):
        den = lcm(*(x.denominator for x in v))
        w = [int(x * den) for x in v]
        g = gcd(*w)
        vecs.append([x // g for x in w])
    if not vecs:
        return Sublattice(m.cols, IntMatrix.zeros(m.cols, 0))
    return saturate(IntMatrix.from_columns(vecs, m.cols))


def fixed_sublattice(rho: IntMatrix) -> Sublattice:
    """Vectors fixed by ``rho``; its rank is the fixed rank e."""
    rho = as_matrix(rho)
    if not rho.is_square:
        raise ValidationError("rho must be square")
    return kernel_saturated(rho - IntMatrix.identity(rho.rows))


def quotient_structure(big: Sublattice, small: Sublattice) -> FiniteAbelian:
    """Invariant factors of the finite quotient big / small."""
    if big.ambient_rank != small.ambient_rank or not big.contains_lattice(small):
        raise NotContained("sublattice is not contained in the ambient lattice")
    if big.rank != small.rank:
        raise InfiniteQuotient(f"ranks differ ({big.rank} vs {small.rank})")
    coords = [big.coordinates(v) for v in small.vectors()]
    X = IntMatrix.from_columns(coords, big.rank)
    return FiniteAbelian(tuple(x for x in snf(X).d if x != 1))


def norm_matrix(rho: IntMatrix, p: int) -> IntMatrix:
    """N = sum_{i<p} rho^i."""
    out = IntMatrix.zeros(rho.rows, rho.cols)
    power = IntMatrix.identity(rho.rows)
    for _ in range(p):
        out = out + power
        power = power @ rho
    return out


def check_order(rho: IntMatrix, p: int) -> IntMatrix:
    rho = as_matrix(rho)
    if not rho.is_square:
        raise ValidationError("rho must be square")
    if p < 1:
        raise ValidationError("p must be positive")
    if rho ** p != IntMatrix.identity(rho.rows):
        raise NotOrderP(f"rho^{p} != I")
    return rho


def h1_cyclic(rho: IntMatrix, p: int) -> FiniteAbelian:
    """H^1(Z/p; Z^d) for the action of the generator by ``rho``: ker N / im(rho - 1)."""
    rho = check_order(rho, p)
    cocycles = kernel_saturated(norm_matrix(rho, p))
    coboundaries = Sublattice.span(rho - IntMatrix.identity(rho.rows))
    return quotient_structure(cocycles, coboundaries)
