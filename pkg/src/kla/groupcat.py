"""Group descriptors and the combinatorial invariants the formulas consume."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from . import intlattice as il
from .errors import UnknownJ, ValidationError
from .formalgroups import OMEGA, Card, Fin, _is_prime, card
from .intlattice import FiniteAbelian, IntMatrix


@dataclass(frozen=True)
class Zd:
    d: int


@dataclass(frozen=True)
class Free:
    r: int


@dataclass(frozen=True)
class Surface:
    g: int


@dataclass(frozen=True)
class TFHyperbolic:
    """Torsion-free hyperbolic group given by its Betti numbers.

    The caller vouches for torsion-freeness and for free integral homology;
    results are marked conditional on the homology splitting.
    """

    betti: tuple[int, ...]
    micy: Card


@dataclass(frozen=True)
class Hyperbolic:
    """A hyperbolic group known only through the number of conjugacy classes
    of maximal infinite virtually cyclic subgroups."""

    micy: Card


@dataclass(frozen=True)
class CrystZp:
    """Extension 1 -> Z^d -> G -> Z/p -> 1 with generator acting by ``rho``.

    ``j_card`` overrides the number of conjugacy classes of nontrivial finite
    subgroups; it is mandatory for non-split extensions.
    """

    d: int
    p: int
    rho: IntMatrix
    split: bool = True
    j_card: Card | None = None


GroupDesc = Union[Zd, Free, Surface, TFHyperbolic, Hyperbolic, CrystZp]


def validate(g: GroupDesc) -> GroupDesc:
    problems = []
    if isinstance(g, Zd):
        if not isinstance(g.d, int) or g.d < 0:
            problems.append(f"d must be a nonnegative integer, got {g.d!r}")
    elif isinstance(g, Free):
        if not isinstance(g.r, int) or g.r < 1:
            problems.append(f"r must be a positive integer, got {g.r!r}")
    elif isinstance(g, Surface):
        if not isinstance(g.g, int) or g.g < 0:
            problems.append(f"genus must be a nonnegative integer, got {g.g!r}")
    elif isinstance(g, TFHyperbolic):
        if not g.betti or g.betti[0] != 1:
            problems.append("betti numbers must start with b0 = 1")
        if any(not isinstance(b, int) or b < 0 for b in g.betti):
            problems.append("betti numbers must be nonnegative integers")
        if not isinstance(g.micy, Card):
            problems.append("micy must be a cardinal")
    elif isinstance(g, Hyperbolic):
        if not isinstance(g.micy, Card):
            problems.append("micy must be a cardinal")
    elif isinstance(g, CrystZp):
        if not isinstance(g.d, int) or g.d < 0:
            problems.append(f"d must be a nonnegative integer, got {g.d!r}")
        if not _is_prime(g.p):
            problems.append(f"p must be prime, got {g.p!r}")
        if (g.rho.rows, g.rho.cols) != (g.d, g.d):
            problems.append(f"rho must be {g.d}x{g.d}, got {g.rho.rows}x{g.rho.cols}")
        if problems:
            raise ValidationError("; ".join(problems))
        il.check_order(g.rho, g.p)
    else:
        problems.append(f"unknown group descriptor {g!r}")
    if problems:
        raise ValidationError("; ".join(problems))
    return g


def micy_card_of(d: int) -> Card:
    """Number of maximal infinite cyclic subgroups of Z^d."""
    if d < 0:
        raise ValidationError("d must be nonnegative")
    return Fin(min(d, 1)) if d <= 1 else OMEGA


def micy_card_free_group(r: int) -> Card:
    """Conjugacy classes of maximal infinite cyclic subgroups of F_r."""
    if r < 1:
        raise ValidationError("r must be positive")
    return Fin(1) if r == 1 else OMEGA


@dataclass(frozen=True)
class ActionAnalysis:
    """Invariants of a Z/p action on Z^d.

    ``j_card`` is None when unknown (non-split without override).
    ``i1_card``/``i2_card`` are None for non-free actions, where the
    stabilizer dichotomy does not hold.  ``p == 1`` encodes the trivial group.
    """

    d: int
    p: int
    e: int
    free: bool
    h1: FiniteAbelian
    j_card: Card | None
    micy_fixed_card: Card
    i1_card: Card | None
    i2_card: Card | None
    jc_size: Card
    split: bool = True

    def require_j(self) -> Card:
        if self.j_card is None:
            raise UnknownJ("number of conjugacy classes of maximal finite subgroups is unknown "
                           "for a non-split extension; pass it explicitly (--jcard)")
        return self.j_card

    def to_json(self) -> dict:
        def c(x):
            return None if x is None else x.to_json()
        return {"d": self.d, "p": self.p, "e": self.e, "free": self.free,
                "h1": list(self.h1.divisors), "h1Order": self.h1.order, "split": self.split,
                "jCard": c(self.j_card), "micyFixedCard": c(self.micy_fixed_card),
                "i1Card": c(self.i1_card), "i2Card": c(self.i2_card), "jcSize": c(self.jc_size)}


def analyze_action(d: int, p: int, rho, split: bool = True,
                   j_card: Card | int | None = None) -> ActionAnalysis:
    rho = il.as_matrix(rho) if d else IntMatrix.zeros(0, 0)
    if (rho.rows, rho.cols) != (d, d):
        raise ValidationError(f"rho must be {d}x{d}")
    if p != 1 and not _is_prime(p):
        raise ValidationError(f"p must be prime (or 1 for the trivial group), got {p}")
    il.check_order(rho, p)
    e = il.fixed_sublattice(rho).rank
    h1 = il.h1_cyclic(rho, p)
    if p == 1:
        # trivial Q: no torsion, every maximal cyclic subgroup is its own orbit
        return ActionAnalysis(d, 1, d, True, h1, Fin(0), micy_card_of(d),
                              micy_card_of(d), Fin(0), Fin(0), True)
    free = e == 0
    if j_card is not None:
        jc = card(j_card)
    elif split:
        jc = Fin(h1.order)
    else:
        jc = None
    micy_fixed = micy_card_of(e)
    i1 = i2 = None
    if free:
        if p == 2:
            if rho != -IntMatrix.identity(d):
                raise AssertionError("free involution on Z^d must be -I")
            i1, i2 = Fin(0), micy_card_of(d)
        else:
            i1, i2 = micy_card_of(d), Fin(0)
    jc_size = Fin(2 ** (d - 1)) if i2 else Fin(0)
    return ActionAnalysis(d, p, e, free, h1, jc, micy_fixed, i1, i2, jc_size, split)


def analyze(g: CrystZp) -> ActionAnalysis:
    validate(g)
    return analyze_action(g.d, g.p, g.rho, g.split, g.j_card)


# ------------------------------------------------------------------ JSON IO


def to_json(g: GroupDesc) -> dict:
    if isinstance(g, Zd):
        return {"type": "zd", "d": g.d}
    if isinstance(g, Free):
        return {"type": "free", "r": g.r}
    if isinstance(g, Surface):
        return {"type": "surface", "g": g.g}
    if isinstance(g, TFHyperbolic):
        return {"type": "tfhyp", "betti": list(g.betti), "micy": g.micy.to_json()}
    if isinstance(g, Hyperbolic):
        return {"type": "hyp", "micy": g.micy.to_json()}
    if isinstance(g, CrystZp):
        out = {"type": "crystZp", "d": g.d, "p": g.p, "rho": g.rho.tolist(), "split": g.split}
        if g.j_card is not None:
            out["jCard"] = g.j_card.to_json()
        return out
    raise ValidationError(f"unknown group descriptor {g!r}")


def _card_field(v) -> Card:
    if isinstance(v, dict):
        return Card.from_json(v)
    if isinstance(v, str) and v.isdigit():
        return Card(int(v))
    return card(v)


def from_json(obj) -> GroupDesc:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        t = obj["type"]
        if t == "zd":
            g = Zd(obj["d"])
        elif t == "free":
            g = Free(obj["r"])
        elif t == "surface":
            g = Surface(obj["g"])
        elif t == "tfhyp":
            g = TFHyperbolic(tuple(obj["betti"]), _card_field(obj.get("micy", "omega")))
        elif t == "hyp":
            g = Hyperbolic(_card_field(obj["micy"]))
        elif t == "crystZp":
            d = obj["d"]
            rho = IntMatrix.from_rows(obj["rho"], cols=d)
            jc = obj.get("jCard")
            g = CrystZp(d, obj["p"], rho, bool(obj.get("split", True)),
                        None if jc is None else _card_field(jc))
        else:
            raise ValidationError(f"unknown group type {t!r}")
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed group descriptor: {exc}") from exc
    return validate(g)
