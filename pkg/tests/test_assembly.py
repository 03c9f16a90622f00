import pytest
from hypothesis import given, settings, strategies as st

from kla import assembly as asm, formalgroups as fg, groupcat as gc
from kla.errors import DecorationNeedsZ, NoApplicableTheorem, UnknownJ, ValidationError
from kla.formalgroups import OMEGA, ZERO, Fin, RingExpr, dsum
from kla.intlattice import IntMatrix

G = fg.PRESETS["generic"]
R = fg.PRESETS["regular"]
ZR = fg.PRESETS["Z"]
NS = range(-5, 6)
COMPANION3 = [[0, -1], [1, -1]]
CYCLE3 = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]


def act(d, p, rho):
    return gc.analyze_action(d, p, rho)


def minus_i(d):
    return (-IntMatrix.identity(d)).tolist()


# ------------------------------------------------------------------ Z^d


@pytest.mark.parametrize("n", NS)
def test_wh_zd(n):
    assert asm.wh_zd(1, G, n) == fg.NK(n, G, 2)
    assert asm.wh_zd(2, G, n) == fg.scale(dsum(fg.NK(n, G, 2), fg.NK(n - 1, G, 2)), OMEGA)
    for d in range(5):
        assert asm.wh_zd(d, R, n) == ZERO


@pytest.mark.parametrize("n", NS)
def test_k_zd(n):
    assert asm.k_zd(0, G, n) == fg.K(n, G)
    assert asm.k_zd(1, G, n) == dsum(fg.K(n, G), fg.K(n - 1, G), fg.NK(n, G, 2))
    assert asm.k_zd(2, G, n) == dsum(fg.K(n, G), fg.K(n - 1, G, 2), fg.K(n - 2, G),
                                     fg.scale(dsum(fg.NK(n, G, 2), fg.NK(n - 1, G, 2)), OMEGA))


def test_l_zd():
    for n in NS:
        assert asm.l_zd(0, G, n) == fg.L(n, G)
        assert asm.l_zd(2, G, n) == dsum(fg.L(n, G), fg.L(n - 1, G, mult=2), fg.L(n - 2, G))
        for d in range(5):
            assert asm.l_zd(d, ZR, n) == asm.l_zd(d, ZR, n + 4)
    assert fg.render(asm.l_zd(3, ZR, 0)) == "Z + (Z/2)^3"


# ----------------------------------------------- free, surface, hyperbolic


@pytest.mark.parametrize("n", NS)
def test_free_group(n):
    assert asm.free_group(1, G, "K", n) == asm.k_zd(1, G, n)
    assert asm.free_group(2, G, "K", n) == dsum(fg.K(n, G), fg.K(n - 1, G, 2), fg.NK(n, G, OMEGA))
    assert asm.free_group(3, G, "L", n) == dsum(fg.L(n, G), fg.L(n - 1, G, mult=3))


def test_surface_group():
    for n in NS:
        assert asm.surface_group(0, G, "K", n) == fg.K(n, G)
        assert asm.surface_group(1, G, "K", n) == asm.k_zd(2, G, n)
    got = [fg.render(asm.surface_group(2, ZR, "L", n)) for n in range(4)]
    assert got == ["Z + Z/2", "Z^4", "Z + Z/2", "(Z/2)^4"]
    for g in range(2, 6):
        for n in range(-8, 9):
            e = asm.surface_group(g, ZR, "L", n)
            expected = {0: "Z + Z/2", 2: "Z + Z/2", 1: f"Z^{2 * g}", 3: f"(Z/2)^{2 * g}"}[n % 4]
            assert fg.render(e) == expected


def test_tf_hyperbolic_reproduces_examples():
    for n in NS:
        assert asm.tf_hyperbolic((1,), Fin(0), G, "K", n) == fg.K(n, G)
        for g in (2, 3):
            for theory in ("K", "Wh", "L"):
                assert (asm.tf_hyperbolic((1, 2 * g, 1), OMEGA, G, theory, n)
                        == asm.surface_group(g, G, theory, n))
        for r in (2, 3):
            for theory in ("K", "Wh", "L"):
                assert (asm.tf_hyperbolic((1, r), gc.micy_card_free_group(r), G, theory, n)
                        == asm.free_group(r, G, theory, n))


def test_hyperbolic_skeleton():
    e0 = asm.hyperbolic_skeleton(Fin(0), G, "K", 0)
    assert len(e0.terms) == 1 and e0.atoms()[0].kind == "Opaque"
    e = asm.hyperbolic_skeleton(OMEGA, G, "K", 0)
    assert len(e.terms) == 2 and OMEGA in [c for _, c in e.terms]
    rows = asm.evaluate(asm.Query(gc.Hyperbolic(OMEGA), G, "L", (0,)))
    assert rows[0].conditional
    rows = asm.evaluate(asm.Query(gc.Hyperbolic(OMEGA), ZR, "L", (0,)))
    assert not rows[0].conditional


# ----------------------------------------------------- Z^d by Z/p families


def test_free_action_wh_examples():
    d_inf = act(1, 2, [[-1]])
    for n in NS:
        assert asm.free_action_wh(d_inf, G, n) == dsum(fg.Wh(n, "Z/2", G, 2), fg.NK(n, G))
        assert asm.free_action_wh(act(2, 2, minus_i(2)), R, n) == fg.Wh(n, "Z/2", R, 4)


@pytest.mark.parametrize("d", range(0, 5))
def test_trivial_q_reduces_to_zd(d):
    a = act(d, 1, IntMatrix.identity(d).tolist())
    for ring in (G, R, ZR):
        for n in range(-3, 4):
            assert asm.free_action_wh(a, ring, n) == asm.wh_zd(d, ring, n)


def test_free_action_l_examples():
    for n in NS:
        assert asm.free_action_l(act(1, 2, [[-1]]), G, n) == dsum(fg.Sper(n, "Z/2", G, mult=2),
                                                                  fg.UNil(n, G))
        assert asm.free_action_l(act(2, 2, minus_i(2)), G, n) == dsum(
            fg.Sper(n, "Z/2", G, mult=4), fg.UNil(n, G, OMEGA))
        odd = asm.free_action_l(act(2, 3, COMPANION3), G, n)
        assert odd == fg.Sper(n, "Z/3", G, mult=3)


def test_zp_wh_examples():
    a = act(3, 3, CYCLE3)
    for n in NS:
        assert asm.zp_wh(a, R, n) == dsum(fg.Wh(n, "Z/3", R), fg.Wh(n - 1, "Z/3", R),
                                          fg.NK(n, RingExpr(R, "Z/3"), 2))
        free = act(2, 3, COMPANION3)
        assert asm.zp_wh(free, R, n) == fg.Wh(n, "Z/3", R, 3) == asm.free_action_wh(free, R, n)


@pytest.mark.parametrize("d", range(0, 5))
@pytest.mark.parametrize("p", [2, 3, 5])
def test_zp_wh_identity_matches_product(d, p):
    a = act(d, p, IntMatrix.identity(d).tolist())
    for n in range(-3, 4):
        assert asm.zp_wh(a, R, n) == asm.k_product_with_zd(d, R, f"Z/{p}", n, "Wh")


def test_zp_l_examples():
    for n in NS:
        assert asm.zp_l(act(2, 3, COMPANION3), G, n) == fg.Sper(n, "Z/3", G, mult=3)
        assert asm.zp_l(act(1, 3, [[1]]), G, n) == dsum(fg.Sper(n, "Z/3", G), fg.Sper(n - 1, "Z/3", G))
    comp5 = [[0, 0, 0, -1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1]]
    a5 = act(4, 5, comp5)
    e = asm.zp_l(a5, ZR, 2, "s", structure_set_preset=True)
    assert fg.render(e) == "(Z[1/5])^10"
    assert asm.zp_l(a5, ZR, 3, "s", structure_set_preset=True) == ZERO


def test_k_product_with_zd():
    g = RingExpr(G, "Z/3")
    for n in NS:
        assert asm.k_product_with_zd(0, G, "Z/3", n) == fg.K(n, g)
        assert asm.k_product_with_zd(1, G, "Z/3", n) == dsum(fg.K(n, g), fg.K(n - 1, g), fg.NK(n, g, 2))


# ------------------------------------------------------------- evaluate


def test_evaluate_examples():
    rows = asm.evaluate(asm.Query(gc.Zd(2), ZR, "L", (0, 1, 2, 3)))
    assert [fg.render(r.expr) for r in rows] == ["Z + Z/2", "Z^2", "Z + Z/2", "(Z/2)^2"]
    rows = asm.evaluate(asm.Query(gc.Surface(2), ZR, "L", (0, 1, 2, 3)))
    assert [bool(r.notes) for r in rows] == [False, True, False, True]
    with pytest.raises(UnknownJ):
        asm.evaluate(asm.Query(gc.CrystZp(2, 3, IntMatrix.from_rows(COMPANION3), split=False),
                               R, "Wh", (0,)))


def test_evaluate_errors():
    c = gc.CrystZp(3, 3, IntMatrix.from_rows(CYCLE3))
    with pytest.raises(NoApplicableTheorem):
        asm.evaluate(asm.Query(c, G, "Wh", (0,)))
    with pytest.raises(NoApplicableTheorem):
        asm.evaluate(asm.Query(c, R, "K", (0,)))
    with pytest.raises(DecorationNeedsZ):
        asm.evaluate(asm.Query(gc.Zd(2), R, "L", (0,), decoration="s"))
    with pytest.raises(ValidationError):
        asm.Query(gc.Zd(2), R, "K", (0,), decoration="s")
    with pytest.raises(ValidationError):
        asm.Query(gc.Zd(2), R, "X", (0,))


def test_decorations_collapse_over_z_for_torsion_free():
    for deco in ("s", "h", "p", "-2"):
        rows = asm.evaluate(asm.Query(gc.Surface(2), ZR, "L", tuple(range(4)), decoration=deco))
        base = asm.evaluate(asm.Query(gc.Surface(2), ZR, "L", tuple(range(4))))
        assert [r.expr for r in rows] == [r.expr for r in base]


CATALOG = [gc.Zd(0), gc.Zd(3), gc.Free(2), gc.Surface(2), gc.TFHyperbolic((1, 3, 3, 1), OMEGA),
           gc.Hyperbolic(OMEGA), gc.CrystZp(1, 2, IntMatrix.from_rows([[-1]])),
           gc.CrystZp(2, 3, IntMatrix.from_rows(COMPANION3)),
           gc.CrystZp(3, 3, IntMatrix.from_rows(CYCLE3))]


@pytest.mark.parametrize("group", CATALOG)
@pytest.mark.parametrize("ring", sorted(fg.PRESETS))
@pytest.mark.parametrize("theory", asm.THEORIES)
def test_hypotheses_only_name_ring_axioms(group, ring, theory):
    try:
        rows = asm.evaluate(asm.Query(group, fg.PRESETS[ring], theory, (-1, 0, 1)))
    except NoApplicableTheorem:
        return
    spec = fg.PRESETS[ring]
    for r in rows:
        for h in r.hypotheses:
            if h.kind == "axiom":
                assert h.name in fg.AXIOMS
                assert h.satisfied == spec.has(h.name)
            else:
                assert h.kind in ("checked", "assumed")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(-6, 6))
def test_localized_free_action_l_has_no_unil(d, n):
    e = fg.localize_away_from_2(asm.free_action_l(act(d, 2, minus_i(d)), G, n))
    assert all(a.kind != "UNil" for a in e.atoms())
