import random

import pytest

from kla import assembly, formalgroups as fg, oracles
from kla.errors import NotOrderP, QuotientTooLarge
from kla.intlattice import FiniteAbelian, IntMatrix, h1_cyclic

R = fg.PRESETS["regular"]


def test_coset_enum_examples():
    assert oracles.h1_coset_enum((-IntMatrix.identity(3)).tolist(), 2) == FiniteAbelian((2, 2, 2))
    assert oracles.h1_coset_enum([[1, 0], [0, 1]], 3).is_trivial
    perm = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    assert oracles.h1_coset_enum(perm, 3).is_trivial
    assert oracles.h1_coset_enum([[0, -1], [1, -1]], 3) == FiniteAbelian((3,))


def test_coset_enum_errors(monkeypatch):
    with pytest.raises(NotOrderP):
        oracles.h1_coset_enum([[0, -1], [1, -1]], 2)
    with pytest.raises(QuotientTooLarge):
        oracles.h1_coset_enum((-IntMatrix.identity(4)).tolist(), 2, bound=10)
    monkeypatch.setenv("KLA_ORACLE_BOUND", "3")
    with pytest.raises(QuotientTooLarge):
        oracles.h1_coset_enum((-IntMatrix.identity(3)).tolist(), 2)


def test_structure_reconstruction_handles_mixed_orders():
    # Z/4 + Z/2 + Z/3 given by its elements; checks the counting step on its own
    elems = [(a, b, c) for a in range(4) for b in range(2) for c in range(3)]

    def add(x, y):
        return ((x[0] + y[0]) % 4, (x[1] + y[1]) % 2, (x[2] + y[2]) % 3)
    got = oracles._structure_from_elements(elems, add, (0, 0, 0))
    assert got == FiniteAbelian((2, 12))


def test_random_matrices_have_order_p():
    rng = random.Random(1)
    for _ in range(50):
        p = rng.choice([2, 3, 5])
        m = IntMatrix.from_rows(oracles.random_order_p_matrix(p, 6, rng))
        assert m ** p == IntMatrix.identity(m.rows)


def test_coset_enum_matches_h1_cyclic():
    rng = random.Random(7)
    for _ in range(40):
        p = rng.choice([2, 3, 5])
        rho = oracles.random_order_p_matrix(p, 6, rng)
        assert oracles.h1_coset_enum(rho, p) == h1_cyclic(IntMatrix.from_rows(rho), p)


def test_bhs_examples():
    for n in range(-3, 4):
        assert oracles.bhs_iterate(0, R, n) == fg.simplify(fg.K(n, R))
        assert oracles.bhs_iterate(2, R, n) == fg.simplify(
            fg.dsum(fg.K(n, R), fg.K(n - 1, R, 2), fg.K(n - 2, R)))
    e = oracles.bhs_iterate(5, R, 0)
    # over a regular ring every K_{-i} with i >= 1 vanishes, leaving K_0
    assert e == fg.K(0, R)
    e5 = oracles.bhs_iterate(5, R, 5)
    assert [c.n for _, c in e5.terms] == [1, 5, 10, 10, 5, 1]


def test_bhs_agrees_with_closed_form():
    for d in range(9):
        for n in range(-5, 6):
            assert oracles.bhs_iterate(d, R, n) == assembly.k_zd(d, R, n)


def test_l_periodic_table():
    assert oracles.l_periodic_table(0) == fg.Z()
    assert oracles.l_periodic_table(2, "s") == fg.Zmod(2)
    assert oracles.l_periodic_table(-1).is_zero


def test_orbit_probe_examples():
    r = oracles.primitive_orbit_probe([[-1, 0], [0, -1]], 2, 5)
    assert r["stabilizerOrders"] == [2] and r["i1"] == 0 and r["dichotomy"]
    r = oracles.primitive_orbit_probe([[0, -1], [1, -1]], 3, 5)
    assert r["stabilizerOrders"] == [1] and r["i2"] == 0
    r = oracles.primitive_orbit_probe([[-1]], 2, 1)
    assert r["classes"] == 1 and r["stabilizerOrders"] == [2]


@pytest.mark.parametrize("bound", [1, 2, 3, 4])
def test_orbit_probe_dichotomy_over_bounds(bound):
    for rho, p in (([[-1, 0, 0], [0, -1, 0], [0, 0, -1]], 2), ([[0, -1], [1, -1]], 3),
                   ([[0, 0, 0, -1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1]], 5)):
        r = oracles.primitive_orbit_probe(rho, p, bound)
        assert r["dichotomy"] and r["matchesParityRule"]


def test_z2_primitive_count_grows():
    # more primitive classes appear with every bound: the MICY count of Z^2 is infinite
    counts = [oracles.primitive_orbit_probe([[1, 0], [0, 1]], 1, b)["classes"] for b in (1, 2, 3, 4)]
    assert counts == sorted(set(counts))


def test_suite_agrees_and_self_test_fails():
    assert all(r.agree for r in oracles.run_suite(seed=3, quick=True))
    bad = oracles.run_suite(seed=3, quick=True, bug="h1")
    assert any(not r.agree for r in bad)


def test_report_json():
    r = oracles.run_suite(seed=0, quick=True)[0]
    j = r.to_json()
    assert set(j) == {"name", "inputDigest", "mainValue", "oracleValue", "agree"}
