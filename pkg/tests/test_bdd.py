import itertools

from lbemc.bdd import Bdd


def test_canonicity_same_function_same_node():
    b = Bdd()
    # (v0 and v1) or (v0 and not v1)  ==  v0
    left = b.apply_or(
        b.apply_and(b.var(0), b.var(1)),
        b.apply_and(b.var(0), b.apply_not(b.var(1))),
    )
    assert left == b.var(0)


def test_terminals():
    b = Bdd()
    assert b.apply_and(b.TRUE, b.FALSE) == b.FALSE
    assert b.apply_or(b.TRUE, b.FALSE) == b.TRUE
    assert b.apply_not(b.apply_not(b.var(3))) == b.var(3)


def test_implies():
    b = Bdd()
    conj = b.apply_and(b.var(0), b.var(1))
    assert b.implies(conj, b.var(0))
    assert not b.implies(b.var(0), conj)
    assert b.implies(b.FALSE, conj)
    assert b.implies(conj, b.TRUE)


def test_cube_and_evaluate():
    b = Bdd()
    cube = b.cube([(0, True), (2, False)])
    for v0, v2 in itertools.product([False, True], repeat=2):
        assert b.evaluate(cube, {0: v0, 2: v2}) == (v0 and not v2)


def test_support():
    b = Bdd()
    f = b.apply_or(b.apply_and(b.var(1), b.var(4)), b.var(2))
    assert b.support(f) == [1, 2, 4]


def test_exhaustive_equivalence_small():
    # every binary boolean combination built two different ways collapses
    b = Bdd()
    v0, v1 = b.var(0), b.var(1)
    demorgan = b.apply_not(b.apply_and(b.apply_not(v0), b.apply_not(v1)))
    assert demorgan == b.apply_or(v0, v1)
    for bits in itertools.product([False, True], repeat=2):
        env = {0: bits[0], 1: bits[1]}
        assert b.evaluate(demorgan, env) == (bits[0] or bits[1])
