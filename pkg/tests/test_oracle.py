import random

import pytest

from lbemc.cfa import CFA, Edge, Program, program_variables, summarize
from lbemc.formula import FALSE, TRUE, compare, f_not, f_or
from lbemc.frontend import parse_program
from lbemc.oracle import (
    BUDGET_EXCEEDED,
    NOT_REACHABLE,
    REACHABLE,
    DomainBound,
    enum_paths,
    equivalent_modulo_indexed,
    explicit_reachable,
    project_indexed,
    random_program,
    replay_path,
    semantically_equivalent,
)
from lbemc.semantics import Assign, Assume, Havoc, sp

from conftest import const, tvar


class TestExplicitReachable:
    def test_reachable(self):
        p = parse_program("int x; x = 1; assume(x == 1); error();")
        assert explicit_reachable(p, DomainBound(default=(0, 1))) == REACHABLE

    def test_not_reachable(self):
        p = parse_program("int x; x = 0; assume(x > 0); error();")
        assert explicit_reachable(p, DomainBound(default=(0, 1))) == NOT_REACHABLE

    def test_loop_with_dead_guard(self):
        src = """
        int i; int x; int z;
        while (i > 0) {
          if (x == 1) { z = 0; } else { z = 1; }
          i = i - 1;
          if (z > 1) { error(); }
        }
        """
        p = parse_program(src)
        bound = DomainBound(default=(0, 2), intervals={"x": (0, 1), "z": (0, 1)})
        assert explicit_reachable(p, bound) == NOT_REACHABLE

    def test_budget(self):
        p = parse_program("int a; int b; a = nondet(); b = nondet();")
        assert explicit_reachable(p, DomainBound(default=(0, 9), budget=5)) == (
            BUDGET_EXCEEDED
        )

    def test_out_of_bound_values_truncate(self):
        p = parse_program("int x; x = 5; error();")
        # the assignment leaves the domain, so the error stays unreached
        assert explicit_reachable(p, DomainBound(default=(0, 1))) == NOT_REACHABLE


class TestEnumPaths:
    def test_single_edge(self):
        p = Program(CFA((0, 1, 2), (Edge(0, Assume(TRUE), 2),)), 0, 1)
        assert len(enum_paths(p, 1)) == 1

    def test_diamond(self):
        e1 = Edge(0, Assume(TRUE), 2)
        e2 = Edge(2, Assign("x", const(1)), 3)
        e3 = Edge(0, Assume(TRUE), 4)
        e4 = Edge(4, Assign("x", const(2)), 3)
        p = Program(CFA((0, 1, 2, 3, 4), (e1, e2, e3, e4)), 0, 1)
        paths = enum_paths(p, 2)
        assert len(paths) == 4  # two prefixes and two full routes
        assert sorted(len(s) for s in paths) == [1, 1, 2, 2]

    def test_loop_unrollings(self):
        enter = Edge(0, Assume(TRUE), 2)
        body = Edge(2, Assume(TRUE), 3)
        back = Edge(3, Assign("x", const(0)), 2)
        exit_ = Edge(2, Assume(FALSE), 4)
        p = Program(CFA((0, 1, 2, 3, 4), (enter, body, back, exit_)), 0, 1)
        paths = enum_paths(p, 4)
        assert paths == [
            (enter,),
            (enter, body), (enter, exit_),
            (enter, body, back),
            (enter, body, back, body), (enter, body, back, exit_),
        ]


class TestEquivalence:
    def test_absorption(self, solver):
        a = compare(">", tvar("x"), const(0))
        b = compare(">", tvar("x"), const(1))
        assert semantically_equivalent(f_or(a, b), a, solver)

    def test_strict_vs_nonstrict(self, solver):
        assert not semantically_equivalent(
            compare(">", tvar("x"), const(0)),
            compare(">=", tvar("x"), const(0)),
            solver,
        )

    def test_true_not_false(self, solver):
        assert semantically_equivalent(TRUE, f_not(FALSE), solver)


class TestProjection:
    def test_assignment_postcondition(self, solver):
        post = sp(Assign("x", tvar("x") + 1), compare("==", tvar("x"), const(0)))
        assert semantically_equivalent(
            project_indexed(post), compare("==", tvar("x"), const(1)), solver
        )

    def test_havoc_projects_to_true(self, solver):
        post = sp(Havoc("x"), compare("==", tvar("x"), const(3)))
        assert project_indexed(post) is TRUE

    def test_rejects_propositional_variables(self):
        from lbemc.formula import PropVar

        with pytest.raises(ValueError):
            project_indexed(PropVar("v"))


class TestLemmaHarnesses:
    def test_sp_distributes_over_disjunction(self, solver):
        from lbemc.oracle import random_formula, random_operation

        rng = random.Random(5)
        for _ in range(30):
            names = ["a", "b", "c"][: rng.randint(1, 3)]
            op = random_operation(rng, names, depth=3)
            f1 = random_formula(rng, names, depth=2)
            f2 = random_formula(rng, names, depth=2)
            left = sp(op, f_or(f1, f2))
            right = f_or(sp(op, f1), sp(op, f2))
            assert equivalent_modulo_indexed(left, right, solver), (op, f1, f2)

    def test_summarized_edges_cover_folded_paths(self, solver):
        # loop-free programs: the postcondition of each summarized edge is
        # the disjunction of the postconditions over the folded paths
        for seed in range(12):
            src = random_program(900 + seed, loop_depth=0, max_stmts=8)
            p = parse_program(src)
            q, _ = summarize(p)
            originals = enum_paths(p, len(p.cfa.edges))
            for edge in q.cfa.edges:
                if edge.source != q.entry:
                    continue
                folded = [
                    path for path in originals
                    if path[-1].target == edge.target
                    and all(step.target != edge.target for step in path[:-1])
                ]
                assert folded, edge
                lhs = sp(edge.op, TRUE)
                rhs = f_or(*(
                    _sp_path(path, TRUE) for path in folded
                ))
                assert equivalent_modulo_indexed(lhs, rhs, solver), (seed, edge)


def _sp_path(path, phi):
    for edge in path:
        phi = sp(edge.op, phi)
    return phi


class TestReplay:
    def test_guided_replay_reaches_error(self, solver):
        src = "int x; x = nondet(); if (x > 3) { error(); }"
        p = parse_program(src)
        from lbemc.engine import build_art, check_path
        from lbemc.abstraction import Abstractor, ProgramPrecision

        outcome = build_art(p, ProgramPrecision(), "boolean", Abstractor(solver))
        assert outcome[0] == "error"
        path = outcome[2]
        status, model = check_path(path, program_variables(p), solver)
        assert status == "feasible"
        assert replay_path(p, [e for e, _ in path], model)


class TestRandomProgram:
    def test_deterministic(self):
        assert random_program(42) == random_program(42)
        assert random_program(42) != random_program(43)

    def test_parses(self):
        for seed in range(30):
            parse_program(random_program(seed))
