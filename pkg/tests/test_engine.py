import pytest

from lbemc.abstraction import Abstractor, BOOLEAN, CARTESIAN, Precision, ProgramPrecision
from lbemc.cfa import program_variables, summarize
from lbemc.cli import gen_test_locks
from lbemc.engine import (
    Art,
    art_to_dot,
    build_art,
    check_path,
    extract_predicates,
    is_covered,
    verify,
)
from lbemc.formula import VariableRef, compare
from lbemc.frontend import parse_program
from lbemc.oracle import (
    NOT_REACHABLE,
    REACHABLE,
    BUDGET_EXCEEDED,
    DomainBound,
    explicit_reachable,
    random_program,
)

from conftest import const, tvar


@pytest.fixture
def ab(solver):
    return Abstractor(solver)


class TestBuildArt:
    def test_summarized_locks_is_complete_without_precision(self, ab):
        # every edge into the error location is infeasible inside its block,
        # so the empty precision already proves the program
        p, _ = summarize(parse_program(gen_test_locks(3)))
        outcome = build_art(p, ProgramPrecision(), BOOLEAN, ab)
        assert outcome[0] == "complete"
        art = outcome[1]
        assert len(art) <= 5
        assert not any(n.location == p.error for n in art.nodes)

    def test_precision_blocks_dead_branch(self, ab):
        p = parse_program("int x; x = 0; assume(x > 0); error();")
        pos = compare(">", tvar("x"), const(0))
        pi = ProgramPrecision({loc: Precision([pos]) for loc in p.cfa.locations})
        outcome = build_art(p, pi, BOOLEAN, ab)
        assert outcome[0] == "complete"
        assert not any(n.location == p.error for n in outcome[1].nodes)
        # the conjunctive abstraction cannot express "not (x > 0)" after the
        # assignment, so the same precision leaves the error reachable
        assert build_art(p, pi, CARTESIAN, ab)[0] == "error"
        neg = compare("<=", tvar("x"), const(0))
        pi2 = ProgramPrecision({loc: Precision([neg]) for loc in p.cfa.locations})
        assert build_art(p, pi2, CARTESIAN, ab)[0] == "complete"

    def test_empty_precision_reaches_error(self, ab):
        p = parse_program("int x; x = 0; assume(x > 0); error();")
        outcome = build_art(p, ProgramPrecision(), BOOLEAN, ab)
        assert outcome[0] == "error"
        _, art, path = outcome
        assert path[-1][0].target == p.error


class TestCoverage:
    def _node(self, art, ab, location, formula_node):
        from lbemc.abstraction import AbstractFormula

        return art.add(location, AbstractFormula(ab, formula_node), Precision([]))

    def test_conjunction_covered_by_conjunct(self, ab):
        art = Art()
        p1, p2 = ab.bdd.var(0), ab.bdd.var(1)
        older = self._node(art, ab, 7, p1)
        newer = self._node(art, ab, 7, ab.bdd.apply_and(p1, p2))
        assert is_covered(newer, art) == older.id

    def test_weaker_state_not_covered(self, ab):
        art = Art()
        p1, p2 = ab.bdd.var(0), ab.bdd.var(1)
        self._node(art, ab, 7, ab.bdd.apply_and(p1, p2))
        newer = self._node(art, ab, 7, p1)
        assert is_covered(newer, art) is None

    def test_equal_states_later_covered_by_earlier(self, ab):
        art = Art()
        p1 = ab.bdd.var(0)
        older = self._node(art, ab, 7, p1)
        duplicate = self._node(art, ab, 7, p1)
        assert is_covered(duplicate, art) == older.id
        assert is_covered(older, art) is None or is_covered(older, art) != older.id

    def test_different_location_never_covers(self, ab):
        art = Art()
        p1 = ab.bdd.var(0)
        self._node(art, ab, 3, p1)
        other = self._node(art, ab, 7, p1)
        assert is_covered(other, art) is None


class TestCheckPath:
    def _error_path(self, source, solver, mode=BOOLEAN):
        p = parse_program(source)
        outcome = build_art(p, ProgramPrecision(), mode, Abstractor(solver))
        assert outcome[0] == "error"
        return p, outcome[2]

    def test_infeasible(self, solver):
        p, path = self._error_path("int x; x = 0; assume(x > 0); error();", solver)
        assert check_path(path, program_variables(p), solver)[0] == "infeasible"

    def test_feasible_with_model(self, solver):
        p, path = self._error_path("int x; x = nondet(); assume(x > 0); error();", solver)
        status, model = check_path(path, program_variables(p), solver)
        assert status == "feasible"
        assert model[VariableRef("x", 1)] >= 1

    def test_empty_path_is_feasible(self, solver):
        status, model = check_path([], ["x"], solver)
        assert status == "feasible"


class TestExtractPredicates:
    def test_assignment_fact_at_intermediate_location(self, solver):
        p = parse_program("int x; x = 0; assume(x > 0); error();")
        outcome = build_art(p, ProgramPrecision(), BOOLEAN, Abstractor(solver))
        path = outcome[2]
        harvest = extract_predicates(path, program_variables(p))
        mid_location = path[0][0].target
        assert compare("==", tvar("x"), const(0)) in harvest[mid_location]
        err_location = path[-1][0].target
        assert compare(">", tvar("x"), const(0)) in harvest[err_location]

    def test_lock_discipline_predicates(self, solver):
        p = parse_program(gen_test_locks(1))
        outcome = build_art(p, ProgramPrecision(), BOOLEAN, Abstractor(solver))
        assert outcome[0] == "error"
        harvest = extract_predicates(outcome[2], program_variables(p))
        all_preds = {q for preds in harvest.values() for q in preds}
        assert compare("==", tvar("p1"), const(0)) in all_preds
        assert compare("==", tvar("lk1"), const(0)) in all_preds

    def test_feasible_path_rejected(self, solver):
        p = parse_program("int x; x = nondet(); assume(x > 0); error();")
        outcome = build_art(p, ProgramPrecision(), BOOLEAN, Abstractor(solver))
        with pytest.raises(ValueError):
            extract_predicates(outcome[2], program_variables(p), solver=solver)

    def test_lazy_refinement_touches_only_path_locations(self, solver):
        p = parse_program(gen_test_locks(2))
        outcome = build_art(p, ProgramPrecision(), CARTESIAN, Abstractor(solver))
        assert outcome[0] == "error"
        path = outcome[2]
        harvest = extract_predicates(path, program_variables(p))
        path_locations = {edge.target for edge, _ in path}
        assert set(harvest) <= path_locations


class TestVerify:
    def test_straightline_safe(self):
        p = parse_program("int x; x = 0; assume(x > 0); error();")
        r = verify(p, mode=BOOLEAN)
        assert r.verdict == "safe"
        assert r.stats.refinement_steps >= 1

    def test_unsummarized_locks_cartesian_needs_refinement(self):
        p = parse_program(gen_test_locks(2))
        r = verify(p, mode=CARTESIAN)
        assert r.verdict == "safe"
        assert r.stats.refinement_steps >= 1
        assert r.stats.predicates_total > 0

    def test_bug_detected_in_both_encodings(self):
        src = gen_test_locks(3, bug=True)
        p = parse_program(src)
        q, trace = summarize(p)
        for program, mode in ((p, CARTESIAN), (q, BOOLEAN)):
            r = verify(program, mode=mode)
            assert r.verdict == "unsafe"
            assert r.path is not None and r.model is not None
            assert r.integral_witness and r.replayed

    def test_refinement_bound_returns_unknown(self):
        p, _ = summarize(parse_program(gen_test_locks(3)))
        r = verify(p, mode=CARTESIAN, max_refinements=50)
        assert r.verdict == "unknown"
        assert r.stats.refinement_steps <= 50
        assert r.reason is not None

    def test_safe_art_is_complete_and_covered(self):
        p, _ = summarize(parse_program(gen_test_locks(2)))
        r = verify(p, mode=BOOLEAN)
        assert r.verdict == "safe"
        art = r.art
        assert not art.waitlist
        for node in art.nodes:
            if node.covered_by is not None:
                coverer = art.nodes[node.covered_by]
                assert coverer.location == node.location
                assert coverer.covered_by is None
                assert node.abstract.entails(coverer.abstract)

    def test_verdicts_match_oracle_on_random_programs(self):
        # the checker reasons over unbounded integers, the oracle over a
        # bounded domain: a safe verdict must cover everything the oracle
        # can reach, an unsafe verdict must come with a replayable witness
        bound_cfg = DomainBound(default=(-5, 5), budget=120_000)
        checked = 0
        for seed in range(25):
            p = parse_program(random_program(seed))
            ground = explicit_reachable(p, bound_cfg)
            if ground == BUDGET_EXCEEDED:
                continue
            q, _ = summarize(p)
            r = verify(q, mode=BOOLEAN, max_refinements=25)
            if r.verdict == "unknown":
                continue
            checked += 1
            if r.verdict == "safe":
                assert ground == NOT_REACHABLE, seed
            else:
                assert not r.integral_witness or r.replayed, seed
                if ground == REACHABLE:
                    pass  # both sides agree
        assert checked >= 15

    def test_stats_populated(self):
        p, trace = summarize(parse_program(gen_test_locks(2)))
        r = verify(p, mode=BOOLEAN, rule_applications=7)
        s = r.stats
        assert s.art_size == 4
        assert s.rule_applications == 7
        assert s.solver_queries > 0
        assert s.wall_time_ms >= 0
        d = s.as_dict()
        assert set(d) == {
            "art_size", "refinement_steps", "predicates", "solver_queries",
            "rule_applications", "wall_time_ms",
        }
        assert set(d["predicates"]) == {"total", "avg", "max"}


def test_art_dot_export(solver):
    p, _ = summarize(parse_program(gen_test_locks(2)))
    r = verify(p, mode=BOOLEAN)
    dot = art_to_dot(r.art)
    assert dot.startswith("digraph art {")
    assert "style=dashed" in dot  # the covered loop-head unrolling
