import pytest

from lbemc.cfa import program_variables
from lbemc.formula import TRUE, compare, f_and, f_not, f_or
from lbemc.frontend import (
    ParseError,
    SAssign,
    SError,
    SIf,
    SWhile,
    parse,
    parse_program,
)
from lbemc.semantics import Assume, Havoc

from conftest import const, tvar


class TestParse:
    def test_basic_statement_counts(self):
        sp = parse("int x; x = 0; assume(x > 0); error();")
        assert sp.declarations == ["x"]
        assert len(sp.body) == 3

    def test_nondet_assignment(self):
        sp = parse("int x; x = nondet();")
        stmt = sp.body[0]
        assert isinstance(stmt, SAssign) and stmt.expr is None

    def test_undeclared_variable(self):
        with pytest.raises(ParseError) as err:
            parse("x = 0;")
        assert "undeclared" in str(err.value)
        assert err.value.line == 1

    def test_redeclaration(self):
        with pytest.raises(ParseError) as err:
            parse("int x; int x;")
        assert "redeclaration" in str(err.value)

    def test_lexical_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("int x;\nx = $;")
        assert err.value.line == 2

    def test_syntax_error(self):
        with pytest.raises(ParseError):
            parse("int x; if x > 0 { }")

    def test_assert_desugars_to_guarded_error(self):
        sp = parse("int x; assert(x == 1);")
        stmt = sp.body[0]
        assert isinstance(stmt, SIf)
        assert stmt.cond == f_not(compare("==", tvar("x"), const(1)))
        assert len(stmt.then) == 1 and isinstance(stmt.then[0], SError)
        assert stmt.els == []

    def test_comments_ignored(self):
        sp = parse("int x; // trailing words $ ! @\nx = 1; // more\n")
        assert len(sp.body) == 1

    def test_compound_conditions(self):
        sp = parse("int x; int y; assume(x > 0 && (y < 1 || !(x == y)));")
        cond = sp.body[0].cond
        expected = f_and(
            compare(">", tvar("x"), const(0)),
            f_or(
                compare("<", tvar("y"), const(1)),
                f_not(compare("==", tvar("x"), tvar("y"))),
            ),
        )
        assert cond == expected

    def test_expression_grammar(self):
        sp = parse("int x; int y; x = 2 * x + y - 3; y = -(x + 1);")
        assert sp.body[0].expr == tvar("x").scale(2) + tvar("y") - 3
        assert sp.body[1].expr == -(tvar("x") + 1)

    def test_star_conditions(self):
        sp = parse("int x; if (*) { x = 1; } while (*) { skip; }")
        assert isinstance(sp.body[0], SIf) and sp.body[0].cond is None
        assert isinstance(sp.body[1], SWhile) and sp.body[1].cond is None


class TestToCfa:
    def test_minimal_error_program(self):
        p = parse_program("int x; error();")
        assert set(p.cfa.locations) == {p.entry, p.error}
        assert len(p.cfa.edges) == 1
        edge = p.cfa.edges[0]
        assert edge.source == p.entry and edge.target == p.error
        assert edge.op == Assume(TRUE)

    def test_fresh_error_location_even_if_unused(self):
        p = parse_program("int x; x = 0;")
        assert p.error in p.cfa.locations
        assert not any(e.target == p.error for e in p.cfa.edges)

    def test_nondet_becomes_havoc(self):
        p = parse_program("int x; x = nondet();")
        assert p.cfa.edges[0].op == Havoc("x")

    def test_one_edge_per_operation(self):
        src = """
        int x; int y;
        x = 0;
        y = nondet();
        skip;
        assume(x <= y);
        if (x == y) { x = 1; } else { skip; }
        while (x > 0) { x = x - 1; }
        assert(y >= 0);
        """
        p = parse_program(src)
        # 4 straight-line statements + 2 per if + (then+else bodies: 2)
        # + 2 per while + loop body 1 + assert (2 cond edges + error edge)
        assert len(p.cfa.edges) == 4 + 2 + 2 + 2 + 1 + 3

    def test_entry_has_no_incoming_edges(self):
        p = parse_program("int i; while (i > 0) { i = i - 1; }")
        assert all(e.target != p.entry for e in p.cfa.edges)

    def test_while_as_first_statement_gets_fresh_head(self):
        p = parse_program("int i; while (i > 0) { i = i - 1; }")
        skip_edges = [e for e in p.cfa.edges if e.source == p.entry]
        assert len(skip_edges) == 1 and skip_edges[0].op == Assume(TRUE)

    def test_statements_after_error_chain_from_error_location(self):
        p = parse_program("int x; error(); x = 0;")
        assign = [e for e in p.cfa.edges if e.op != Assume(TRUE)]
        assert len(assign) == 1
        assert assign[0].source == p.error

    def test_every_nonfinal_location_has_outgoing(self):
        src = "int x; x = 0; if (x > 0) { x = 1; } x = 2;"
        p = parse_program(src)
        sinks = {
            loc for loc in p.cfa.locations
            if not any(e.source == loc for e in p.cfa.edges)
        }
        # only the error location and the final exit are sinks
        assert sinks == {p.error, 2}

    def test_test_locks_structure(self):
        from lbemc.cli import gen_test_locks

        for n in (1, 2):
            p = parse_program(gen_test_locks(n))
            error_edges = [e for e in p.cfa.edges if e.target == p.error]
            assert len(error_edges) == n  # one guarded error edge per lock
            assert program_variables(p) == sorted(
                ["cond"] + [f"p{i}" for i in range(1, n + 1)]
                + [f"lk{i}" for i in range(1, n + 1)]
            )
