"""Satisfiability, entailment, and AllSAT for quantifier-free linear formulas.

The internal engine searches the propositional skeleton of a formula
(Tseitin CNF, chronological DPLL) and checks each candidate model's implied
atom conjunction with a Fourier-Motzkin procedure over the rationals.
Negated literals are folded into positive atoms up front using the
integer-exact complements from the formula module, so the theory layer only
ever sees conjunctions of canonical atoms.  Theory conflicts are turned
into blocking clauses over the conflicting atoms, which keeps enumeration
on heavily disjunctive inputs polynomial in practice.

An SMT-LIB2 process backend is provided as an alternative; it receives the
same literal-normalized formulas as the internal engine, so the two agree
verdict-for-verdict.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd

from .formula import (
    And,
    Atom,
    EQ,
    FALSE,
    FalseF,
    Formula,
    Not,
    Or,
    PropVar,
    TRUE,
    TrueF,
    VariableRef,
    f_and,
    f_not,
    f_or,
    negate_atom,
    nnf,
    var_sort_key,
    variables,
)


@dataclass
class SatResult:
    status: str  # "sat" | "unsat"
    model: dict[VariableRef, Fraction] | None = None
    bools: dict[str, bool] | None = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def sat(model=None, bools=None) -> SatResult:
    return SatResult("sat", model or {}, bools or {})


UNSAT = SatResult("unsat")


# ---------------------------------------------------------------------------
# theory: conjunctions of canonical atoms, Fourier-Motzkin over Q
# ---------------------------------------------------------------------------

@dataclass
class _Lin:
    """sum(coeffs) + const  (= 0 | <= 0), with input-atom origins for cores."""

    coeffs: dict[VariableRef, Fraction]
    const: Fraction
    is_eq: bool
    origins: frozenset[int]

    def key(self):
        if not self.coeffs:
            return (self.is_eq, (), self.const)
        denom = 1
        for c in self.coeffs.values():
            denom = denom * c.denominator // gcd(denom, c.denominator)
        denom = denom * self.const.denominator // gcd(denom, self.const.denominator)
        ints = [int(c * denom) for c in self.coeffs.values()] + [int(self.const * denom)]
        g = 0
        for i in ints:
            g = gcd(g, abs(i))
        g = g or 1
        items = tuple(
            sorted(((v, int(c * denom) // g) for v, c in self.coeffs.items()),
                   key=lambda it: var_sort_key(it[0]))
        )
        return (self.is_eq, items, int(self.const * denom) // g)


def _lin_of_atom(atom: Atom, origin: int) -> _Lin:
    coeffs = {v: Fraction(c) for v, c in atom.term.coeffs}
    return _Lin(coeffs, Fraction(atom.term.const), atom.rel == EQ, frozenset([origin]))


class _TheoryConflict(Exception):
    def __init__(self, core: frozenset[int]):
        self.core = core


def _const_check(c: _Lin) -> bool:
    """True if the constraint is trivially satisfied; raises on contradiction."""
    if c.coeffs:
        return False
    if c.is_eq:
        if c.const != 0:
            raise _TheoryConflict(c.origins)
    elif c.const > 0:
        raise _TheoryConflict(c.origins)
    return True


def _substitute(c: _Lin, v: VariableRef, expr: dict[VariableRef, Fraction],
                expr_const: Fraction, origins: frozenset[int]) -> _Lin:
    b = c.coeffs.get(v)
    if b is None:
        return c
    coeffs = {w: cw for w, cw in c.coeffs.items() if w != v}
    for w, cw in expr.items():
        coeffs[w] = coeffs.get(w, Fraction(0)) + b * cw
        if coeffs[w] == 0:
            del coeffs[w]
    return _Lin(coeffs, c.const + b * expr_const, c.is_eq, c.origins | origins)


def _solve_lin(constraints: list[_Lin]):
    """Decide a conjunction of linear constraints over the rationals.

    Returns a model dict on success; raises _TheoryConflict with the origin
    set of a contradiction otherwise.  Equalities are used for substitution
    first, then inequalities are eliminated variable by variable.
    """
    eqs = [c for c in constraints if c.is_eq]
    ineqs = [c for c in constraints if not c.is_eq]
    subst: list[tuple[VariableRef, dict[VariableRef, Fraction], Fraction]] = []

    while eqs:
        eq = eqs.pop(0)
        if _const_check(eq):
            continue
        vs = sorted(eq.coeffs, key=var_sort_key)
        v = next((w for w in vs if abs(eq.coeffs[w]) == 1), vs[0])
        a = eq.coeffs[v]
        expr = {w: -c / a for w, c in eq.coeffs.items() if w != v}
        expr_const = -eq.const / a
        eqs = [_substitute(c, v, expr, expr_const, eq.origins) for c in eqs]
        new_ineqs = []
        for c in ineqs:
            c2 = _substitute(c, v, expr, expr_const, eq.origins)
            if not _const_check(c2):
                new_ineqs.append(c2)
        ineqs = new_ineqs
        subst.append((v, expr, expr_const))

    cur = []
    seen = set()
    for c in ineqs:
        k = c.key()
        if k not in seen:
            seen.add(k)
            cur.append(c)

    names = sorted({v for c in cur for v in c.coeffs}, key=var_sort_key)
    levels: list[tuple[VariableRef, list[_Lin]]] = []
    for v in names:
        with_v = [c for c in cur if v in c.coeffs]
        rest = [c for c in cur if v not in c.coeffs]
        uppers = [c for c in with_v if c.coeffs[v] > 0]
        lowers = [c for c in with_v if c.coeffs[v] < 0]
        levels.append((v, with_v))
        derived = []
        seen = {c.key() for c in rest}
        for up in uppers:
            for lo in lowers:
                a, b = up.coeffs[v], lo.coeffs[v]
                coeffs: dict[VariableRef, Fraction] = {}
                for w, cw in up.coeffs.items():
                    if w != v:
                        coeffs[w] = cw * -b
                for w, cw in lo.coeffs.items():
                    if w == v:
                        continue
                    coeffs[w] = coeffs.get(w, Fraction(0)) + cw * a
                    if coeffs[w] == 0:
                        del coeffs[w]
                comb = _Lin(coeffs, up.const * -b + lo.const * a, False,
                            up.origins | lo.origins)
                if _const_check(comb):
                    continue
                k = comb.key()
                if k not in seen:
                    seen.add(k)
                    derived.append(comb)
        cur = rest + derived

    env: dict[VariableRef, Fraction] = {}
    for v, with_v in reversed(levels):
        lo = hi = None
        for c in with_v:
            a = c.coeffs[v]
            rest_val = c.const + sum(
                cw * env.get(w, Fraction(0)) for w, cw in c.coeffs.items() if w != v
            )
            bound = -rest_val / a
            if a > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        env[v] = _pick_value(lo, hi)
    for v, expr, expr_const in reversed(subst):
        env[v] = expr_const + sum(c * env.get(w, Fraction(0)) for w, c in expr.items())
    return env


def _pick_value(lo: Fraction | None, hi: Fraction | None) -> Fraction:
    """Deterministic witness preferring small integers."""
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return Fraction(min(0, floor(hi)))
    if hi is None:
        return Fraction(max(0, ceil(lo)))
    assert lo <= hi
    if lo <= 0 <= hi:
        return Fraction(0)
    c = Fraction(ceil(lo))
    return c if c <= hi else (lo + hi) / 2


def theory_check(atoms: list[Atom] | tuple[Atom, ...]) -> SatResult:
    """Satisfiability of a conjunction of canonical atoms over the rationals."""
    for a in atoms:
        if not isinstance(a, Atom):
            raise TypeError(f"theory_check expects canonical atoms, got {a!r}")
    try:
        env = _solve_lin([_lin_of_atom(a, i) for i, a in enumerate(atoms)])
    except _TheoryConflict:
        return UNSAT
    return sat(model=env)


# ---------------------------------------------------------------------------
# preprocessing: NNF with negations folded into atoms
# ---------------------------------------------------------------------------

def _positivize(f: Formula) -> Formula:
    """On an NNF input, rewrite Not(atom) to its integer-exact complement.

    Memoized per subformula object so shared subtrees stay shared.
    """
    memo: dict[int, Formula] = {}

    def walk(g: Formula) -> Formula:
        cached = memo.get(id(g))
        if cached is not None:
            return cached
        if isinstance(g, Not):
            if isinstance(g.arg, Atom):
                out = negate_atom(g.arg)
            elif isinstance(g.arg, PropVar):
                out = g
            else:
                raise ValueError("input not in NNF")
        elif isinstance(g, And):
            out = f_and(*(walk(a) for a in g.args))
        elif isinstance(g, Or):
            out = f_or(*(walk(a) for a in g.args))
        else:
            out = g
        memo[id(g)] = out
        return out

    return walk(f)


def normalize(f: Formula) -> Formula:
    """NNF + positive atom rewrite; the form both solver backends decide."""
    return _positivize(nnf(f))


# ---------------------------------------------------------------------------
# Tseitin CNF + chronological DPLL with theory blocking clauses
# ---------------------------------------------------------------------------

class _Cnf:
    """Tseitin encoding keyed by structural formula identity.

    Gates are never decided: they are functions of the inputs and get their
    values by propagation.  For every disjunction the clause requiring one
    of its arguments is recorded as a *selection* clause; search decisions
    (besides the AllSAT-important variables) pick an argument of an active,
    still-unsatisfied selection clause, so the search enumerates branch
    selections instead of wandering through arbitrary atom assignments.
    """

    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.occ: dict[int, list[int]] = {}  # signed literal -> clause indices
        self.atom_of: dict[int, Atom] = {}
        self.var_of_input: dict[Formula, int] = {}
        self.decisions: list[int] = []  # important vars, decided first
        self.select_clauses: list[int] = []
        self.select_vars: dict[int, frozenset[VariableRef]] = {}
        self._gate: dict[Formula, int] = {}
        self._const_true: int | None = None

    def new_var(self) -> int:
        self.nvars += 1
        self.occ[self.nvars] = []
        self.occ[-self.nvars] = []
        return self.nvars

    def add_clause(self, lits: list[int]) -> int | None:
        out: list[int] = []
        for lit in lits:
            if -lit in out:
                return None
            if lit not in out:
                out.append(lit)
        idx = len(self.clauses)
        self.clauses.append(out)
        for lit in out:
            self.occ[lit].append(idx)
        return idx

    def mark_decision(self, var: int) -> None:
        if var not in self.decisions:
            self.decisions.append(var)

    def input_var(self, f: Formula) -> int:
        v = self.var_of_input.get(f)
        if v is None:
            v = self.new_var()
            self.var_of_input[f] = v
            if isinstance(f, Atom):
                self.atom_of[v] = f
        return v

    def literal(self, f: Formula) -> int:
        if isinstance(f, TrueF):
            return self.true_lit()
        if isinstance(f, FalseF):
            return -self.true_lit()
        if isinstance(f, (Atom, PropVar)):
            return self.input_var(f)
        if isinstance(f, Not):
            return -self.input_var(f.arg)
        gate = self._gate.get(f)
        if gate is not None:
            return gate
        args = [self.literal(a) for a in f.args]
        g = self.new_var()
        if isinstance(f, And):
            for a in args:
                self.add_clause([-g, a])
            self.add_clause([g] + [-a for a in args])
        else:
            for a in args:
                self.add_clause([g, -a])
            idx = self.add_clause([-g] + args)
            if idx is not None:
                self.select_clauses.append(idx)
                self.select_vars[idx] = frozenset(variables(f))
        self._gate[f] = g
        return g

    def true_lit(self) -> int:
        if self._const_true is None:
            self._const_true = self.new_var()
            self.add_clause([self._const_true])
        return self._const_true


class _Dpll:
    """CDCL search over the clause database.

    Decisions assign the AllSAT-important variables first, then pick an
    argument of a pending selection clause (preferring the selection that
    shares the most variables with the already-asserted atoms, so branches
    contradicting the current assertions are refuted before unrelated
    selections multiply the search).  Once nothing is pending, every
    remaining clause is satisfied by leaving its unassigned variables
    false.  Theory consistency of the asserted atoms is checked eagerly
    (batched); a theory conflict contributes its contradiction core as a
    conflict clause.  Conflicts are resolved to a first-unique-implication
    -point clause and the search backjumps non-chronologically; satisfying
    assignments are excluded with blocking clauses, which makes the
    enumeration complete.
    """

    EAGER_BATCH = 4
    _EXHAUSTED = object()

    def __init__(self, cnf: _Cnf, theory_cb) -> None:
        self.cnf = cnf
        self.theory_cb = theory_cb  # list of true Atoms -> (model | None, core | None)
        self.assign: dict[int, bool] = {}
        self.level_of: dict[int, int] = {}
        self.reason: dict[int, list[int] | None] = {}
        self.trail: list[int] = []
        self.level = 0
        self.last_theory_model: dict[VariableRef, Fraction] = {}
        self._n_true: list[int] = [0] * len(cnf.clauses)
        self._n_false: list[int] = [0] * len(cnf.clauses)
        self._n_true_atoms_checked = -1
        self._decide_head = 0

    # -- assignment bookkeeping ---------------------------------------------

    def _set(self, var: int, value: bool, reason: list[int] | None) -> int | None:
        """Assign and update clause counters; returns a violated clause index."""
        self.assign[var] = value
        self.level_of[var] = self.level
        self.reason[var] = reason
        self.trail.append(var)
        conflict = None
        for idx in self.cnf.occ[var if value else -var]:
            self._n_true[idx] += 1
        for idx in self.cnf.occ[-var if value else var]:
            self._n_false[idx] += 1
            if (
                conflict is None
                and self._n_false[idx] == len(self.cnf.clauses[idx])
            ):
                conflict = idx
        return conflict

    def _pop(self) -> None:
        var = self.trail.pop()
        value = self.assign.pop(var)
        del self.level_of[var]
        del self.reason[var]
        for idx in self.cnf.occ[var if value else -var]:
            self._n_true[idx] -= 1
        for idx in self.cnf.occ[-var if value else var]:
            self._n_false[idx] -= 1
        self._decide_head = 0

    def _pop_to_level(self, level: int) -> None:
        while self.trail and self.level_of[self.trail[-1]] > level:
            self._pop()
        self.level = level
        self._n_true_atoms_checked = -1

    def add_clause(self, lits: list[int]) -> list[int]:
        """Add a clause mid-search, initializing its counters."""
        idx = self.cnf.add_clause(lits)
        if idx is None:
            raise AssertionError("tautological learned clause")
        clause = self.cnf.clauses[idx]
        n_true = n_false = 0
        for lit in clause:
            val = self.assign.get(abs(lit))
            if val is None:
                continue
            if val == (lit > 0):
                n_true += 1
            else:
                n_false += 1
        self._n_true.append(n_true)
        self._n_false.append(n_false)
        return clause

    def _violated(self, clause: list[int]) -> bool:
        assign = self.assign
        for lit in clause:
            if assign.get(lit if lit > 0 else -lit) != (lit <= 0):
                return False
        return True

    # -- propagation ----------------------------------------------------------

    def _unit_literal(self, idx: int) -> int | None:
        for lit in self.cnf.clauses[idx]:
            if abs(lit) not in self.assign:
                return lit
        return None

    def _propagate(self, pending: list[int]) -> list[int] | None:
        """Unit propagation; returns the violated clause on conflict."""
        queue = list(pending)
        while queue:
            var = queue.pop()
            value = self.assign[var]
            for idx in self.cnf.occ[-var if value else var]:
                clause = self.cnf.clauses[idx]
                if self._n_true[idx] > 0:
                    continue
                if self._n_false[idx] == len(clause):
                    return clause
                if self._n_false[idx] == len(clause) - 1:
                    lit = self._unit_literal(idx)
                    if lit is None:
                        continue
                    conflict = self._set(abs(lit), lit > 0, clause)
                    if conflict is not None:
                        return self.cnf.clauses[conflict]
                    queue.append(abs(lit))
        return None

    def _initial_propagate(self) -> list[int] | None:
        for idx, clause in enumerate(self.cnf.clauses):
            if self._n_true[idx] > 0:
                continue
            if self._n_false[idx] == len(clause):
                return clause
            if self._n_false[idx] == len(clause) - 1:
                lit = self._unit_literal(idx)
                if lit is None:
                    continue
                conflict = self._set(abs(lit), lit > 0, clause)
                if conflict is not None:
                    return self.cnf.clauses[conflict]
                conflict = self._propagate([abs(lit)])
                if conflict is not None:
                    return conflict
        return None

    # -- conflict analysis ----------------------------------------------------

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP clause and backjump level for a violated clause whose
        deepest literal is at the current decision level."""
        seen: set[int] = set()
        tail: list[int] = []
        counter = 0
        cur: list[int] | None = conflict
        skip_var: int | None = None
        idx = len(self.trail) - 1
        while True:
            for lit in cur:
                v = abs(lit)
                if v == skip_var or v in seen:
                    continue
                seen.add(v)
                lv = self.level_of[v]
                if lv == self.level:
                    counter += 1
                elif lv > 0:
                    tail.append(lit)
            while self.trail[idx] not in seen or self.level_of[self.trail[idx]] != self.level:
                idx -= 1
            uip = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            cur = self.reason[uip]
            skip_var = uip
        uip_lit = -uip if self.assign[uip] else uip
        learned = [uip_lit] + tail
        back = max((self.level_of[abs(l)] for l in tail), default=0)
        return learned, back

    def _handle_conflict(self, clause: list[int]):
        """Learn from the conflict and backjump; _EXHAUSTED at level zero."""
        while True:
            top = max(self.level_of[abs(l)] for l in clause) if clause else 0
            if top == 0:
                return self._EXHAUSTED
            self._pop_to_level(top)
            learned, back = self._analyze(clause)
            self.add_clause(learned)
            self._pop_to_level(back)
            uip_lit = learned[0]
            conflict_idx = self._set(abs(uip_lit), uip_lit > 0, learned)
            if conflict_idx is None:
                conflict = self._propagate([abs(uip_lit)]) or self._theory_conflict()
                if conflict is None:
                    return None
                clause = conflict
            else:
                clause = self.cnf.clauses[conflict_idx]

    def _skip_blocked(self, lits: list[int]):
        """Install a blocking clause for the model just emitted and unwind
        to the deepest level where another assignment is still possible."""
        idx = self.cnf.add_clause(lits)
        if idx is None:
            raise AssertionError("tautological blocking clause")
        clause = self.cnf.clauses[idx]
        self._n_true.append(0)
        self._n_false.append(len(clause))
        levels = sorted({self.level_of[abs(l)] for l in clause}, reverse=True)
        if levels[0] == 0:
            return self._EXHAUSTED
        back = levels[1] if len(levels) > 1 else 0
        self._pop_to_level(back)
        conflict = None
        if self._n_true[idx] == 0 and self._n_false[idx] == len(clause) - 1:
            lit = self._unit_literal(idx)
            conflict_idx = self._set(abs(lit), lit > 0, clause)
            if conflict_idx is not None:
                conflict = self.cnf.clauses[conflict_idx]
            else:
                conflict = self._propagate([abs(lit)]) or self._theory_conflict()
        return conflict

    # -- theory integration ----------------------------------------------------

    def _theory_conflict(self, force: bool = False) -> list[int] | None:
        """Check the currently-true atoms; learn the core on conflict.

        Between forced checks the full consistency check runs only once per
        EAGER_BATCH newly asserted atoms.
        """
        true_atoms = [
            (v, atom) for v, atom in self.cnf.atom_of.items() if self.assign.get(v)
        ]
        grown = len(true_atoms) - self._n_true_atoms_checked
        if grown == 0 or (not force and 0 < grown < self.EAGER_BATCH):
            return None
        self._n_true_atoms_checked = len(true_atoms)
        model, core = self.theory_cb([a for _, a in true_atoms],
                                     [v for v, _ in true_atoms])
        if core is not None:
            return self.add_clause([-v for v in sorted(core)])
        self.last_theory_model = model
        return None

    # -- decisions --------------------------------------------------------------

    def _next_decision(self) -> tuple[int, bool] | None:
        """Next important variable, else an argument of a pending selection."""
        decisions = self.cnf.decisions
        while self._decide_head < len(decisions):
            v = decisions[self._decide_head]
            if v not in self.assign:
                return v, True
            self._decide_head += 1
        asserted_vars: set[VariableRef] = set()
        for v, atom in self.cnf.atom_of.items():
            if self.assign.get(v):
                asserted_vars.update(atom.term.variables())
        best = None
        best_score = -1
        for idx in self.cnf.select_clauses:
            if self._n_true[idx] > 0:
                continue
            clause = self.cnf.clauses[idx]
            if self._n_false[idx] >= len(clause) - 1:
                continue  # unit or conflicting: propagation handles it
            guard = clause[0]  # the not-gate literal of the disjunction
            if self.assign.get(abs(guard)) != (guard <= 0):
                continue  # disjunction not active
            score = len(asserted_vars & self.cnf.select_vars[idx])
            if score > best_score:
                best, best_score = idx, score
        if best is None:
            return None
        for lit in self.cnf.clauses[best][1:]:
            if abs(lit) not in self.assign:
                return abs(lit), lit > 0
        return None

    def run(self, on_model) -> None:
        """Enumerate models.

        on_model returns a blocking clause (over the important variables)
        to continue the enumeration, or None to stop the search.
        """
        conflict = self._initial_propagate()
        if conflict is None:
            conflict = self._theory_conflict()
        while True:
            if conflict is not None:
                outcome = self._handle_conflict(conflict)
                if outcome is self._EXHAUSTED:
                    return
                conflict = None
                continue
            decision = self._next_decision()
            if decision is not None:
                var, value = decision
                self.level += 1
                conflict_idx = self._set(var, value, None)
                if conflict_idx is not None:
                    conflict = self.cnf.clauses[conflict_idx]
                    continue
                conflict = self._propagate([var]) or self._theory_conflict(force=True)
                continue
            conflict = self._theory_conflict(force=True)
            if conflict is not None:
                continue
            blocking_lits = on_model()
            if blocking_lits is None:
                return
            outcome = self._skip_blocked(blocking_lits)
            if outcome is self._EXHAUSTED:
                return
            conflict = outcome


class InternalSolver:
    """Self-contained DPLL(T) solver for the formula language of this package."""

    def __init__(self) -> None:
        self.queries = 0
        self.theory_checks = 0
        self._memo: dict[Formula, SatResult] = {}

    # -- public interface --------------------------------------------------

    def check_sat(self, phi: Formula) -> SatResult:
        self.queries += 1
        cached = self._memo.get(phi)
        if cached is not None:
            return cached
        res = self._solve(phi)
        self._memo[phi] = res
        return res

    def entails(self, a: Formula, b: Formula) -> bool:
        return not self.check_sat(f_and(a, f_not(b))).is_sat

    def all_sat(self, phi: Formula, important: list[str]) -> list[dict[str, bool]]:
        """All total assignments over `important` extendable to a model of phi."""
        self.queries += 1
        prep = normalize(phi)
        if prep == FALSE:
            return []
        cnf = _Cnf()
        imp_vars = []
        for name in important:
            v = cnf.input_var(PropVar(name))
            cnf.mark_decision(v)
            imp_vars.append(v)
        if prep != TRUE:
            cnf.add_clause([cnf.literal(prep)])
        results: list[dict[str, bool]] = []
        dpll = _Dpll(cnf, self._theory_cb)

        def on_model() -> list[int] | None:
            assignment = {
                name: dpll.assign.get(v, False) for name, v in zip(important, imp_vars)
            }
            results.append(assignment)
            if not imp_vars:
                return None
            return [
                -v if assignment[name] else v for name, v in zip(important, imp_vars)
            ]

        dpll.run(on_model)
        return results

    def theory_check(self, atoms) -> SatResult:
        self.theory_checks += 1
        return theory_check(atoms)

    def close(self) -> None:
        pass

    # -- internals ----------------------------------------------------------

    def _theory_cb(self, atoms: list[Atom], var_ids: list[int]):
        self.theory_checks += 1
        try:
            env = _solve_lin(
                [_lin_of_atom(a, var_ids[i]) for i, a in enumerate(atoms)]
            )
        except _TheoryConflict as exc:
            return None, exc.core
        return env, None

    def _solve(self, phi: Formula) -> SatResult:
        prep = normalize(phi)
        if prep == TRUE:
            return sat(model={v: Fraction(0) for v in variables(phi)})
        if prep == FALSE:
            return UNSAT
        lits = _literal_conjunction(prep)
        if lits is not None:
            atoms, pos, neg = lits
            if pos & neg:
                return UNSAT
            try:
                env = _solve_lin([_lin_of_atom(a, i) for i, a in enumerate(atoms)])
            except _TheoryConflict:
                return UNSAT
            self.theory_checks += 1
            return self._fill(phi, env, {n: True for n in pos} | {n: False for n in neg})
        cnf = _Cnf()
        cnf.add_clause([cnf.literal(prep)])
        dpll = _Dpll(cnf, self._theory_cb)
        found: list[SatResult] = []

        def on_model() -> None:
            bools = {
                f.name: dpll.assign.get(v, False)
                for f, v in cnf.var_of_input.items()
                if isinstance(f, PropVar)
            }
            found.append(self._fill(phi, dpll.last_theory_model, bools))
            return None

        dpll.run(on_model)
        return found[0] if found else UNSAT

    @staticmethod
    def _fill(phi: Formula, env: dict[VariableRef, Fraction], bools) -> SatResult:
        model = dict(env)
        for v in variables(phi):
            model.setdefault(v, Fraction(0))
        return sat(model=model, bools=bools)


def _literal_conjunction(prep: Formula):
    """If prep is a conjunction of atoms / propvar literals, split it."""
    parts = prep.args if isinstance(prep, And) else (prep,)
    atoms: list[Atom] = []
    pos: set[str] = set()
    neg: set[str] = set()
    for p in parts:
        if isinstance(p, Atom):
            atoms.append(p)
        elif isinstance(p, PropVar):
            pos.add(p.name)
        elif isinstance(p, Not) and isinstance(p.arg, PropVar):
            neg.add(p.arg.name)
        else:
            return None
    return atoms, pos, neg


# ---------------------------------------------------------------------------
# external backend: SMT-LIB2 over a solver process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverBackend:
    """Internal by default; `command` selects an SMT-LIB2 subprocess."""

    command: str | None = None

    @property
    def is_external(self) -> bool:
        return self.command is not None


def make_solver(backend: SolverBackend | str | None = None):
    if backend is None or backend == "internal":
        return InternalSolver()
    if isinstance(backend, SolverBackend):
        if not backend.is_external:
            return InternalSolver()
        return Smtlib2Solver(backend.command)
    return Smtlib2Solver(backend)


def _smt_symbol(v: VariableRef) -> str:
    return f"|{v}|"


def _smt_int(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _smt_term(t) -> str:
    parts = []
    for v, c in t.coeffs:
        sym = _smt_symbol(v)
        parts.append(sym if c == 1 else f"(* {_smt_int(c)} {sym})")
    if t.const != 0 or not parts:
        parts.append(_smt_int(t.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _smt_formula(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, PropVar):
        return f"|{f.name}|"
    if isinstance(f, Atom):
        op = "=" if f.rel == EQ else "<="
        return f"({op} {_smt_term(f.term)} 0)"
    if isinstance(f, Not):
        return f"(not {_smt_formula(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(_smt_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_smt_formula(a) for a in f.args) + ")"
    raise TypeError(f"not a formula: {f!r}")


class Smtlib2Solver:
    """Session with an external SMT-LIB2 solver process (logic QF_LRA).

    The process is spawned lazily and kept for the lifetime of the object;
    each query runs inside a push/pop frame.  Formulas are normalized with
    the same literal rewriting as the internal engine before emission.
    """

    def __init__(self, command: str | list[str]) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.proc: subprocess.Popen | None = None
        self.queries = 0
        self.theory_checks = 0
        self._declared: set[str] = set()

    def _start(self) -> None:
        if self.proc is not None:
            return
        self.proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
        self._send("(set-option :print-success false)")
        self._send("(set-logic QF_LRA)")

    def _send(self, line: str) -> None:
        assert self.proc and self.proc.stdin
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def _read_sexpr(self) -> str:
        assert self.proc and self.proc.stdout
        buf = []
        depth = 0
        started = False
        while True:
            ch = self.proc.stdout.read(1)
            if ch == "":
                raise RuntimeError("solver process closed its output")
            if not started and ch.isspace():
                continue
            started = True
            buf.append(ch)
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    return "".join(buf)
            elif depth == 0 and ch == "\n":
                return "".join(buf).strip()
            elif depth == 0 and not ch.isspace():
                # bare word reply such as `sat`
                rest = self.proc.stdout.readline()
                return ("".join(buf) + rest).strip()

    def _declare(self, phi: Formula) -> None:
        for v in sorted(variables(phi), key=var_sort_key):
            sym = _smt_symbol(v)
            if sym not in self._declared:
                self._declared.add(sym)
                self._send(f"(declare-fun {sym} () Real)")
        from .formula import propvars

        for name in sorted(propvars(phi)):
            sym = f"|{name}|"
            if sym not in self._declared:
                self._declared.add(sym)
                self._send(f"(declare-fun {sym} () Bool)")

    def check_sat(self, phi: Formula) -> SatResult:
        self.queries += 1
        self._start()
        prep = normalize(phi)
        self._declare(prep)
        self._send("(push 1)")
        self._send(f"(assert {_smt_formula(prep)})")
        self._send("(check-sat)")
        verdict = self._read_sexpr()
        if verdict == "unsat":
            self._send("(pop 1)")
            return UNSAT
        if verdict != "sat":
            self._send("(pop 1)")
            raise RuntimeError(f"unexpected solver reply: {verdict!r}")
        arith = sorted(variables(prep), key=var_sort_key)
        bools = sorted({p for p in _collect_propvars(prep)})
        model: dict[VariableRef, Fraction] = {}
        bvals: dict[str, bool] = {}
        if arith or bools:
            syms = [_smt_symbol(v) for v in arith] + [f"|{b}|" for b in bools]
            self._send(f"(get-value ({' '.join(syms)}))")
            reply = self._read_sexpr()
            values = _parse_value_reply(reply)
            for v, sym in zip(arith, syms[: len(arith)]):
                model[v] = _parse_rational(values[_unquote(sym)])
            for b in bools:
                bvals[b] = values[b] in ("true",)
        self._send("(pop 1)")
        for v in variables(phi):
            model.setdefault(v, Fraction(0))
        return sat(model=model, bools=bvals)

    def entails(self, a: Formula, b: Formula) -> bool:
        return not self.check_sat(f_and(a, f_not(b))).is_sat

    def all_sat(self, phi: Formula, important: list[str]) -> list[dict[str, bool]]:
        self.queries += 1
        self._start()
        prep = normalize(phi)
        if prep == FALSE:
            return []
        for name in important:
            sym = f"|{name}|"
            if sym not in self._declared:
                self._declared.add(sym)
                self._send(f"(declare-fun {sym} () Bool)")
        self._declare(prep)
        self._send("(push 1)")
        if prep != TRUE:
            self._send(f"(assert {_smt_formula(prep)})")
        results: list[dict[str, bool]] = []
        syms = [f"|{n}|" for n in important]
        while True:
            self._send("(check-sat)")
            verdict = self._read_sexpr()
            if verdict == "unsat":
                break
            if verdict != "sat":
                raise RuntimeError(f"unexpected solver reply: {verdict!r}")
            if not important:
                results.append({})
                break
            self._send(f"(get-value ({' '.join(syms)}))")
            values = _parse_value_reply(self._read_sexpr())
            assignment = {n: values[n] == "true" for n in important}
            results.append(assignment)
            lits = [
                f"(not {s})" if assignment[n] else s for n, s in zip(important, syms)
            ]
            self._send(f"(assert (or {' '.join(lits)}))")
        self._send("(pop 1)")
        return results

    def theory_check(self, atoms) -> SatResult:
        return self.check_sat(f_and(*atoms))

    def close(self) -> None:
        if self.proc is not None:
            try:
                self._send("(exit)")
            except Exception:
                pass
            self.proc.terminate()
            self.proc.wait(timeout=5)
            self.proc = None


def _collect_propvars(f: Formula) -> set[str]:
    from .formula import propvars

    return propvars(f)


def _unquote(sym: str) -> str:
    return sym[1:-1] if sym.startswith("|") and sym.endswith("|") else sym


def _tokenize_sexpr(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "()":
            out.append(ch)
            i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i : j + 1])
            i = j + 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _parse_value_reply(reply: str) -> dict[str, str]:
    """Parse ((sym val) (sym val) ...) into {name: flat value string}."""
    tokens = _tokenize_sexpr(reply)

    def read(pos):
        if tokens[pos] == "(":
            items = []
            pos += 1
            while tokens[pos] != ")":
                item, pos = read(pos)
                items.append(item)
            return items, pos + 1
        return tokens[pos], pos + 1

    tree, _ = read(0)
    out: dict[str, str] = {}
    for pair in tree:
        name = _unquote(pair[0])
        out[name] = _flatten(pair[1])
    return out


def _flatten(node) -> str:
    if isinstance(node, str):
        return node
    return "(" + " ".join(_flatten(n) for n in node) + ")"


def _parse_rational(text: str) -> Fraction:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1].strip()
        if inner.startswith("- "):
            return -_parse_rational(inner[2:])
        if inner.startswith("/ "):
            a, b = inner[2:].split(None, 1)
            return _parse_rational(a) / _parse_rational(b)
        raise ValueError(f"cannot parse rational {text!r}")
    return Fraction(text)
