"""Terms, atoms, and quantifier-free Boolean formulas over linear integer arithmetic.

A variable reference is either current-state (``x``) or indexed (``x@3``).
Indexed variables stand for history values introduced by postcondition
computations and path encodings; they are implicitly existentially
quantified and never bound by an explicit quantifier.

Atoms are kept in a canonical form ``t = 0`` or ``t <= 0`` where ``t`` is a
linear term with gcd-reduced integer coefficients.  Strict comparisons are
tightened at construction (``t < 0`` becomes ``t + 1 <= 0``), which is exact
because all program variables range over integers; ``!=``, ``>=``, ``>`` are
rewritten.  Everything in this module is immutable; formulas hash and
compare structurally, with the hash cached per node.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

EQ = "="
LE = "<="


@dataclass(frozen=True)
class VariableRef:
    name: str
    index: int | None = None

    def __str__(self) -> str:
        if self.index is None:
            return self.name
        return f"{self.name}@{self.index}"

    @property
    def current(self) -> bool:
        return self.index is None


def var_sort_key(v: VariableRef) -> tuple[str, int]:
    return (v.name, -1 if v.index is None else v.index)


# ---------------------------------------------------------------------------
# linear terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """const + sum of coeff * var, integer coefficients, one entry per var."""

    const: int = 0
    coeffs: tuple[tuple[VariableRef, int], ...] = ()

    @staticmethod
    def of(const: int = 0, coeffs: Mapping[VariableRef, int] | None = None) -> "Term":
        items = []
        for v in sorted(coeffs or {}, key=var_sort_key):
            c = coeffs[v]
            if c != 0:
                items.append((v, c))
        return Term(const, tuple(items))

    @staticmethod
    def constant(c: int) -> "Term":
        return Term(c, ())

    @staticmethod
    def variable(v: VariableRef | str) -> "Term":
        if isinstance(v, str):
            v = VariableRef(v)
        return Term(0, ((v, 1),))

    def _as_dict(self) -> dict[VariableRef, int]:
        return dict(self.coeffs)

    def __add__(self, other: "Term | int") -> "Term":
        if isinstance(other, int):
            return Term(self.const + other, self.coeffs)
        d = self._as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return Term.of(self.const + other.const, d)

    def __sub__(self, other: "Term | int") -> "Term":
        if isinstance(other, int):
            return Term(self.const - other, self.coeffs)
        return self + (-other)

    def __neg__(self) -> "Term":
        return Term(-self.const, tuple((v, -c) for v, c in self.coeffs))

    def scale(self, k: int) -> "Term":
        if k == 0:
            return Term(0, ())
        return Term(self.const * k, tuple((v, c * k) for v, c in self.coeffs))

    def variables(self) -> set[VariableRef]:
        return {v for v, _ in self.coeffs}

    def rename(self, mapping: Mapping[VariableRef, VariableRef]) -> "Term":
        d: dict[VariableRef, int] = {}
        for v, c in self.coeffs:
            w = mapping.get(v, v)
            d[w] = d.get(w, 0) + c
        return Term.of(self.const, d)

    def at_indices(self, ssa: Mapping[str, int]) -> "Term":
        """Replace every current-state variable x by x@ssa[x] (default 0)."""
        d: dict[VariableRef, int] = {}
        for v, c in self.coeffs:
            w = VariableRef(v.name, ssa.get(v.name, 0)) if v.current else v
            d[w] = d.get(w, 0) + c
        return Term.of(self.const, d)

    def evaluate(self, env: Mapping[VariableRef, int | Fraction]):
        total = Fraction(self.const)
        for v, c in self.coeffs:
            total += c * Fraction(env.get(v, 0))
        return total

    def __str__(self) -> str:
        return term_infix(self)


# ---------------------------------------------------------------------------
# formulas
# ---------------------------------------------------------------------------

class Formula:
    """Base class: True | False | Atom | PropVar | Not | And | Or."""

    __slots__ = ("_h",)

    def __hash__(self) -> int:
        return self._h

    def __str__(self) -> str:
        return to_sexpr(self)

    def __repr__(self) -> str:
        return f"<{to_sexpr(self)}>"


class TrueF(Formula):
    __slots__ = ()

    def __init__(self) -> None:
        object.__setattr__(self, "_h", hash(("true",)))

    def __eq__(self, other) -> bool:
        return isinstance(other, TrueF)

    __hash__ = Formula.__hash__


class FalseF(Formula):
    __slots__ = ()

    def __init__(self) -> None:
        object.__setattr__(self, "_h", hash(("false",)))

    def __eq__(self, other) -> bool:
        return isinstance(other, FalseF)

    __hash__ = Formula.__hash__


TRUE = TrueF()
FALSE = FalseF()


class Atom(Formula):
    """Canonical linear atom: term = 0 or term <= 0."""

    __slots__ = ("rel", "term")

    def __init__(self, rel: str, term: Term) -> None:
        assert rel in (EQ, LE)
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "term", term)
        object.__setattr__(self, "_h", hash(("atom", rel, term)))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Atom)
            and self._h == other._h
            and self.rel == other.rel
            and self.term == other.term
        )

    __hash__ = Formula.__hash__


class PropVar(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_h", hash(("pv", name)))

    def __eq__(self, other) -> bool:
        return isinstance(other, PropVar) and self.name == other.name

    __hash__ = Formula.__hash__


class Not(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula) -> None:
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_h", hash(("not", arg)))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Not) and self._h == other._h and self.arg == other.arg

    __hash__ = Formula.__hash__


class And(Formula):
    __slots__ = ("args",)

    def __init__(self, args: tuple[Formula, ...]) -> None:
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_h", hash(("and", args)))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, And) and self._h == other._h and self.args == other.args

    __hash__ = Formula.__hash__


class Or(Formula):
    __slots__ = ("args",)

    def __init__(self, args: tuple[Formula, ...]) -> None:
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_h", hash(("or", args)))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Or) and self._h == other._h and self.args == other.args

    __hash__ = Formula.__hash__


def f_not(f: Formula) -> Formula:
    if f is TRUE or isinstance(f, TrueF):
        return FALSE
    if f is FALSE or isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _assoc(cls, absorb: Formula, unit: Formula, args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    seen: set[Formula] = set()
    for a in args:
        if isinstance(a, cls):
            inner = a.args
        else:
            inner = (a,)
        for x in inner:
            if x == absorb:
                return absorb
            if x == unit or x in seen:
                continue
            seen.add(x)
            flat.append(x)
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return cls(tuple(flat))


def f_and(*args: Formula) -> Formula:
    return _assoc(And, FALSE, TRUE, args)


def f_or(*args: Formula) -> Formula:
    return _assoc(Or, TRUE, FALSE, args)


def f_iff(a: Formula, b: Formula) -> Formula:
    return f_and(f_or(f_not(a), b), f_or(a, f_not(b)))


# ---------------------------------------------------------------------------
# atom construction / canonicalization
# ---------------------------------------------------------------------------

def _ceil_div(a: int, b: int) -> int:
    # b > 0
    return -((-a) // b)


def canon_le(term: Term) -> Formula:
    """Canonical form of term <= 0."""
    if not term.coeffs:
        return TRUE if term.const <= 0 else FALSE
    g = 0
    for _, c in term.coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        coeffs = tuple((v, c // g) for v, c in term.coeffs)
        # integer tightening of the constant: t <= 0 iff sum + ceil(const/g) <= 0
        term = Term(_ceil_div(term.const, g), coeffs)
    return Atom(LE, term)


def canon_eq(term: Term) -> Formula:
    """Canonical form of term = 0."""
    if not term.coeffs:
        return TRUE if term.const == 0 else FALSE
    g = abs(term.const)
    for _, c in term.coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        term = Term(term.const // g, tuple((v, c // g) for v, c in term.coeffs))
    if term.coeffs[0][1] < 0:
        term = -term
    return Atom(EQ, term)


def compare(rel: str, lhs: Term, rhs: Term) -> Formula:
    """Build the canonical formula for lhs <rel> rhs; rel in ==,!=,<,<=,>,>=."""
    t = lhs - rhs
    if rel == ">":
        rel, t = "<", -t
    if rel == ">=":
        rel, t = "<=", -t
    if rel == "!=":
        return f_not(canon_eq(t))
    if rel == "<":
        return canon_le(t + 1)
    if rel == "<=":
        return canon_le(t)
    if rel == "==":
        return canon_eq(t)
    raise ValueError(f"unknown relation {rel!r}")


def negate_atom(atom: Atom) -> Formula:
    """Integer-exact complement of a canonical atom (no Not wrapper)."""
    if atom.rel == LE:
        # not(t <= 0)  ==  t >= 1  ==  -t + 1 <= 0
        return canon_le(-atom.term + 1)
    # not(t = 0)  ==  t <= -1 or t >= 1
    return f_or(canon_le(atom.term + 1), canon_le(-atom.term + 1))


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------

def nnf(f: Formula, negated: bool = False) -> Formula:
    """Negation normal form: Not survives only directly on atoms / propvars.

    Shared subformulas are rewritten once, so DAG-shaped inputs stay DAGs.
    """
    memo: dict[tuple[int, bool], Formula] = {}

    def walk(g: Formula, neg: bool) -> Formula:
        key = (id(g), neg)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if isinstance(g, TrueF):
            out = FALSE if neg else TRUE
        elif isinstance(g, FalseF):
            out = TRUE if neg else FALSE
        elif isinstance(g, (Atom, PropVar)):
            out = Not(g) if neg else g
        elif isinstance(g, Not):
            out = walk(g.arg, not neg)
        elif isinstance(g, And):
            parts = tuple(walk(a, neg) for a in g.args)
            out = f_or(*parts) if neg else f_and(*parts)
        elif isinstance(g, Or):
            parts = tuple(walk(a, neg) for a in g.args)
            out = f_and(*parts) if neg else f_or(*parts)
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[key] = out
        return out

    return walk(f, negated)


def _dag_nodes(f: Formula):
    """Iterate each distinct subformula object once (formulas may share)."""
    seen: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        yield g
        if isinstance(g, (And, Or)):
            stack.extend(g.args)
        elif isinstance(g, Not):
            stack.append(g.arg)


def variables(f: Formula) -> set[VariableRef]:
    out: set[VariableRef] = set()
    for g in _dag_nodes(f):
        if isinstance(g, Atom):
            out.update(g.term.variables())
    return out


def propvars(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in _dag_nodes(f):
        if isinstance(g, PropVar):
            out.add(g.name)
    return out


def rename(f: Formula, mapping: Mapping[VariableRef, VariableRef]) -> Formula:
    """Simultaneous capture-free substitution of variables.

    Raises ValueError if the effective map is not injective on f's variables.
    """
    occurring = variables(f)
    image = {v: mapping.get(v, v) for v in occurring}
    if len(set(image.values())) != len(image):
        raise ValueError("non-injective rename")

    memo: dict[int, Formula] = {}

    def walk(g: Formula) -> Formula:
        cached = memo.get(id(g))
        if cached is not None:
            return cached
        if isinstance(g, Atom):
            out = Atom(g.rel, g.term.rename(mapping))
        elif isinstance(g, Not):
            out = f_not(walk(g.arg))
        elif isinstance(g, And):
            out = f_and(*(walk(a) for a in g.args))
        elif isinstance(g, Or):
            out = f_or(*(walk(a) for a in g.args))
        else:
            out = g
        memo[id(g)] = out
        return out

    return walk(f)


def at_indices(f: Formula, ssa: Mapping[str, int]) -> Formula:
    """Map every current-state variable x to x@ssa[x] (missing names -> 0)."""
    memo: dict[int, Formula] = {}

    def walk(g: Formula) -> Formula:
        cached = memo.get(id(g))
        if cached is not None:
            return cached
        if isinstance(g, Atom):
            out = Atom(g.rel, g.term.at_indices(ssa))
        elif isinstance(g, Not):
            out = f_not(walk(g.arg))
        elif isinstance(g, And):
            out = f_and(*(walk(a) for a in g.args))
        elif isinstance(g, Or):
            out = f_or(*(walk(a) for a in g.args))
        else:
            out = g
        memo[id(g)] = out
        return out

    return walk(f)


def max_index(f: Formula, name: str) -> int:
    """Largest SSA index of `name` in f; current-state occurrences count as 0."""
    best = 0
    for v in variables(f):
        if v.name == name:
            best = max(best, v.index or 0)
    return best


def strip_indices_atom(atom: Atom) -> Formula:
    """Collapse x@i to x and re-canonicalize; may degenerate to True/False."""
    d: dict[VariableRef, int] = {}
    for v, c in atom.term.coeffs:
        w = VariableRef(v.name)
        d[w] = d.get(w, 0) + c
    t = Term.of(atom.term.const, d)
    return canon_eq(t) if atom.rel == EQ else canon_le(t)


def atoms(f: Formula) -> frozenset[Atom]:
    """Distinct atoms of f, canonicalized with SSA indices stripped."""
    out: set[Atom] = set()
    for g in _dag_nodes(f):
        if isinstance(g, Atom):
            stripped = strip_indices_atom(g)
            if isinstance(stripped, Atom):
                out.add(stripped)
    return frozenset(out)


def evaluate(
    f: Formula,
    env: Mapping[VariableRef, int | Fraction],
    bools: Mapping[str, bool] | None = None,
) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        val = f.term.evaluate(env)
        return val == 0 if f.rel == EQ else val <= 0
    if isinstance(f, PropVar):
        if bools is None or f.name not in bools:
            raise KeyError(f"no value for propositional variable {f.name}")
        return bools[f.name]
    if isinstance(f, Not):
        return not evaluate(f.arg, env, bools)
    if isinstance(f, And):
        return all(evaluate(a, env, bools) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env, bools) for a in f.args)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# text form (s-expressions) and infix pretty-printing
# ---------------------------------------------------------------------------

def _term_sexpr(t: Term) -> str:
    parts = []
    for v, c in t.coeffs:
        parts.append(str(v) if c == 1 else f"(* {c} {v})")
    if t.const != 0 or not parts:
        parts.append(str(t.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def to_sexpr(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, PropVar):
        return f.name
    if isinstance(f, Atom):
        return f"({f.rel} {_term_sexpr(f.term)} 0)"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(to_sexpr(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(to_sexpr(a) for a in f.args) + ")"
    raise TypeError(f"not a formula: {f!r}")


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_VAR = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:@(\d+))?$")
_INT = re.compile(r"-?\d+$")


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ValueError("unexpected end of s-expression")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ValueError("unbalanced '(' in s-expression")
            if tokens[pos] == ")":
                break
            item, pos = _read(tokens, pos)
            items.append(item)
        return items, pos + 1
    if tok == ")":
        raise ValueError("unbalanced ')'")
    return tok, pos + 1


def _parse_term(node) -> Term:
    if isinstance(node, str):
        if _INT.match(node):
            return Term.constant(int(node))
        m = _VAR.match(node)
        if m:
            idx = int(m.group(2)) if m.group(2) is not None else None
            return Term.variable(VariableRef(m.group(1), idx))
        raise ValueError(f"bad term token {node!r}")
    head, *rest = node
    if head == "+":
        out = Term.constant(0)
        for r in rest:
            out = out + _parse_term(r)
        return out
    if head == "-":
        if len(rest) == 1:
            return -_parse_term(rest[0])
        if len(rest) == 2:
            return _parse_term(rest[0]) - _parse_term(rest[1])
        raise ValueError("'-' takes one or two arguments")
    if head == "*":
        if len(rest) != 2 or not isinstance(rest[0], str) or not _INT.match(rest[0]):
            raise ValueError("'*' takes an integer and a variable")
        return _parse_term(rest[1]).scale(int(rest[0]))
    raise ValueError(f"bad term head {head!r}")


def _parse_formula(node) -> Formula:
    if isinstance(node, str):
        if node == "true":
            return TRUE
        if node == "false":
            return FALSE
        if _VAR.match(node):
            return PropVar(node)
        raise ValueError(f"bad formula token {node!r}")
    head, *rest = node
    if head == "not":
        (arg,) = rest
        return f_not(_parse_formula(arg))
    if head == "and":
        return f_and(*(_parse_formula(r) for r in rest))
    if head == "or":
        return f_or(*(_parse_formula(r) for r in rest))
    if head in ("=", "==", "!=", "<", "<=", ">", ">="):
        lhs, rhs = rest
        rel = "==" if head == "=" else head
        return compare(rel, _parse_term(lhs), _parse_term(rhs))
    raise ValueError(f"bad formula head {head!r}")


def parse_sexpr(text: str) -> Formula:
    tokens = _TOKEN.findall(text)
    node, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing tokens after s-expression")
    return _parse_formula(node)


def term_infix(t: Term) -> str:
    if not t.coeffs:
        return str(t.const)
    bits: list[str] = []
    for v, c in t.coeffs:
        if not bits:
            if c == 1:
                bits.append(str(v))
            elif c == -1:
                bits.append(f"-{v}")
            else:
                bits.append(f"{c}*{v}")
        else:
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            bits.append(f" {sign} {v}" if mag == 1 else f" {sign} {mag}*{v}")
    if t.const:
        sign = "+" if t.const > 0 else "-"
        bits.append(f" {sign} {abs(t.const)}")
    return "".join(bits)


def formula_infix(f: Formula) -> str:
    """Human-oriented rendering used in DOT labels and traces."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, PropVar):
        return f.name
    if isinstance(f, Atom):
        vars_part = Term(0, f.term.coeffs)
        if f.rel == LE and all(c < 0 for _, c in f.term.coeffs):
            return f"{term_infix(-vars_part)} >= {f.term.const}"
        op = "==" if f.rel == EQ else "<="
        return f"{term_infix(vars_part)} {op} {-f.term.const}"
    if isinstance(f, Not):
        return f"!({formula_infix(f.arg)})"
    if isinstance(f, And):
        return "(" + " && ".join(formula_infix(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(" + " || ".join(formula_infix(a) for a in f.args) + ")"
    raise TypeError(f"not a formula: {f!r}")
