import sys

import pytest

from lbemc.formula import Term, VariableRef, parse_sexpr
from lbemc.smt import InternalSolver


def tvar(name: str, index=None) -> Term:
    return Term.variable(VariableRef(name, index))


def const(c: int) -> Term:
    return Term.constant(c)


@pytest.fixture
def solver():
    return InternalSolver()


@pytest.fixture
def F():
    """Formula text shortcut: F('(and (<= x 0) (or a b))')."""
    return parse_sexpr


MOCK_SOLVER_CMD = f"{sys.executable} tests/mock_smt.py"
