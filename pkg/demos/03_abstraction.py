"""Cartesian versus Boolean predicate abstraction on a disjunctive region.

The region x = 2 or x = 7 entails x > 0 but neither x < 5 nor its
negation.  The Cartesian abstraction keeps only the entailed conjuncts;
the Boolean abstraction enumerates the satisfiable predicate minterms and
keeps the disjunction.  Run: python demos/03_abstraction.py
"""

from lbemc.abstraction import Abstractor, Precision
from lbemc.formula import Term, compare, f_or, formula_infix
from lbemc.smt import InternalSolver

x = Term.variable("x")
region = f_or(compare("==", x, Term.constant(2)), compare("==", x, Term.constant(7)))
precision = Precision([
    compare(">", x, Term.constant(0)),
    compare("<", x, Term.constant(5)),
])

ab = Abstractor(InternalSolver())

cartesian = ab.cartesian_abstract(region, precision)
boolean = ab.boolean_abstract(region, precision)

print(f"region:            {formula_infix(region)}")
print("precision:         " + ", ".join(formula_infix(p) for p in precision))
print(f"cartesian result:  {formula_infix(ab.concretize(cartesian))}")
print(f"boolean result:    {formula_infix(ab.concretize(boolean))}")
print()
print("the boolean result entails the cartesian one:",
      boolean.entails(cartesian))
print("and both are entailed by the region (soundness):",
      ab.solver.entails(region, ab.concretize(boolean)),
      ab.solver.entails(region, ab.concretize(cartesian)))

# with a finer precision the boolean abstraction pins the region exactly
fine = Precision([
    compare("==", x, Term.constant(2)),
    compare("==", x, Term.constant(7)),
])
exact = ab.boolean_abstract(region, fine)
print(f"\nwith equality predicates the boolean abstraction is exact:")
print(f"  {formula_infix(ab.concretize(exact))}")
