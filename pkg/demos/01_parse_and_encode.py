"""Parse a small program and look at its control-flow automaton.

Every assignment and assume becomes one edge; a branch contributes the
guard and its negation; `assert` is sugar for a guarded jump to the error
location.  Run: python demos/01_parse_and_encode.py
"""

from lbemc.cfa import to_dot
from lbemc.frontend import parse_program
from lbemc.semantics import op_label

SOURCE = """
int x; int y;
x = 0;
y = nondet();
if (y > 0) {
  x = x + y;
} else {
  x = x - y;
}
assert(x >= 0);
"""

program = parse_program(SOURCE)

print("source:")
print(SOURCE)
print(f"locations: {sorted(program.cfa.locations)}")
print(f"entry = {program.entry}, error = {program.error}")
print("\nedges (one operation each):")
for edge in program.cfa.edges:
    print(f"  {edge.source:2} -> {edge.target:2}   {op_label(edge.op)}")

print("\nGraphViz form (pipe into `dot -Tpng` to render):\n")
print(to_dot(program))
