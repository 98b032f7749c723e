"""Fold the loop-free parts of a CFA into single large-block edges.

The rewriting drops the error location's outgoing edges, fuses
single-entry locations into their predecessor, and merges parallel edges
into choices, until only the entry, the error location, loop heads, and
exits remain.  Run: python demos/02_summarization.py
"""

from lbemc.cfa import rule_count, summarize, to_dot, trace_to_json_lines
from lbemc.frontend import parse_program
from lbemc.semantics import op_label

SOURCE = """
int i; int x; int z;
while (i > 0) {
  if (x == 1) {
    z = 0;
  } else {
    z = 1;
  }
  i = i - 1;
}
"""

program = parse_program(SOURCE)
print(f"before: {len(program.cfa.locations)} locations, "
      f"{len(program.cfa.edges)} edges")

summary, trace = summarize(program)
print(f"after:  {len(summary.cfa.locations)} locations, "
      f"{len(summary.cfa.edges)} edges "
      f"({rule_count(trace)} rule applications)\n")

print("rewriting trace (JSON lines):")
print(trace_to_json_lines(trace))

print("\nsummarized edges — the whole loop body is one operation now:")
for edge in summary.cfa.edges:
    print(f"  {edge.source} -> {edge.target}   {op_label(edge.op)}")

print("\nsummarized CFA as DOT:\n")
print(to_dot(summary))
