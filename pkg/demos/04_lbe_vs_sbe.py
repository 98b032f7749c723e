"""The headline comparison: four encoding/abstraction combinations.

On the lock-discipline family, one edge per operation with Cartesian
abstraction needs many refinements and an exponentially growing tree,
while summarized blocks with Boolean abstraction prove safety without a
single refinement: every path into the error location is contradictory
inside its own block.  Summarized blocks with Cartesian abstraction lose
the branch correlations and give up.  Run: python demos/04_lbe_vs_sbe.py
"""

import time

from lbemc.cfa import rule_count, summarize
from lbemc.cli import gen_test_locks
from lbemc.engine import verify
from lbemc.frontend import parse_program

N = 4
source = gen_test_locks(N)
program = parse_program(source)
summary, trace = summarize(program)

print(f"test_locks_{N}: {len(program.cfa.locations)} locations, "
      f"{len(program.cfa.edges)} edges; summarized to "
      f"{len(summary.cfa.locations)} locations, {len(summary.cfa.edges)} edges\n")

rows = []
for encoding, mode in (("sbe", "cartesian"), ("sbe", "boolean"),
                       ("lbe", "cartesian"), ("lbe", "boolean")):
    target = summary if encoding == "lbe" else program
    rules = rule_count(trace) if encoding == "lbe" else 0
    start = time.perf_counter()
    result = verify(target, mode=mode, max_refinements=50,
                    rule_applications=rules)
    elapsed = time.perf_counter() - start
    rows.append((encoding, mode, result.verdict, result.stats.art_size,
                 result.stats.refinement_steps, result.stats.predicates_total,
                 elapsed))

print(f"{'encoding':9} {'abstraction':12} {'verdict':8} "
      f"{'ART':>6} {'refine':>6} {'preds':>5} {'time':>7}")
for encoding, mode, verdict, art, refine, preds, elapsed in rows:
    print(f"{encoding:9} {mode:12} {verdict:8} {art:6} {refine:6} "
          f"{preds:5} {elapsed:6.2f}s")

print("\nthe large-block rows match the motivating observation: a constant-")
print("size tree with zero refinements, against exponential growth for the")
print("single-block encoding and a give-up for the conjunctive abstraction.")
