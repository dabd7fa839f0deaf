"""Diagnose a feed-pressure surge and plan the manipulation target.

The knowledge base is the plain-text rule file shipped with the package.
A rising FI101 reading is traced back to the fresh-ethylene header; the
planner then searches for manipulable elements whose influence chain can
push the vaporizer pressure back down and explains the chosen chain with
its document sources.
"""

from procrl.influence import diagnose, explain, load_default_rules, plan

graph = load_default_rules()
print(f"knowledge base: {len(graph.rules)} rules over {len(graph.nodes)} variables")
print(f"manipulable elements: {list(graph.manipulables)}\n")

deviations = [("fi101_flow", "+"), ("vaporizer_pressure", "+")]
print(f"observed deviations: {deviations}")
print("root-cause candidates (ranked):")
for cause in diagnose(graph, deviations):
    print(f"  {cause.variable} {cause.direction}  "
          f"(explains {len(cause.explained)} deviation(s), "
          f"chain length {cause.path_length})")

p = plan(graph, ("vaporizer_pressure", "-"))
print(f"\nplan targets, nearest chain first: {list(p.targets)}")
print()
print(explain(p, graph).text)
