"""
Batching a small warehouse with constructive heuristics
========================================================

Generate a 100-order instance, run every heuristic and compare the
packing + travel objective under both routing strategies.
"""

from batchopt.evaluation import objective
from batchopt.generator import GeneratorConfig, generate_instance
from batchopt.heuristics import HEURISTICS, ils

inst = generate_instance(GeneratorConfig(n_orders=100, capacity=10, seed=1))
print(inst.name, "-", inst.n_orders, "orders,", inst.n_batches, "batches,",
      inst.layout.n_aisles, "aisles")

# ILS is time-bounded by default; cap iterations instead so the run repeats
runs = {name: h(inst, "sshape") for name, h in HEURISTICS.items() if name != "ils"}
runs["ils"] = ils(inst, "sshape", seed=0, max_iterations=200)

print(f"{'algo':6s} {'return':>9s} {'sshape':>9s}")
for name, part in runs.items():
    r = objective(inst, part, "return").combined
    s = objective(inst, part, "sshape").combined
    print(f"{name:6s} {r:9.1f} {s:9.1f}")

# the packing part counts unique items per batch; it rewards grouping
# orders that share items, travel rewards grouping by aisle
best = min(runs, key=lambda n: objective(inst, runs[n], "sshape").combined)
v = objective(inst, runs[best], "sshape")
print("best:", best, "packing", v.packing_component, "travel", v.travel_component)
