"""
Exact optimum of a tiny instance
================================

Six orders, batches of two: small enough to list every partition.
"""

from batchopt.bnb import count_partitions, enumerate_exact, solve_approx
from batchopt.evaluation import objective
from batchopt.generator import GeneratorConfig, generate_instance

inst = generate_instance(GeneratorConfig(n_orders=6, capacity=2, seed=2,
                                         aisle_lengths=(8, 6, 5, 3), catalog_size=12))
print(count_partitions(inst.n_orders, inst.capacity), "distinct partitions")

for strategy in ("return", "sshape"):
    rep = enumerate_exact(inst, strategy)
    print(strategy, "optimum", rep.best_objective, rep.best_partition.batches())

# the surrogate optimum need not be optimal for the real objective
approx = solve_approx(inst, "AP2").best_partition
print("AP2 partition under S-shape:", objective(inst, approx, "sshape").combined)
