"""
How well do the aisle-count surrogates track the true objective?
================================================================

Sample random balanced partitions, score each with the exact objective
and with the AP1/AP2 surrogates, then look at normality and correlation.
"""

import numpy as np

from batchopt import stats
from batchopt.generator import GeneratorConfig, generate_instance

inst = generate_instance(GeneratorConfig(n_orders=200, capacity=10, seed=3))

series = {}
for surrogate in ("AP1", "AP2"):
    cfg = stats.SamplingConfig(n=2000, master_seed=3, surrogate=surrogate)
    series[surrogate] = stats.sample_objectives(inst, cfg)

# the same master seed gives the same partitions, so the X columns agree
assert np.array_equal(series["AP1"].x_sshape, series["AP2"].x_sshape)

ap2 = series["AP2"]
for col in ("x_return", "x_sshape"):
    d, p = stats.ks_normality_test(ap2.column(col))
    print(f"K-S {col}: D={d:.4f} p={p:.3f}")

for name, s in series.items():
    fit = stats.fit_arrays(s.x_sshape, s.y_pi)
    print(f"rho({name}, S-shape) = {fit.rho:.3f}")

# weighting aisles by length lifts the correlation, so AP2 is the better proxy
fit = stats.fit_bivariate(ap2, "sshape")
score = stats.mcrp_score(ap2, beta=1.0)
print(stats.write_fit_report(fit, score), end="")

# a surrogate value y0 predicts a range for the true objective
y0 = float(np.percentile(ap2.y_pi, 10))
for alpha in (0.05, 0.5):
    ub = stats.conditional_upper_bound(fit, y0, alpha)
    print(f"y0={y0:.0f}: P(X < {ub:.1f}) = {1 - alpha:.2f}")
