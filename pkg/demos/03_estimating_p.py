# %% [markdown]
# Estimating p with four successes of the factory
#
# Call the Cp-factory until it has returned four ones; A calls were needed.
# 4/(C A) lands within relative error sqrt(eps) of p at least 3/4 of the time.

# %%
import numpy as np

from bernfactory import make_params
from bernfactory.estimator import coverage, estimate_many, expected_flip_cost

params = make_params(2.0, 0.2)
batch = estimate_many(params, 0.4, 10_000, seed=0)
print("mean A:", batch.A.mean(), "(4 / Cp =", 4 / 0.8, ")")
print("coverage:", coverage(batch.p_hat, 0.4, 0.2))
print("median p_hat:", np.median(batch.p_hat))

# %%
print("mean flips per estimate:", batch.total_flips.mean())
print("bound on expected flips:", expected_flip_cost(params, 0.4))
