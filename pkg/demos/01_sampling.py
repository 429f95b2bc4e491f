# %% [markdown]
# Turning p-coins into a Cp-coin
#
# We hold a coin of unknown bias p and want a coin of bias C*p.
# The sampler only ever calls flip(); it never sees p.

# %%
import numpy as np

from bernfactory import SimulatedCoin, UniformSource, make_params, sample, simulate, summarize
from bernfactory.randomness import RandomSeed

params = make_params(C=2.0, eps=0.2)
print("k =", params.k, " gamma =", params.gamma, " r =", round(params.r, 4))

# %%
# One run at a time, on the reference path.
coin = SimulatedCoin(0.3, UniformSource(RandomSeed(1, 1)))
aux = UniformSource(RandomSeed(1, 0))
runs = [sample(params, coin, aux) for _ in range(10)]
for rec in runs:
    print(rec)

# %%
# Many runs through the compiled engine; same answer, much faster.
for p in (0.0, 0.1, 0.25, 0.4):
    s = summarize(simulate(params, p, 100_000, seed=7))
    print(f"p={p:<5} target {2 * p:.3f}  observed {s.output_mean:.4f}  "
          f"mean flips {s.flips.mean:7.2f}  sd {s.flips.sd:7.2f}")

# %%
# The flip count is heavy tailed near p = (1 - eps)/C.
res = simulate(params, 0.4, 100_000, seed=7)
qs = np.percentile(res.flips, [50, 90, 99, 99.9])
print("quantiles 50/90/99/99.9:", qs, " max:", res.flips.max())
