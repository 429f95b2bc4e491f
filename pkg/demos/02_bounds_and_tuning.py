# %% [markdown]
# Expected-flip bounds and the (m, gamma) trade-off

# %%
import numpy as np

from bernfactory import bounds

C, eps = 2.0, 0.2
print("simple bound 9.5C/eps:", bounds.simple_bound(C, eps))
print("default (m=2.3, gamma=0.5):", round(bounds.sup_bound(C, eps, 0.5, 2.3), 3))
print("lower bound for any factory:", bounds.lower_bound(C, eps))

# %%
# How the bound moves with p, for the default parameters.
k = 2.3 / (0.5 * eps)
ps = np.linspace(0, (1 - eps) / C, 9)
for p, v in zip(ps, bounds.theorem4_bound(C, eps, 0.5, k, ps)):
    print(f"p={p:.3f}  bound {v:8.3f}")

# %%
# A coarse look at the surface over (m, gamma); infeasible cells print as '-'.
for m in (1.5, 2.0, 2.5, 3.0):
    cells = []
    for g in (0.3, 0.4, 0.5, 0.6):
        try:
            cells.append(f"{bounds.sup_bound(C, eps, g, m):8.2f}")
        except bounds.InfeasibleBoundError:
            cells.append(f"{'-':>8}")
    print(f"m={m}", *cells)

# %%
for C in (2, 5, 10, 20):
    opt = bounds.optimize_params(C, eps)
    print(f"C={C:>2}  m*={opt.m_star:.3f}  gamma*={opt.gamma_star:.3f}  bound {opt.bound_value:.2f}")
