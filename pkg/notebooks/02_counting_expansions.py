# %% [markdown]
# # Counting beta-expansions
#
# N_n(x) counts the length-n digit words that extend to a beta-expansion
# of x. Three independent routes compute it: brute-force enumeration, a
# forward dynamic program, and a Monte Carlo average of 2**h over coin
# sequences (h = visits to the switch region).

# %%
import math

import numpy as np

from randbeta import BetaContext, CountQuery, build_density, count_brute, count_dp, count_monte_carlo, mu_S

# %% [markdown]
# ## The golden ratio and x = 1
# Only the 1 <-> 1/beta spine keeps branching, so N_n(1) = n + 1.

# %%
g = BetaContext.golden()
print([count_brute(g, CountQuery(1.0, n)) for n in range(11)])
print("n = 300 with exact arithmetic in Q(sqrt 5):", count_dp(g, CountQuery(1.0, 300), exact=True))

# %% [markdown]
# ## Monte Carlo realisation
# Averaging 2**h over random coins gives an unbiased estimate.

# %%
ctx = BetaContext(1.37)
q = CountQuery(0.9, 15)
mean, se = count_monte_carlo(ctx, q, 100_000, seed=1)
print(f"exact {count_dp(ctx, q)}, Monte Carlo {mean:.1f} +- {se:.1f}")

# %% [markdown]
# ## Typical points branch exponentially
# For mu-typical x the growth rate log N_n / n is at least log 2 * mu(S).
# x = 1 is not typical, which is why the golden count above is only linear.

# %%
rho = build_density(g, 40)
xs = rho.f.sample(50, np.random.default_rng(3))
rates = [math.log(count_dp(g, CountQuery(float(x), 40))) / 40 for x in xs]
print(f"mean rate {np.mean(rates):.4f}  vs  log2 * mu(S) = {math.log(2) * mu_S(g, rho):.4f}")
