# %% [markdown]
# # Long orbits versus the analytic density
#
# The random map is ergodic, so one long orbit with fair coins spends time
# in each interval in proportion to the invariant measure.

# %%
from randbeta import BetaContext, SimConfig, build_density, mu_S, run_orbit
from randbeta.simulate import histogram_l1

# %%
for beta in (1.3, 1.5, BetaContext.golden().beta, 1.9):
    ctx = BetaContext(beta)
    rho = build_density(ctx, 30)
    hist, s_frac = run_orbit(SimConfig(beta, steps=500_000, bins=80, seed=7))
    print(f"beta={beta:.4f}  L1={histogram_l1(hist, rho.f):.4f}  "
          f"time in S={s_frac:.4f}  mu(S)={mu_S(ctx, rho):.4f}")

# %% [markdown]
# The histogram itself is plain data; write it out for plotting elsewhere.

# %%
hist, _ = run_orbit(SimConfig(1.5, steps=100_000, bins=10, seed=1))
print(hist.to_csv(["beta=1.5"]))
