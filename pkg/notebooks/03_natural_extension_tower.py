# %% [markdown]
# # The natural-extension tower
#
# Sublevels are rectangles indexed by coin words: width r(w) (the orbit
# point of 1 along w), thickness (2 beta)**-n. The tower map stretches x by
# beta, shrinks y by 2 beta and either climbs one level or drops a strip back
# into the base. A reflected copy plus a unit-translation swap fix the one
# place where the x-coordinate would disagree with the random map.

# %%
import numpy as np

from randbeta import BetaContext, layout, mass_identity, natural_extension_step, partial_sum, step_random
from randbeta.stepfn import sup_distance
from randbeta.tower import TowerPoint

# %%
g = BetaContext.golden()
tower = layout(g, 6)
for s in tower.sublevels(2):
    print(s.prefix, f"width={s.width:.4f} base={s.base_height:.4f} thickness={s.thickness:.4f} rank={s.rank}")

# %% [markdown]
# ## One step on a point
# x = 0.8 sits in S. With coin 0 the endpoint beta of sublevel "0" lies in R,
# so the point is in a defect set and the swap sends it to the reflected tower.

# %%
p = TowerPoint((0,), 0.8, tower.sublevel((0,)).base_height + 0.1)
q = natural_extension_step(tower, p, 0)
print(q)
print("random map gives", step_random(g, 0.8, 0)[0])

# %% [markdown]
# ## Mass bookkeeping
# Strips dropped back into the base fill it exactly; the partial sums close
# in on 1 at rate beta**-depth.

# %%
for depth in (5, 10, 20, 30):
    led = mass_identity(BetaContext(1.4), depth)
    print(depth, led.partial_sum, "gap bound", led.gap_bound)

# %% [markdown]
# ## Projecting the tower recovers the density
# The length of the vertical fibre above x, summed over both towers, is the
# unnormalised density partial sum.

# %%
ctx = BetaContext(1.31)
print("sup difference:", sup_distance(layout(ctx, 12).fiber_measure(), partial_sum(ctx, 12)))

# %% [markdown]
# ## Vectorised audit on uniform samples

# %%
big = layout(ctx, 18)
side, n, idx, x, y, coin = big.sample(200_000, np.random.default_rng(0))
_, _, _, x2, _, _, ok = big.step_arrays(side, n, idx, x, y, coin)
digits = np.where(x < ctx.s_left, 0, np.where(x > ctx.s_right, 1, coin))
print("mismatches:", int(np.sum(x2[ok] != ctx.beta * x[ok] - digits[ok])), "of", int(ok.sum()))
