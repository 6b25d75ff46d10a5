# %% [markdown]
# # The invariant density of the random beta-transformation
#
# For 1 < beta < 2 the random map multiplies by beta and, on the switch
# region S, subtracts a fair coin. Its invariant density is an explicit sum
# of indicator functions over the orbit tree of 1 and of its mirror point.
# This script builds it, checks it against the transfer operator, and
# sweeps mu(S) over beta.

# %%
import numpy as np

from randbeta import BetaContext, TransferConfig, apply_transfer, build_density, fixed_point, l1_distance, mu_S
from randbeta.orbit_tree import build_tree

# %% [markdown]
# ## Golden ratio: a finite orbit tree
# The orbit of 1 only ever visits {0, 1/beta, 1, beta}, so the density has
# three pieces.

# %%
g = BetaContext.golden()
tree = build_tree(g, 1.0, 10)
print("support per level:", tree.support_size_per_level, "finite:", tree.is_eventually_finite)

rho = build_density(g, 40)
for left, right, value in rho.f.to_rows():
    print(f"[{left:.6f}, {right:.6f})  {value:.7f}")
print("mu(S) =", mu_S(g, rho), " sup error bound =", rho.sup_error)

# %% [markdown]
# ## Independent check with the transfer operator
# Iterating the Perron-Frobenius operator from the uniform density should
# land on the same function.

# %%
fp = fixed_point(g, TransferConfig())
print("iterations:", fp.iterations, " L1 to formula:", l1_distance(fp.density, rho.f))
print("invariance residual ||L rho - rho||_1 =", l1_distance(apply_transfer(g, rho.f), rho.f))

# %% [markdown]
# ## A generic beta
# For beta = 1.7 the tree is infinite. The depth-40 sum has many pieces, but
# the tail bound shrinks like beta**-40.

# %%
ctx = BetaContext(1.7)
rho = build_density(ctx, 40)
print(len(rho.f), "pieces, C =", rho.C, " sup error <=", rho.sup_error)
print("symmetric under x -> D - x:", np.allclose(rho.f(np.linspace(0, ctx.right_end, 11)),
                                                 rho.f(ctx.right_end - np.linspace(0, ctx.right_end, 11))))

# %% [markdown]
# ## mu(S) as a function of beta
# The mass of the switch region falls off as beta approaches 2. At
# beta = 3/2 the density is uniform and mu(S) = 1/3.

# %%
for beta in np.linspace(1.45, 1.95, 11):
    c = BetaContext(float(beta))
    print(f"beta={beta:.3f}  mu(S)={mu_S(c, build_density(c, 30)):.6f}")
