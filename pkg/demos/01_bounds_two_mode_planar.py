# %% [markdown]
# # Lower and upper bounds for a two-mode planar system
#
# A rotation by -pi/4 and the hyperbolic map diag(1/2, 2) each preserve the
# norm of some direction, yet clever switching drives every state to zero.
# This script brackets the best achievable decay rate from both sides.

# %%
import numpy as np

from switchstab import algorithm1_upper, best_response_upper, get_instance, sv_lower_bound, subradius_norm_upper
from switchstab.instances import stanford_urbano_words

su = get_instance("stanford-urbano").matrix_set
print(su.matrices)

# %% [markdown]
# ## Lower bounds
# The smallest singular value of any length-t product gives a floor on the rate.

# %%
lower = sv_lower_bound(su, 6)
for t, val in lower.per_horizon:
    print(f"t={t}: {val:.6f}")
print("subradius norm bound:", subradius_norm_upper(su, 10).value)

# %% [markdown]
# ## Grid upper bounds
# Pick, for each direction on a grid, the best product of length t; a Lipschitz
# pad covers the directions between grid points.

# %%
for rep in algorithm1_upper(su, 4, 4096):
    print(f"t={rep.horizon}: certified {rep.certified:.6f}")

# %% [markdown]
# Letting each cell choose among the thirteen listed words (or all words up to
# length nine) tightens the certificate considerably.

# %%
listed, arcs = best_response_upper(su, 0, 8192, words=stanford_urbano_words())
full, _ = best_response_upper(su, 9, 8192)
print(f"listed words: empirical {listed.empirical:.6f}, certified {listed.certified:.6f}")
print(f"all words t<=9: empirical {full.empirical:.6f}, certified {full.certified:.6f}")
print("arcs used:", len(arcs.arcs))
print("reference 0.9**0.25 =", np.round(0.9**0.25, 6))
