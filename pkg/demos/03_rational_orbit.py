# %% [markdown]
# # Exact orbit of rational directions
#
# Lines through the origin with rational slope p/q are mapped by the two
# modes to other rational lines.  Breadth-first search in exact integers
# shows the slope 1/2 is never reached from 1/1, while the rotation part
# of A2 A1 makes the float orbit dense.

# %%
from switchstab.orbit import RationalDirection, density_gap, explore_orbit, mod4_invariant, rotation_check

graph = explore_orbit(12)
print("nodes:", len(graph))
print("mod-4 violations:", sum(not mod4_invariant(d) for d in graph.nodes))
print("1/2 reached:", RationalDirection(1, 2) in graph)

# %%
rot = rotation_check()
print(f"cos 2theta = {rot.cos_2theta:.6f}, eigen-moduli {rot.eigen_moduli}, complex pair {rot.nonreal}")
for n in (100, 1000, 10000):
    print(f"n={n}: largest gap {density_gap(n):.2e}")
