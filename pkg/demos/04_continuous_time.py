# %% [markdown]
# # Sample-and-hold switching in continuous time
#
# The greedy law picks the generator whose flow over one sampling period
# shrinks the current state most.  Shifting every generator by gamma Id
# multiplies the trajectory by exp(gamma t), which we verify numerically.

# %%
import numpy as np

from switchstab import MatrixSet
from switchstab.ctsim import CtSystem, Schedule, greedy_feedback, sample_hold_simulate, shift_scaling_check

rot = np.array([[0.0, -1.0], [1.0, 0.0]])
sys_ = CtSystem(MatrixSet.from_matrices([rot + 0.5 * np.eye(2), rot - 0.5 * np.eye(2)]))

# %%
for delta in (0.1, 0.05):
    traj = sample_hold_simulate(sys_, greedy_feedback(sys_, delta), delta, [1.0, 0.0], 20.0)
    print(f"delta={delta}: |x(20)| = {traj.norms[-1]:.3e} (exp(-10) = {np.exp(-10):.3e})")

# %%
rng = np.random.default_rng(0)
sched = Schedule(tuple((int(rng.integers(2)), 0.2) for _ in range(20)))
for gamma in (-1.0, 0.5):
    rep = shift_scaling_check(sys_, gamma, sched, [1.0, 2.0])
    print(f"gamma={gamma}: max relative error {rep.max_rel_error:.1e}")
