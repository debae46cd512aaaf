# %% [markdown]
# # A control Lyapunov function on a grid
#
# Value iteration for V(x) = min_i V(A_i x) / lambda converges when lambda
# exceeds the stabilization rate.  Its unit level set and the decrease ratio
# are written as SVG files next to this script.

# %%
from pathlib import Path

import numpy as np

from switchstab import AngularGrid, decrease_ratio, extract_feedback, get_instance, v_hat
from switchstab.lyapunov import closed_loop_simulate, exceedance_fraction
from switchstab.svg import level_set_plot, line_plot

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
su = get_instance("stanford-urbano").matrix_set
grid = AngularGrid(4096)

# %%
for lam in (0.88, 0.80):
    table = v_hat(su, lam, grid, tol=1e-6)
    ratio = decrease_ratio(table, su)
    print(f"lambda={lam}: {table.iterations} sweeps, exceedance {exceedance_fraction(ratio, lam):.4%}")

# %% [markdown]
# Keep the certifiable table, draw it, and run the feedback it induces.

# %%
table = v_hat(su, 0.88, grid, tol=1e-6)
(out / "level_set.svg").write_text(level_set_plot(grid.angles, table.values, "unit level set, lambda = 0.88"))
ratio = decrease_ratio(table, su)
(out / "ratio.svg").write_text(
    line_plot(grid.midpoints, ratio, "decrease ratio", "angle", "ratio", hlines={"lambda": 0.88})
)

feedback = extract_feedback(table, su, 0.9)
states = closed_loop_simulate(feedback, su, np.array([1.0, 1.0]) / np.sqrt(2), 60)
norms = np.linalg.norm(states, axis=1)
print("norm after 60 steps:", norms[-1], "vs 0.9**60 =", 0.9**60)
