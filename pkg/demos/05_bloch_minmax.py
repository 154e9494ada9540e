"""
Best initial state for a two-level environment
==============================================

The environment is a single spin that precesses about m0 or m1 depending on
the qubit pointer state. The fields sit at angles +alpha and -alpha from z in
the x-z plane. We look for the Bloch vector whose worst-case overlap over a
full period is as large as possible.
"""

import numpy as np

from dephasing_lab.bloch import FieldPair, alpha_sweep, min_coherence, optimize_initial_state, theoretical_rmin

# %% Two regimes: perpendicular to both fields, or along one of them
for alpha in (np.pi / 6, 5 * np.pi / 12):
    f = FieldPair(alpha)
    opt = optimize_initial_state(f)
    print(f"alpha = {np.degrees(alpha):5.1f} deg: r_min = {opt.r_min:.6f} ({opt.regime}), "
          f"v* = {np.round(opt.v_star, 4)}, {len(opt.ties)} tied directions")
    print(f"   y axis gives {min_coherence([0, 1, 0], f)[0]:.6f}, m0 gives {min_coherence(f.m0, f)[0]:.6f}")

# %% A coarse sweep against the closed form
grid = np.linspace(0.1, 1.5, 8)
for r in alpha_sweep(grid, sphere_samples=800, time_samples=128):
    print(f"{r.alpha:6.3f} {r.r_min:.6f} {theoretical_rmin(r.alpha):.6f} {r.regime}")
