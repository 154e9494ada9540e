"""
A spin bath with weak self-evolution
====================================

Four environment spins couple to the qubit via sigma_z sigma_z terms. Without
self-evolution the state |0000> is an eigenstate of both branches and the
qubit stays coherent. A weak projector term lam * N |Phi><Phi| mixes the
levels and leaves a small echo deficit that second-order perturbation theory
predicts.
"""

import numpy as np

from dephasing_lab import spin_bath as sb
from dephasing_lab.dephasing import echo_deficit, time_averaged_echo

g = (0.95, 0.61, 0.37, 0.17)
gap = sb.min_gap(g)
print("interaction levels:", np.round(np.sort(sb.omegas(g)), 3))
print("smallest level spacing:", gap)

cfg = sb.ZurekConfig(g, 1e-3 * gap)
model = sb.build_zurek(cfg)
psi = sb.ground_state(cfg.n)

# %% Exact deficit against the second-order formula
times = np.linspace(0, 200, 9)[1:]
exact = echo_deficit(model, psi, times)
pert = sb.perturbative_deficit(cfg, times)
print(f"\n{'t':>6} {'exact':>12} {'2nd order':>12} {'rel diff':>9}")
for t, e, p in zip(times, exact, pert):
    print(f"{t:6.1f} {e:12.4e} {p:12.4e} {abs(e - p) / p:9.1e}")

# %% Doubling lambda quadruples the deficit
double = sb.ZurekConfig(g, 2e-3 * gap)
print("\ndeficit ratio for 2 lambda:", np.round(echo_deficit(sb.build_zurek(double), psi, times) / exact, 4))

# %% Long-time average
avg = time_averaged_echo(model, psi, horizon=1e4 / gap, samples=100_000)
print(f"\naverage echo, numerics: {avg:.12f}")
print(f"average echo, formula:  {sb.perturbative_average(cfg):.12f}")
