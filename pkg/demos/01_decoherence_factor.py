"""
Decoherence factor of a qubit coupled to a small environment
============================================================

A qubit prepared in (|0> + |1>)/sqrt(2) talks to a 6-level environment
through sigma_z. Each pointer state drives the environment with its own
branch Hamiltonian, and the qubit coherence is the overlap r(t) of the two
branches.
"""

import numpy as np

from dephasing_lab.coherence import random_model
from dephasing_lab.dephasing import QubitAmplitudes, decoherence_factor_spectral, trajectory

rng = np.random.default_rng(3)
model = random_model(6, rng)
env = np.eye(6, dtype=complex)[0]
amps = QubitAmplitudes.balanced()

# %% Sample r(t), the echo |r|^2 and the qubit purity
times = np.linspace(0, 20, 11)
rec = trajectory(model, env, amps, times)
print(f"{'t':>6} {'|r|':>8} {'echo':>8} {'purity':>8}")
for t, r, e, p in zip(rec.times, rec.r, rec.echo, rec.purity):
    print(f"{t:6.1f} {abs(r):8.4f} {e:8.4f} {p:8.4f}")

# %% The same r(t) written as a sum over pairs of branch eigenvalues
spectral = decoherence_factor_spectral(model, env, times)
print("\nlargest gap between the two routes:", np.max(np.abs(spectral - rec.r)))

# %% Purity never drops below 1/2, the value for a fully mixed qubit
print("minimum purity on a long grid:",
      trajectory(model, env, amps, np.linspace(0, 500, 5001)).purity.min())
