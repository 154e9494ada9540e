"""
How sloppy can the bath preparation be?
=======================================

If every bath spin ends up slightly off |0>, with |beta_k|^2 <= eps, the
qubit loses a little coherence on average. The loss is bounded by
((1 - eps)^2 + eps^2)^n, which is close to 1 - 2 n eps.
"""

import numpy as np

from dephasing_lab import spin_bath as sb
from dephasing_lab.dephasing import time_averaged_echo

n, eps = 5, 0.01
couplings = sb.DEFAULT_COUPLINGS[:n]
spec = sb.ProductState.uniform_error(eps, n)

bound = sb.preparation_bound(eps, n)
print(f"bound            {bound:.12f}")
print(f"first-order      {1 - 2 * n * eps:.12f}")
print(f"analytic average {sb.product_average_echo(spec):.12f}")

# %% Exact dynamics, no self-evolution, averaged over a long window
model = sb.build_zurek(sb.ZurekConfig(couplings, 0.0))
numeric = time_averaged_echo(model, sb.product_state(spec), horizon=1e4 / sb.min_gap(couplings), samples=100_000)
print(f"numeric average  {numeric:.12f}")

# %% Smaller errors only help
rng = np.random.default_rng(5)
worst = min(
    sb.product_average_echo(sb.ProductState(tuple(np.sqrt(1 - p)), tuple(np.sqrt(p))))
    for p in rng.uniform(0, eps, size=(200, n))
)
print(f"worst of 200 random preparations {worst:.6f} >= {bound:.6f}")
