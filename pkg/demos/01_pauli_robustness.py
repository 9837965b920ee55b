# %% [markdown]
# # Thermalisation robustness of the X/Z qubit family
#
# Measure X or Z on a qubit in the maximally mixed state and look at the
# four conditional states. How much of the thermal reference state do we
# have to mix in before a local hidden state model exists?

# %%
import numpy as np

from thermosteer import (enumerate_strategies, lhs_membership, pauli_assemblage, pauli_xz_family,
                         apply_instrument, sr_gamma, sr_gamma_dual)
from thermosteer.objects import I2

gamma = I2 / 2
sigma = apply_instrument(pauli_xz_family(), gamma)
print(np.round(sigma.sigma.real, 3))

# %%
res = sr_gamma(sigma, gamma)
wit = sr_gamma_dual(sigma, gamma)
print(f"SR = {res.sr:.10f}   2^SR = {2 ** res.sr:.10f}")
print(f"primal q* = {res.q_star:.12f}   dual value = {wit.value:.12f}")

# %% [markdown]
# The primal hands back an LHS model for the mixed assemblage. Each hidden
# state belongs to one deterministic strategy (a0, a1).

# %%
for s, eta in zip(res.model.strategies.strategies, res.model.etas):
    print(s, np.round(eta.real, 4), "trace", round(np.trace(eta).real, 4))

# %% [markdown]
# The dual witness is nonnegative on every strategy, and its value on
# the assemblage is what rules out an LHS model.

# %%
strat = enumerate_strategies(2, 2)
print("smallest eigenvalue over strategies:", wit.min_eigenvalue(strat))

# %% [markdown]
# Sweep the visibility. Everything at or below 1/sqrt(2) is LHS.

# %%
for v in (0.5, 0.7, 1 / np.sqrt(2), 0.75, 0.9, 1.0):
    m = lhs_membership(pauli_assemblage(v), gamma)
    print(f"v={v:.4f}  member={m.member}  margin={m.margin:.4f}")
