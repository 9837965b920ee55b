# %% [markdown]
# # When does steering stop for good?
#
# Under a non-Markovian envelope the steerable region can be left and
# re-entered. The harness scans a grid, refines each crossing by bisection
# and reports the last exit.

# %%
import math

import numpy as np

from thermosteer import Schedule, find_t_star, pauli_assemblage
from thermosteer.objects import I2
from thermosteer.thermo import envelope_evolution, schedule_evolution

gamma = I2 / 2
sigma = pauli_assemblage()


def oscillating(t):
    return math.exp(-t) * (1 + math.cos(10 * t)) / 2


res = find_t_star(sigma, gamma, envelope_evolution(gamma, oscillating), 5.0, grid=500, tol=1e-6)
print("t* =", res.t_star)
print(res.crossings)

# %% [markdown]
# The envelope revives but never climbs back above 1/sqrt(2) after the
# first dip, so there is a single exit.

# %%
ts = np.linspace(0, 1.5, 16)
print(np.round([oscillating(t) for t in ts], 3))

# %% [markdown]
# An envelope that dips and then recovers gives two exits.

# %%
def revive(t):
    return max(0.0, 1 - t) if t < 1 else (0.9 if t < 2 else 0.0)


res = find_t_star(sigma, gamma, envelope_evolution(gamma, revive), 3.0, grid=300, tol=1e-6)
print([(round(c["t"], 4), c["kind"]) for c in res.crossings], "t* =", res.t_star)

# %% [markdown]
# For a Markovian schedule t* is just the survival time.

# %%
res = find_t_star(sigma, gamma, schedule_evolution(gamma, Schedule.partial(1.0)), 5.0, tol=1e-8)
print(res.t_star, math.log(2) / 2)
