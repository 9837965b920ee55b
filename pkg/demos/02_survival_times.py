# %% [markdown]
# # Survival times under thermalisation
#
# A schedule h(t) says how much of a state survives contact with the bath:
# D_t(rho) = h(t) rho + (1 - h(t)) gamma. Steering lasts until h drops to
# 2^-SR.

# %%
import math

import numpy as np

from thermosteer import Schedule, apply_instrument, davies_map, pauli_xz_family, sr_gamma, t_min
from thermosteer.objects import I2, choi_distance
from thermosteer.thermo import thermalisation_channel, thermalise

fam = pauli_xz_family()
gamma = I2 / 2
sr = sr_gamma(apply_instrument(fam, gamma), gamma).sr

schedules = {
    "exp": Schedule.partial(1.0),
    "rational": Schedule.rational(1.0),
    "gaussian": Schedule.custom(lambda t: np.exp(-np.asarray(t) ** 2), lambda y: math.sqrt(-math.log(y))),
    "table": Schedule.from_table([[0, 1], [0.5, 0.6], [1.5, 0.25], [3, 0.05]]),
}
for name, s in schedules.items():
    tm = t_min(fam, gamma, s)
    print(f"{name:9s} t_min = {tm:.6f}   h(t_min) = {float(s.h(tm)):.8f}   2^-SR = {2 ** -sr:.8f}")

# %% [markdown]
# Just before t_min the thermalised assemblage is still steerable. Just
# after, it is not.

# %%
s = schedules["exp"]
tm = t_min(fam, gamma, s)
sigma = apply_instrument(fam, gamma)
for t in (0.8 * tm, 0.99 * tm, 1.01 * tm, 1.5 * tm):
    print(f"t/t_min={t / tm:.2f}  SR={sr_gamma(thermalise(sigma, gamma, s, t), gamma).sr:.3e}")

# %% [markdown]
# Exponential decay is what a qubit Davies map does when its dephasing
# and relaxation rates coincide.

# %%
worst = 0.0
for p in (0.3, 0.5, 0.9):
    for G in (0.5, 2.0):
        for t in np.linspace(0, 4, 9):
            d = davies_map(p, G, G, t)
            worst = max(worst, choi_distance(d, thermalisation_channel(np.diag([p, 1 - p]), math.exp(-G * t))))
print("largest Choi distance:", worst)
