# %% [markdown]
# # Certifying incompatibility with an ancilla
#
# Apply the family to one half of an isotropic state. The other half
# carries the steering. Noise in the shared state lowers the visibility,
# and the X/Z family stops being certified once 1 - eps falls to 1/sqrt(2).

# %%
import numpy as np

from thermosteer import apply_instrument, extend_with_ancilla, isotropic_state, sr_gamma, xz_measure_prepare
from thermosteer.objects import I2, PX, PZ
from thermosteer.objects import compatible_family, measure_prepare_family

xz = extend_with_ancilla(xz_measure_prepare())


def robustness(fam, eps):
    s = apply_instrument(fam, isotropic_state(2, eps))
    return sr_gamma(s, s.reduced).sr


for eps in (0.05, 0.2, 0.28, 0.3, 0.5):
    sr = robustness(xz, eps)
    print(f"eps={eps:.2f}  SR={sr:.5f}  2^SR={2 ** sr:.5f}  sqrt2*(1-eps)={np.sqrt(2) * (1 - eps):.5f}")

# %% [markdown]
# Locate the threshold by bisection.

# %%
lo, hi = 0.05, 0.5
while hi - lo > 1e-4:
    mid = (lo + hi) / 2
    lo, hi = (mid, hi) if robustness(xz, mid) > 1e-7 else (lo, mid)
print((lo + hi) / 2, 1 - 1 / np.sqrt(2))

# %% [markdown]
# A control: noisy X and Z read off one joint measurement. These are
# compatible by construction and never steer.

# %%
povm = [(I2 + (s * PX + t * PZ) / np.sqrt(2)) / 4 for s in (1, -1) for t in (1, -1)]
parent = measure_prepare_family([povm], I2 / 2)
post = np.zeros((2, 4, 2))
for l in range(4):
    post[0, l, l // 2] = 1
    post[1, l, l % 2] = 1
control = extend_with_ancilla(compatible_family([parent[(l, 0)] for l in range(4)], post, 2, 2))
print([round(robustness(control, eps), 9) for eps in (0.05, 0.2, 0.5)])
