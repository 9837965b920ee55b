# %% [markdown]
# # Free operations never help
#
# Deterministic allowed operations wrap a family between Gibbs-preserving
# channels and shuffle the classical labels. Single-Kraus filters that keep
# the thermal state and the outcome statistics are free too. Neither should
# ever raise the robustness.

# %%
import numpy as np

from thermosteer import Schedule, apply_instrument, pauli_xz_family, sr_gamma
from thermosteer.objects import I2
from thermosteer.resource import (Lf1Filter, apply_dao, compose_dao, monotone_audit, random_dao,
                                  random_lf1, relabel_dao)

rng = np.random.default_rng(2024)
gamma = I2 / 2
fam = pauli_xz_family()

# %% [markdown]
# Relabelling outcomes is free and leaves SR unchanged.

# %%
swapped = apply_dao(relabel_dao([[1, 0], [1, 0]], 2), fam, gamma)
print(sr_gamma(apply_instrument(fam, gamma), gamma).sr,
      sr_gamma(apply_instrument(swapped, gamma), gamma).sr)

# %% [markdown]
# Random operations compose into another operation of the same kind.

# %%
op1, op2 = random_dao(2, 2, gamma, rng), random_dao(2, 2, gamma, rng)
a = apply_dao(op2, apply_dao(op1, fam, gamma), gamma)
b = apply_dao(compose_dao(op2, op1), fam, gamma)
print(max(np.abs(a[k].choi - b[k].choi).max() for k in a.filters))

# %% [markdown]
# A batch audit.

# %%
ops = [random_dao(2, 2, gamma, rng) for _ in range(50)]
filters = [random_lf1(gamma, rng) for _ in range(50)]
report = monotone_audit(fam, gamma, Schedule.partial(1.0), ops, filters)
print("\n".join(report.table().splitlines()[:6]))
print("...")
print(report.table().splitlines()[-1])

# %% [markdown]
# A filter that damps one level does not preserve the thermal state. By
# default it is rejected. In permissive mode it is applied and its row is
# marked non-certified.

# %%
bad = Lf1Filter(np.diag([1.0, 0.5]))
rep = monotone_audit(fam, gamma, Schedule.partial(1.0), filters=[bad], permissive=True)
print(rep.table())
