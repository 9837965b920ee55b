# %% [markdown]
# # The SDP layer
#
# Every program in the package goes through one interior-point solver.
# Problems are written against named blocks.

# %%
import io

import numpy as np

from thermosteer import SdpBuilder, diamond_norm, solve_sdp
from thermosteer.config import DEFAULT
from thermosteer.objects import identity_channel, replacement_channel, unitary_channel

# smallest eigenvalue of C as an SDP: min tr(C X) with tr X = 1
C = np.array([[2.0, 1.0 - 1j], [1.0 + 1j, 0.5]])
sb = SdpBuilder()
sb.add_block("X", 2, objective=C)
sb.add_scalar_eq({"X": np.eye(2)}, 1.0)
trace = io.StringIO()
sol = solve_sdp(sb.build(), DEFAULT.with_overrides(trace=trace))
print(sol.status, sol.primal_obj, np.linalg.eigvalsh(C)[0])
print(trace.getvalue().splitlines()[-1])

# %% [markdown]
# Diamond norms of a few channel differences.

# %%
ident = identity_channel(2)
for theta in (0.3, np.pi / 2, np.pi):
    U = np.diag([1, np.exp(1j * theta)])
    print(f"phase {theta:.3f}: {diamond_norm(ident.choi - unitary_channel(U).choi, (2, 2)):.8f}"
          f"  expected {2 * np.sin(theta / 2):.8f}")
dep = replacement_channel(np.eye(2) / 2)
print("full depolarising:", diamond_norm(ident.choi - dep.choi, (2, 2)))
