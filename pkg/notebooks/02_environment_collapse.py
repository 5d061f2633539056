# %% [markdown]
# # An environment picks the pointer basis
#
# N environment atoms each watch the apparatus atom's pointer observable.
# The spin-apparatus coherence is multiplied by the damping factor
# z(t) = prod_k [cos 2 g_k t + i (|alpha_k|^2 - |beta_k|^2) sin 2 g_k t].
# With balanced environment atoms and random couplings z collapses towards
# zero, and its long-time mean square approaches 2^-N. A single draw of
# couplings at large N still fluctuates around that value by a factor of
# order one; averaging over draws recovers it.

# %%
import numpy as np

from pointerbasis import envselect

grid = np.arange(0.0, 200.0 + 1e-9, 0.05)
for n in (5, 10, 15):
    spec = envselect.EnvironmentSpec.random(n, seed=1991)
    trace = envselect.ztrace(spec, grid)
    stats = envselect.z_stats(spec, horizon=1e4, sample_count=100_000, seed=1991)
    print(f"N = {n:2d}  max|z| after burn-in {trace.max_abs_after_burn_in:.3f}  "
          f"long-time <|z|^2> {stats.mean_abs_sq:.2e}  2^-N {2.0**-n:.2e}")

# %% [markdown]
# Environment atoms that start in eigenstates of their coupling never
# learn anything, so the coherence survives for all time.

# %%
frozen = envselect.EnvironmentSpec.from_couplings([0.2, 0.5, 0.9], imbalance=1.0)
print("largest ||z| - 1| on the grid:", np.max(np.abs(np.abs(envselect.z_of_t(frozen, grid)) - 1.0)))

# %% [markdown]
# Long-time statistics against the product formula prod (1 + gamma_k^2)/2.

# %%
mixed = envselect.EnvironmentSpec.from_couplings([0.31, 0.47, 0.83, 0.59], [0.0, 0.5, 0.9, 0.0])
stats = envselect.z_stats(mixed, horizon=1e4, sample_count=100_000, seed=3)
print(f"<z> = {stats.mean_z:.4f} +- {stats.stderr_z:.4f}")
print(f"<|z|^2> = {stats.mean_abs_sq:.4f}, predicted {mixed.predicted_abs_sq():.4f}")

# %% [markdown]
# Commensurable couplings bring z back to exactly 1.

# %%
spec = envselect.EnvironmentSpec.from_couplings([0.1, 0.2, 0.3])
period = envselect.recurrence_time(spec)
print("recurrence time", period, "z there", envselect.z_of_t(spec, period))
print("incommensurable pair:", envselect.recurrence_time(envselect.EnvironmentSpec.from_couplings([1, np.sqrt(2)])))
