# %% [markdown]
# # One atom records one spin
#
# An apparatus atom starts in |+> and couples to a spin through
# H = g (|bot><bot| - |top><top|) (x) sigma_z. After a quarter period
# tau = pi/4g the atom's pointer states |±>, |∓> are perfectly correlated
# with the spin's up/down. We follow the closed-form trajectory, compare it
# with brute-force spectral propagation, and look at the reduced states.

# %%
import numpy as np

from pointerbasis import bitmodel, qcore

cfg = bitmodel.BitModelConfig(a=0.6, b=0.8j, g=1.0)
h = bitmodel.h_as(cfg.g)
psi0 = bitmodel.initial_state(cfg)

# %% [markdown]
# The closed form and the spectral propagator agree up to a global phase.

# %%
for t in np.linspace(0, 2 * cfg.tau, 5):
    closed = bitmodel.evolve_bitbit(cfg, t)
    exact = qcore.reorder(qcore.evolve_exact(h, t, psi0), ["spin", "atom"])
    spin = qcore.partial_trace(closed, ["spin"])
    print(f"g t = {cfg.g * t:5.3f}  oracle gap {qcore.phase_distance(exact, closed):.1e}  "
          f"spin purity {qcore.purity(spin):.4f}")

# %% [markdown]
# At tau the spin's reduced matrix is diagonal: the coherence has moved
# into the spin-atom correlation, while the global state stays pure.

# %%
at_tau = bitmodel.evolve_bitbit(cfg, cfg.tau)
print(np.round(qcore.partial_trace(at_tau, ["spin"]).matrix, 12))
print("global purity", qcore.purity(at_tau.density()))

# %% [markdown]
# Which basis is "recorded"? With equal weights the same state reads as
# spin up/down correlated with |±>/|∓>, or as odot/otimes correlated with
# |+>/|->. Both decompositions have orthonormal relative states.

# %%
eq = bitmodel.evolve_bitbit(bitmodel.BitModelConfig(np.sqrt(0.5), np.sqrt(0.5), 1.0), cfg.tau)
cut = qcore.Partition.of("atom", "spin")
for name, basis in (("pointer", [qcore.EXCITED, qcore.GROUND]), ("conjugate", [qcore.PLUS, qcore.MINUS])):
    dec = qcore.relative_states(eq, cut, basis)
    print(name, "weights", np.round(dec.coefficients, 6), "overlap", np.round(abs(dec.overlaps()[0, 1]), 12))
