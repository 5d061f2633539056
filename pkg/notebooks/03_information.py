# %% [markdown]
# # Where the information goes
#
# Information of a state on a d-dimensional space is I = ln d - S. During
# the bit-model interaction the total stays at ln 4 while the per-subsystem
# informations drain into correlation information.

# %%
import numpy as np

from pointerbasis import bitmodel, infotheory, qcore

cfg = bitmodel.BitModelConfig(np.sqrt(0.5), np.sqrt(0.5), 1.0)
part = qcore.Partition.of("atom", "spin")
print(" g t    I     I_atom  I_spin  I_corr")
for t in np.linspace(0, cfg.tau, 6):
    rep = infotheory.info_report(bitmodel.evolve_bitbit(cfg, t), part)
    print(f"{t:5.3f}  {rep.total:.4f}  {rep.per_block[0]:.4f}  {rep.per_block[1]:.4f}  {rep.correlation:.4f}")

# %% [markdown]
# A density matrix does not remember how it was prepared: mixing up and
# down 3:1 gives the same state as mixing up, odot and otimes 2:1:1.

# %%
spin = lambda v: qcore.PureState.qubit("spin", v)  # noqa: E731
pointer = infotheory.Preparation(((0.75, spin(qcore.UP)), (0.25, spin(qcore.DOWN))))
rotated = infotheory.Preparation(((0.5, spin(qcore.UP)), (0.25, spin(qcore.ODOT)), (0.25, spin(qcore.OTIMES))))
r1, r2 = infotheory.ensemble_density(pointer), infotheory.ensemble_density(rotated)
print(np.round(r1.matrix.real, 12))
print("difference", np.max(np.abs(r1.matrix - r2.matrix)), "information", infotheory.info_total(r1))
