# %% [markdown]
# # Redundant records
#
# Copying the spin into N atoms makes the pointer information robust:
# majority voting survives local flips. The conjugate information lives
# only in the parity of all atoms, and one flip is enough to invert it.

# %%
from pointerbasis import redundancy

print("N=3, one flip, exhaustive (majority, parity):", redundancy.reliability_exhaustive(3, 1))

# %%
print(" N   majority  parity   (flip rate 0.2)")
for n in range(3, 16, 2):
    r = redundancy.reliability_curve(n, flip_rate=0.2, trials=20_000, seed=7)
    print(f"{n:2d}   {r.majority_success:.4f}   {r.parity_success:.4f}")

# %% [markdown]
# A few atoms are enough to read the pointer record.

# %%
rec = redundancy.record_state(0.6, 0.8, 9)
spin, outcome = redundancy.measure_record(rec, redundancy.POINTER, seed=1)
print("spin", spin, "atoms", outcome.per_atom, "first three vote", redundancy.majority_decode(outcome, {1, 2, 3}))
