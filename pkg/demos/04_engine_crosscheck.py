# %% [markdown]
# # Two independent checks
#
# The fast engine works on eigenbasis populations only.  Here it is compared
# with a full circuit simulation, record by record, and the closed-form
# moments are compared with a Monte Carlo integral.

# %%
from eigencast import analytics as an
from eigencast.validation import cross_validate

# %%
for rep in cross_validate(n=3, rounds=2, seed=0):
    print(f"{rep.variant:10s} p={rep.devices}  records {rep.records:5d}"
          f"  max |dP| {rep.max_probability_error:.1e}  max |dw| {rep.max_population_error:.1e}")

# %%
for q, closed, mc, se, ok in an.validate_moments(samples=100_000):
    print(f"{q:32s} {closed: .5f} {mc: .5f} +- {se:.1e} {'ok' if ok else 'MISS'}")
