# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Limit matrices and how fast sums settle
#
# The rate model is closed form; the harness checks its constants against
# replica averages.

# %%
import numpy as np

from middev import harness, rates
from middev.params import Case, ModelConfig

# %%
model = rates.build(-1.0, -0.5, sigma=1.0)
print("Gamma\n", model.Gamma)
print("Theta\n", model.Theta)
print("Upsilon Theta Upsilon^T\n", model.Upsilon @ model.Theta @ model.Upsilon.T)

# %%
report = rates.consistency_check(model)
for check in report.checks:
    print(f"{check['name']:45s} residual {check['residual']:.2e}  {'ok' if check['passed'] else 'FAIL'}")

# %% [markdown]
# ## Fixed-coefficient variances along the schedule
#
# Rescaled by the case normalisation they approach the limits with an
# O(1/kappa) error.

# %%
g1, g2 = model.gamma1, model.gamma2
for kappa in (10.0, 100.0, 1000.0):
    vt, vr, _ = rates.stationary_variances(1 + g1 / kappa, 1 + g2 / kappa)
    print(f"kappa={kappa:6.0f}: kappa^3 v_theta={kappa**3 * vt:.4f} (limit {model.Gamma[0, 0]:.4f}), "
          f"kappa v_rho={kappa * vr:.4f} (limit {model.Gamma[1, 1]:.4f})")

# %% [markdown]
# ## Concentration of normalised sums
#
# Small run; the acceptance suite uses n = 10^6.

# %%
for case in (Case.I, Case.II):
    cfg = harness.ExperimentConfig(ModelConfig(case, -1.0, -1.0, 0.3, n=50_000), 40, 1, "Concentration")
    res = harness.run(cfg)
    row = ", ".join(f"{s['name']}={s['estimate']:.3f}/{s['target']:.3f}" for s in res.statistics)
    print(case.value, row)

# %% [markdown]
# In Case I the H column runs high: its endpoint terms add roughly X_n^2,
# whose share of n shrinks only like n^(1-3 delta).

# %%
cfg = harness.ExperimentConfig(ModelConfig(Case.I, -1.0, -1.0, 0.3, n=50_000), 40, 1, "Concentration")
res = harness.run(cfg)
h = res.stat("H")
print(f"Case I: H/n={h['estimate']:.3f}, endpoint share {res.extras['H_endpoint_share']:.3f}, "
      f"difference {h['estimate'] - res.extras['H_endpoint_share']:.3f} against {h['target']}")

# %% [markdown]
# ## Variance matching at a moderate size

# %%
cfg = harness.ExperimentConfig(ModelConfig(Case.II, -1.0, -1.0, 0.15, n=20_000), 400, 2, "VarianceMatch")
res = harness.run(cfg)
for s in res.statistics:
    if not s["name"].startswith("mean_"):
        print(f"{s['name']:15s} {s['estimate']:8.3f}  target {s['target']}")
print("covariance\n", np.asarray(res.extras["covariance"]))
