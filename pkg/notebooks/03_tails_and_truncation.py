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
# # Tail exponents and truncated martingales
#
# Empirical tail slopes of the normalised slope estimator, and the distance
# between the martingale pair and its truncated version.

# %%
from pathlib import Path

from middev import harness, plots
from middev.params import Case, ModelConfig, Scale

out = Path("notebook_output")
out.mkdir(exist_ok=True)

# %% [markdown]
# ## Tail slopes
#
# With a_n = sqrt(log n) the slope -log p / a_n^2 should track the quadratic
# rate. At this size the agreement is rough.

# %%
model = ModelConfig(Case.I, -1.0, -1.0, 0.1, scale=Scale.sqrt_log(), n=5_000)
cfg = harness.ExperimentConfig(model, 20_000, 3, "TailSlope", thresholds=(0.25, 0.5, 0.75, 1.0))
res = harness.run(cfg)
for row in res.thresholds:
    flag = " (censored)" if row["lower_bound_flag"] else ""
    print(f"x={row['x']:.2f}  p_hat={row['p_hat']:.2e}  slope={row['slope']:.3f}  rate={row['rate_prediction']:.3f}{flag}")
print("monotone:", res.extras["monotone"])
plots.emit_plot(res, "tailslope", out / "tailslope.svg")

# %% [markdown]
# ## Truncation gap
#
# The 99th percentile of the normalised gap falls with n, and the predictable
# covariance settles near its limit.

# %%
model = ModelConfig(Case.I, -1.0, -1.0, 0.25, scale=Scale.sqrt_log(), n=1_000)
cfg = harness.ExperimentConfig(model, 60, 4, "Truncation", n_grid=(1_000, 10_000, 30_000))
res = harness.run(cfg)
for row in res.extras["grid"]:
    print(f"n={row['n']:6d}  gap p99={row['gap_p99']:.4f}")
n_last = cfg.n_grid[-1]
for ij in ("11", "12", "22"):
    s = res.stat(f"covZ{ij}[n={n_last}]")
    print(f"<Z>{ij}/(n kappa) = {s['estimate']:.3f}  target {s['target']}")
