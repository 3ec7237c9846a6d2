# %% [markdown]
# # Decay of surface measure and the Knapp example
#
# The transform of surface measure on a curved hypersurface decays like
# `|x|^(-(n-1)/2)`, while a flat piece does not decay at all.  This decay rate is
# what drives the linear restriction theory.  We measure it on the parabola and on a
# line, then look at the Knapp example, which shows which exponent pairs can work.

# %%
import numpy as np

from restriction_lab.probes import make_config, run_probe
from restriction_lab.spectral import fit_slope
from restriction_lab.surfaces import affine, gaussian_curvature, hemisphere, measure_ft, paraboloid

# %% [markdown]
# ## Curvature
# Gaussian curvature at a critical point is the determinant of the Hessian.

# %%
for name, surf, xi in [("paraboloid", paraboloid(3), [0, 0]),
                       ("hemisphere", hemisphere(3), [0.3, -0.2]),
                       ("plane", affine([0.5, 0.1]), [0, 0])]:
    print(f"{name:11s} curvature {gaussian_curvature(surf, xi):.12f}")

# %% [markdown]
# ## Decay along the normal direction
# Evaluate the measure's transform at `(0, t)` for `t = 16 ... 1024` and fit a line
# in log-log coordinates.

# %%
ts = 2.0 ** np.arange(4, 11)
points = np.stack([0 * ts, ts], axis=1)
curved = np.abs(measure_ft(paraboloid(2), points))
flat = np.abs(measure_ft(affine([0.0]), points))
print("parabola slope", fit_slope(zip(ts, curved)).exponent)
print("line slope    ", fit_slope(zip(ts, flat)).exponent)

# %% [markdown]
# ## Knapp example
# A cap of width delta has an extension concentrated on a dual tube.  The ratio of
# norms then scales like a power of delta.  At `(p', q') = (4, 4)` the power is zero,
# and at `(4, 2)` it is `-1/4`, so the estimate would fail there.

# %%
for q in (4.0, 2.0):
    report = run_probe(make_config("knapp", params={"p_prime": 4.0, "q_prime": q}))
    print(f"q' = {q}: slope {report.fit.exponent:+.4f}, verdict {report.verdict}, "
          f"admissible {report.extras['admissible']}")

# %% [markdown]
# ## Stein-Tomas pieces
# Dyadic pieces of the measure: the kernel sup norm decays like `2^(-j/2)` on the
# parabola, and the transform sup grows at most like `2^j`.

# %%
report = run_probe(make_config("stein_tomas", scales=(2, 3, 4, 5)))
for check in report.checks:
    print(f"{check.name:17s} {check.value:+.4f} (target {check.target})")
