# %% [markdown]
# # Wave packets and bilinear estimates
#
# A function whose transform lives in a box B expands exactly in packets
# that sit on tiles dual to 2B.  Transverse tubes meet in a small set, which is
# where the gain in bilinear estimates comes from.

# %%
import math

import numpy as np

from restriction_lab.packets import (OrientedBox, overlap_volume, packet_family, packet_transform,
                                     rotation_2d)
from restriction_lab.probes import make_config, run_probe
from restriction_lab.spectral import SampledField, lp_norm, transform

# %% [markdown]
# ## Exact packet expansion
# Build a random field band-limited to B, expand it and put it back together.

# %%
B = OrientedBox.make([0.5, 0.25], None, [0.25, 0.125])
family = packet_family(B, [(0, 32), (0, 32)])
spec = transform(SampledField(family.grid, np.zeros(family.grid.shape)))
pts = np.stack([m.ravel() for m in spec.grid.mesh()], axis=-1)
inside = B.contains(pts).reshape(spec.grid.shape)
rng = np.random.default_rng(0)
field = transform(spec.with_values(rng.standard_normal(inside.shape) * inside), "inverse")
coeffs, defect = packet_transform(field, family)
print("tiles", family.count, "tile sides", family.tile.sides)
print("reconstruction defect", defect)
print("energy ratio", coeffs.energy() / float(lp_norm(field, 2)) ** 2)

# %% [markdown]
# ## Transverse tubes
# Two `16 x 256` tubes crossing at angle nu overlap in about `256 / sin(nu)`.

# %%
T1 = OrientedBox.make([0, 0], None, [8, 128])
for nu in (math.pi / 8, math.pi / 4, math.pi / 2):
    T2 = OrientedBox.make([0, 0], rotation_2d(nu), [8, 128])
    r = overlap_volume(T1, T2)
    print(f"nu = {nu:.3f}: volume {r.volume:8.2f}, predicted {256 / math.sin(nu):8.2f}")

# %% [markdown]
# ## Bilinear endpoint
# Separated arcs of the parabola: the bilinear L^4 constant stays bounded as the
# spatial radius grows.  A short sweep is enough to see the flat slope.

# %%
report = run_probe(make_config("bilinear", scales=(16, 32, 64), trials=2))
print("constants", [round(m, 4) for m in report.measured])
print("slope", report.fit.exponent, "alias check", report.extras["alias_defect"])

# %% [markdown]
# ## Reverse square function
# Splitting into delta-caps loses no power of delta.

# %%
report = run_probe(make_config("reverse_square", scales=(1 / 8, 1 / 16, 1 / 32), trials=3))
print("ratios", [round(m, 5) for m in report.measured], "slope", report.fit.exponent)
