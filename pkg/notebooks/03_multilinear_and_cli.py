# %% [markdown]
# # Multilinear estimates and running a manifest
#
# In the flat case the multilinear estimate reduces to the Loomis-Whitney
# inequality, which we check by brute force.  Then we measure how the
# multilinear constant grows with the spatial scale, and finish with a
# manifest run through the command-line entry point.

# %%
import tempfile
from pathlib import Path

import numpy as np

from restriction_lab.cli import main
from restriction_lab.probes import lw_ratio, make_config, run_probe

# %% [markdown]
# ## Loomis-Whitney on a 4 x 4 x 4 lattice

# %%
rng = np.random.default_rng(1)
ratios = [lw_ratio(list(rng.random((3, 4, 4)))) for _ in range(200)]
print("max ratio", max(ratios))
print("indicator faces", lw_ratio([np.ones((4, 4))] * 3))

# %% [markdown]
# ## Growth of the multilinear constant
# Three transverse patches in R^3.  Supports that break the margin condition
# are rejected and counted rather than silently used.  Curved patches are allowed
# a slope of 0.15 instead of 0.1.

# %%
for surface, tol in (("affine", 0.1), ("paraboloid", 0.15)):
    r = run_probe(make_config("mr_growth", surface=surface, scales=(16, 32, 64), trials=3,
                              slope_tol=tol))
    print(f"{surface:10s} slope {r.fit.exponent:+.3f}, rejected {r.rejected}, verdict {r.verdict}")

# %% [markdown]
# ## A manifest run
# The same probes can be described in YAML and run from the command line.  The
# exit code is 0 when every probe passes.

# %%
manifest = """
seed: 7
probes:
  - {id: lw, probe: loomis_whitney, trials: 100}
  - {id: partition, probe: lattice_partition, scales: [1, 2], options: {points: 2000}}
"""
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.yaml"
    path.write_text(manifest)
    code = main(["run", str(path), "--out", tmp])
    print("exit code", code)
    print((Path(tmp) / "demo.csv").read_text())
