"""Numerical laboratory for Fourier restriction and extension estimates."""

from . import dyadic, extension, packets, probes, spectral, surfaces
from .dyadic import (CubePair, DyadicCube, ParabolicCap, cap_mask, cap_project, cap_separation_test,
                     partition_interval, whitney_decompose, whitney_pairs)
from .extension import adjoint_defect, extend, rescale_defect, restrict
from .packets import (OrientedBox, dual_box, overlap_volume, packet_family, packet_transform,
                      synthesize)
from .probes import ProbeConfig, ProbeReport, make_config, probe_names, run_probe
from .spectral import (Grid, SampledField, SlopeFit, fit_slope, lp_norm, make_bump, make_grid,
                       make_majorant, reciprocal_grid, transform)
from .surfaces import (Density, Hypersurface, affine, gaussian_curvature, hemisphere, measure_ft,
                       midpoint_density, paraboloid, polynomial_curve, transversality)

__version__ = "0.1.0"
