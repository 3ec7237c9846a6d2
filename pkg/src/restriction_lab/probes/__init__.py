"""Numerical probes, one per estimate, each returning a :class:`ProbeReport`."""

from .base import (DEFAULTS, PROBES, Check, ProbeConfig, ProbeReport, make_config, probe_names,
                   run_probe, with_defaults)
from .bilinear import (bilinear_probe, reverse_square_probe, superposition_checks,
                       superposition_probe, transverse_packet_probe, whitney_assembly_check)
from .linear import hausdorff_young_probe, khintchine_probe, knapp_probe, stein_tomas_pieces
from .multilinear import (commutation_check, lattice_partition_check, loomis_whitney_check,
                          lw_ratio, mr_growth_probe, partition_window)

__all__ = [
    "Check", "ProbeConfig", "ProbeReport", "PROBES", "DEFAULTS", "make_config", "probe_names",
    "run_probe", "with_defaults",
    "hausdorff_young_probe", "khintchine_probe", "knapp_probe", "stein_tomas_pieces",
    "reverse_square_probe", "transverse_packet_probe", "bilinear_probe", "whitney_assembly_check",
    "superposition_checks", "superposition_probe",
    "loomis_whitney_check", "lattice_partition_check", "commutation_check", "mr_growth_probe",
    "lw_ratio", "partition_window",
]
