"""Deterministic CPU DEM pipeline with a SIMT warp-divergence cost model."""

import warnings

# numba probes for a TBB runtime and complains when the system one is old;
# the OpenMP or workqueue layer is used instead, so the notice is noise.
warnings.filterwarnings("ignore", message="The TBB threading layer")

__version__ = "0.1.0"
