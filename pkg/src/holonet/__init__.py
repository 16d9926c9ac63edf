"""Hölder retractions onto flat convex sets and a rotund renorming whose nearest point map diverges."""
from holonet._core import BACKEND
from holonet.flat_sets import FlatnessProfile, FlatSetDescriptor, project_onto
from holonet.gauge import NormFamilyParams, gauge_n, norm_fine_n, norm_union
from holonet.nearest_point import SegmentK, divergence_experiment, npm
from holonet.nets import build_net
from holonet.retraction import empirical_modulus, holder_fit, retract
from holonet.whitney import partition_at

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FlatnessProfile",
    "FlatSetDescriptor",
    "NormFamilyParams",
    "SegmentK",
    "build_net",
    "divergence_experiment",
    "empirical_modulus",
    "gauge_n",
    "holder_fit",
    "norm_fine_n",
    "norm_union",
    "npm",
    "partition_at",
    "project_onto",
    "retract",
]
