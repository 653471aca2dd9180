"""Bulk and edge topology of magnetically perturbed honeycomb Schroedinger operators."""

from .bloch import (
    BandSurface,
    BlochOperator,
    PlaneWaveBasis,
    assemble,
    band_surface,
    bloch_eigen,
    estimate_delta_sharp,
    gap_scan,
    min_gap,
)
from .dirac1d import DiracFamilyConfig, dirac_branches, dirac_flow, edge_vs_effective
from .dirac_point import DiracPointData, cone_fit, dirac_gap, extract, w_matrix_elements
from .edge import DomainWall, EdgeOperatorConfig, EdgeSpectrum, edge_branches, spectral_flow
from .errors import *  # noqa: F403
from .fields import FourierField, canonical_potential, canonical_vector_potential, evaluate, symmetrize
from .lattice import EdgeFrame, LatticeGeometry, build_honeycomb_lattice, edge_frame, reduce_to_torus
from .topology import (
    CurvatureGrid,
    TwoBandModel,
    chern_curvature_integral,
    chern_link_variable,
    curvature_trace,
    twoband_disk_integral,
)

__version__ = "0.1.0"
