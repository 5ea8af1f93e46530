"""toricflow: exact polytope-slice flows and numeric identity checks for
torus-invariant Lagrangians in toric almost Calabi-Yau geometry."""

from . import catalog, chart, errors, exactlp, flow, lattice, linalg, polytope, potentials, realform
from .flow import FlowProblem, FlowTimeline, snapshot, timeline
from .lattice import hnf, saturation_basis, special_condition
from .polytope import (
    CYVector,
    FaceDescriptor,
    Polytope,
    SlicePolyhedron,
    active_set,
    cy_vector,
    proper_faces,
    slice_polytope,
    slice_regularity,
    validate,
    zeta_regular,
)
from .realform import GluedComplex, TopologyReport, glue, topology, total_space

__version__ = "0.1.0"

__all__ = [
    "catalog", "chart", "errors", "exactlp", "flow", "lattice", "linalg",
    "polytope", "potentials", "realform",
    "FlowProblem", "FlowTimeline", "snapshot", "timeline",
    "hnf", "saturation_basis", "special_condition",
    "CYVector", "FaceDescriptor", "Polytope", "SlicePolyhedron",
    "active_set", "cy_vector", "proper_faces", "slice_polytope",
    "slice_regularity", "validate", "zeta_regular",
    "GluedComplex", "TopologyReport", "glue", "topology", "total_space",
    "__version__",
]
