"""Laplace noise design and exact privacy auditing for contracting discrete-time systems.

Initial states (and parameters carried as states) are protected under
adjacency measured by a Riemannian distance; noise is calibrated from
output-incremental-boundedness certificates and audited exactly.
"""

from ._accel import BACKEND
from .audit import (
    BoxSet,
    PrivacyAuditReport,
    box_probability,
    composition_loss,
    privacy_loss,
    verify_dp_on_boxes,
    worst_pair_search,
)
from .contraction import (
    ContractionCertificate,
    GridVerificationReport,
    MetricCandidate,
    check_psd,
    estimate_oib_empirical,
    schur_psd_2block,
    theorem3_certificate,
    verify_oib_grid,
)
from .dynamics import SystemModel, Trajectory, output_deviation, simulate
from .geometry import ManifoldPoint, MetricField, PathCurve, distance, is_adjacent, path_length
from .mechanism import (
    EpsilonSchedule,
    LaplaceSampler,
    NoiseSchedule,
    consensus_noise,
    design_noise,
    design_noise_exponential,
    design_noise_theorem3,
    sample_laplace,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoxSet",
    "PrivacyAuditReport",
    "box_probability",
    "composition_loss",
    "privacy_loss",
    "verify_dp_on_boxes",
    "worst_pair_search",
    "ContractionCertificate",
    "GridVerificationReport",
    "MetricCandidate",
    "check_psd",
    "estimate_oib_empirical",
    "schur_psd_2block",
    "theorem3_certificate",
    "verify_oib_grid",
    "SystemModel",
    "Trajectory",
    "output_deviation",
    "simulate",
    "ManifoldPoint",
    "MetricField",
    "PathCurve",
    "distance",
    "is_adjacent",
    "path_length",
    "EpsilonSchedule",
    "LaplaceSampler",
    "NoiseSchedule",
    "consensus_noise",
    "design_noise",
    "design_noise_exponential",
    "design_noise_theorem3",
    "sample_laplace",
]
