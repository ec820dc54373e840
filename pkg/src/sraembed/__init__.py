"""Bi-Lipschitz embeddings of SRA-free finite metric spaces into Euclidean space."""

from .audit import AuditReport, distortion_audit
from .errors import HypothesisError, MetricError, SraEmbedError
from .generators import GenSpec, generate
from .maps import PointMap
from .metric_core import FiniteMetricSpace, doubling_constant_estimate, load_space, validate_metric
from .pipeline import PipelineConstants, base_case_embed, embed, extend_embedding, theoretical_bounds
from .sra import SraParams, critical_radius, find_sra_subspace, sra_free_parameter

__all__ = [
    "AuditReport",
    "FiniteMetricSpace",
    "GenSpec",
    "HypothesisError",
    "MetricError",
    "PipelineConstants",
    "PointMap",
    "SraEmbedError",
    "SraParams",
    "base_case_embed",
    "critical_radius",
    "distortion_audit",
    "doubling_constant_estimate",
    "embed",
    "extend_embedding",
    "find_sra_subspace",
    "generate",
    "load_space",
    "sra_free_parameter",
    "theoretical_bounds",
    "validate_metric",
]
