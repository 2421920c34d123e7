"""Switchboard-style ASR scoring: GLM alternations, optional deletions,
alternative-aware alignment and oracle scoring of lattice alternatives."""

from .align_core import AlignmentResult, CostModel, Metrics, aggregate, align, compute_metrics
from .glm_filter import (AltNetwork, FilterPolicy, apply_glm_to_hypothesis, apply_glm_to_reference,
                         apply_policy, flatten_nested_alts, promote_expansions)
from .lattice_ops import (depth_stats, detect_phrase_boundaries, forward_backward, nbest,
                          phrase_alternatives, word_alternatives)
from .oracle import oracle_curve, oracle_score_nbest, oracle_score_network
from .segmentation import assign_hyp_to_segments, merge_stm

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult", "CostModel", "Metrics", "aggregate", "align", "compute_metrics",
    "AltNetwork", "FilterPolicy", "apply_glm_to_hypothesis", "apply_glm_to_reference",
    "apply_policy", "flatten_nested_alts", "promote_expansions",
    "depth_stats", "detect_phrase_boundaries", "forward_backward", "nbest",
    "phrase_alternatives", "word_alternatives",
    "oracle_curve", "oracle_score_nbest", "oracle_score_network",
    "assign_hyp_to_segments", "merge_stm",
]
