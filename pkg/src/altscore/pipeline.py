"""Corpus-level scoring: filter, segment, align, aggregate."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .align_core import SCTK_COSTS, AlignmentResult, CostModel, Metrics, aggregate, align
from .glm_filter import (AltNetwork, FilterPolicy, apply_glm_to_hypothesis, apply_glm_to_reference,
                         apply_policy, promote_expansions)
from .segmentation import PER_SEGMENT, SINGLE_SEGMENT, assign_hyp_to_segments, merge_stm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoreConfig:
    policy: FilterPolicy = field(default_factory=FilterPolicy)
    legacy_expansions: bool = False
    segmentation: str = PER_SEGMENT
    costs: CostModel = SCTK_COSTS
    slack: float = 10.0


@dataclass
class SegmentScore:
    recording_id: str
    channel: str
    start: float
    end: float
    result: AlignmentResult


@dataclass
class CorpusScore:
    segments: list

    @property
    def overall(self) -> Metrics:
        return aggregate([s.result for s in self.segments])

    def by_recording(self) -> dict:
        groups = {}
        for s in self.segments:
            groups.setdefault(s.recording_id, []).append(s.result)
        return {rec: aggregate(rs) for rec, rs in groups.items()}


def effective_rules(rules, config: ScoreConfig):
    return list(rules) if config.legacy_expansions else promote_expansions(rules)


def _align_job(args):
    ref, hyp, costs = args
    return align(ref, hyp, costs)


def prepare_reference(seg, rules, policy) -> AltNetwork:
    net = apply_glm_to_reference([seg], rules)[0]
    return apply_policy(net, policy, "reference")


def prepare_hypothesis(items, rules, policy) -> AltNetwork:
    return apply_policy(apply_glm_to_hypothesis(items, rules), policy, "hypothesis")


def score_corpus(segments, hyp_items, rules=(), config: ScoreConfig = ScoreConfig(),
                 jobs: int = 1) -> CorpusScore:
    """Score one system. Hypothesis items for recordings or channels missing
    from the reference are scored as insertions."""
    if config.segmentation == SINGLE_SEGMENT:
        segments = merge_stm(segments)
    elif config.segmentation != PER_SEGMENT:
        raise ValueError(f"unknown segmentation mode {config.segmentation!r}")
    rules = effective_rules(rules, config)
    assigned = assign_hyp_to_segments(hyp_items, segments, config.slack)

    jobs_args, meta = [], []
    for idx, seg in enumerate(segments):
        if seg.ignore:
            continue
        ref = prepare_reference(seg, rules, config.policy)
        hyp = prepare_hypothesis(assigned[idx], rules, config.policy)
        jobs_args.append((ref, hyp, config.costs))
        meta.append((seg.recording_id, seg.channel, seg.start, seg.end))
    orphans = {}
    for item in assigned.get(None, []):
        orphans.setdefault((item.recording_id, item.channel), []).append(item)
    for (rec, chan), items in orphans.items():
        hyp = prepare_hypothesis(items, rules, config.policy)
        jobs_args.append((AltNetwork(), hyp, config.costs))
        meta.append((rec, chan, 0.0, 0.0))

    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_align_job, jobs_args, chunksize=max(1, len(jobs_args) // (4 * jobs))))
    else:
        results = [_align_job(a) for a in jobs_args]
    return CorpusScore([SegmentScore(*m, r) for m, r in zip(meta, results)])


# Cumulative scoring ladder: each stage adds one change to the previous one.
STAGES = (
    ("baseline", "GLM expansions (baseline)"),
    ("alternations", "+ GLM with alternations"),
    ("exclude-hesitations", "+ Exclude hesitations"),
    ("optional-backchannels", "+ Optional backchannels"),
    ("exclude-backchannels", "+ Exclude backchannels"),
    ("single-segment", "+ Single-segment STM"),
)


def stage_configs(base: ScoreConfig = ScoreConfig()):
    """Yield ``(stage_id, label, config)`` for the six ladder stages.

    Word lists, costs and slack come from ``base``; the stage flags are set by
    the ladder itself.
    """
    policy = replace(base.policy, exclude_hyp_hesitations=False, backchannel_mode="score")
    cfg = replace(base, policy=policy, legacy_expansions=True, segmentation=PER_SEGMENT)
    steps = [
        lambda c: c,
        lambda c: replace(c, legacy_expansions=False),
        lambda c: replace(c, policy=replace(c.policy, exclude_hyp_hesitations=True)),
        lambda c: replace(c, policy=replace(c.policy, backchannel_mode="optional")),
        lambda c: replace(c, policy=replace(c.policy, backchannel_mode="exclude")),
        lambda c: replace(c, segmentation=SINGLE_SEGMENT),
    ]
    for (sid, label), step in zip(STAGES, steps):
        cfg = step(cfg)
        yield sid, label, cfg


def run_stages(segments, hyp_items, rules=(), base: ScoreConfig = ScoreConfig(), jobs: int = 1) -> list:
    return [(sid, label, score_corpus(segments, hyp_items, rules, cfg, jobs))
            for sid, label, cfg in stage_configs(base)]
