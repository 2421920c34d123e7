"""Single-segment STM conversion and time-based assignment of hypothesis
tokens to reference segments."""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Iterable, Optional

from .formats import CtmAltBlock, StmSegment

log = logging.getLogger(__name__)

PER_SEGMENT = "per_segment"
SINGLE_SEGMENT = "single_segment"
SEGMENTATION_MODES = (PER_SEGMENT, SINGLE_SEGMENT)


def merge_stm(segments: Iterable[StmSegment]) -> list:
    """Collapse every (recording, channel) group into one long segment.

    Words are concatenated in start-time order (file order breaks ties), the
    span covers all merged segments and speakers sharing the channel are
    merged. Ignore segments contribute time but no words.
    """
    groups = defaultdict(list)
    order = []
    for idx, seg in enumerate(segments):
        if seg.key not in groups:
            order.append(seg.key)
        groups[seg.key].append((seg.start, idx, seg))
    merged = []
    for key in order:
        members = [s for _, _, s in sorted(groups[key], key=lambda t: (t[0], t[1]))]
        if len(members) == 1:
            merged.append(members[0])
            continue
        for a, b in zip(members, members[1:]):
            if b.start < a.end:
                log.warning("overlapping segments in %s channel %s at %.2f-%.2f; merged in start order",
                            key[0], key[1], b.start, a.end)
        speakers = []
        for s in members:
            if s.speaker_id not in speakers:
                speakers.append(s.speaker_id)
        words = [w for s in members if not s.ignore for w in s.words]
        merged.append(StmSegment(
            key[0], key[1], speakers[0] if len(speakers) == 1 else "+".join(speakers),
            min(s.start for s in members), max(s.end for s in members), words,
            members[0].label_tags, all(s.ignore for s in members)))
    return merged


def item_midpoint(item) -> Optional[float]:
    if isinstance(item, CtmAltBlock):
        tok = item.first_token()
        return tok.midpoint if tok is not None else None
    return item.midpoint


def _item_key(item):
    return (item.recording_id, item.channel)


def assign_hyp_to_segments(tokens: Iterable, segments: list, slack: float = 10.0) -> dict:
    """Map segment index -> hypothesis items by token midpoint.

    A midpoint inside a segment (boundaries inclusive) goes to the earliest
    such segment; in a gap it goes to the nearer boundary, ties to the earlier
    segment. Items whose recording/channel has no segment are returned under
    the key ``None`` so that no token is lost.
    """
    by_key = defaultdict(list)
    for idx, seg in enumerate(segments):
        by_key[seg.key].append(idx)
    for idxs in by_key.values():
        idxs.sort(key=lambda i: (segments[i].start, i))

    out = {i: [] for i in range(len(segments))}
    unassigned = []
    last_mid = {}
    for item in tokens:
        key = _item_key(item)
        idxs = by_key.get(key)
        if not idxs:
            unassigned.append(item)
            continue
        mid = item_midpoint(item)
        if mid is None:
            # empty ALT block: keep it with whatever came before it
            mid = last_mid.get(key, segments[idxs[0]].start)
        last_mid[key] = mid
        best, best_dist = None, None
        for i in idxs:
            seg = segments[i]
            if seg.start <= mid <= seg.end:
                dist = 0.0
            else:
                dist = seg.start - mid if mid < seg.start else mid - seg.end
            if best is None or dist < best_dist:
                best, best_dist = i, dist
            if dist == 0.0:
                break
        if best_dist > slack:
            log.warning("token at %.2fs in %s channel %s is %.2fs from any segment; assigned to nearest",
                        mid, key[0], key[1], best_dist)
        out[best].append(item)
    if unassigned:
        log.warning("%d hypothesis items belong to recordings/channels absent from the reference",
                    len(unassigned))
        out[None] = unassigned
    return out
