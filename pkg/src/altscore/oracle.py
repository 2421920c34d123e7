"""Oracle scoring over N-best, word-level and phrase-level alternatives."""

from __future__ import annotations

import gzip
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .align_core import SCTK_COSTS, AlignmentResult, CostModel, Metrics, aggregate, align
from .formats import PhraseAlternative, PhraseAlternativesDoc, PhrasePosition, write_ctm_with_alts
from .glm_filter import Alternative, AltNetwork, Slot, Word
from .lattice_ops import NBestList, depth_stats, unit_depths


def alternatives_network(doc, frame_rate: float = 0.01) -> AltNetwork:
    """One slot per position, alternatives in rank order."""
    doc = doc.as_phrase_doc()
    slots = []
    for pos in doc.positions:
        alts = []
        for rank, a in enumerate(pos.alternatives):
            if a.times is not None:
                words = tuple(Word(w, False, doc.offset + s * frame_rate, (e - s) * frame_rate)
                              for w, (s, e) in zip(a.words, a.times))
            else:
                words = tuple(Word(w) for w in a.words)
            alts.append(Alternative(words, rank))
        slots.append(Slot(tuple(alts)))
    return AltNetwork(slots)


def concat_docs(docs, frame_rate: float = 0.01, recording_id=None, channel=None) -> PhraseAlternativesDoc:
    """Join the documents of consecutive utterances into one, re-expressing
    frames relative to the earliest utterance offset."""
    docs = sorted((d.as_phrase_doc() for d in docs), key=lambda d: d.offset)
    if not docs:
        return PhraseAlternativesDoc([], None, recording_id, channel, 0.0)
    if len(docs) == 1 and recording_id in (None, docs[0].recording_id):
        return docs[0]
    base = docs[0].offset
    positions = []
    for d in docs:
        shift = round((d.offset - base) / frame_rate)
        for p in d.positions:
            alts = [PhraseAlternative(a.words, a.score,
                                      None if a.times is None else tuple((s + shift, e + shift) for s, e in a.times))
                    for a in p.alternatives]
            positions.append(PhrasePosition(p.start_frame + shift, p.end_frame + shift, alts))
    return PhraseAlternativesDoc(positions, docs[0].utterance_id, recording_id or docs[0].recording_id,
                                 channel or docs[0].channel, base)


def oracle_score_nbest(ref: AltNetwork, nbest: NBestList, costs: CostModel = SCTK_COSTS) -> AlignmentResult:
    """Best list member by (edit cost, rank); acoustic scores are ignored."""
    if not nbest.entries:
        raise ValueError("oracle over an empty N-best list")
    best, best_key = None, None
    for rank, entry in enumerate(nbest.entries):
        res = align(ref, AltNetwork.from_words(entry.words), costs)
        key = (res.cost, rank + res.rank_cost, res.errors)
        if best is None or key < best_key:
            best, best_key = res, key
            best.hyp_choices = [rank]
            best.rank_cost = key[1]
    return best


def oracle_score_network(ref: AltNetwork, hyp: AltNetwork, costs: CostModel = SCTK_COSTS) -> AlignmentResult:
    # the min-cost path through the alternatives network is the oracle choice
    return align(ref, hyp, costs)


@dataclass(frozen=True)
class CurveRow:
    n: Optional[int]  # None stands for unlimited depth
    wer: float
    n_max: int
    n_90: int
    n_50: int
    size_bytes: int
    metrics: Metrics

    @property
    def n_label(self):
        return "inf" if self.n is None else str(self.n)


def compressed_size(text: str) -> int:
    return len(gzip.compress(text.encode("utf-8"), mtime=0))


def oracle_curve(ref, docs, n_values: Sequence[Optional[int]], costs: CostModel = SCTK_COSTS,
                 hyp_builder: Optional[Callable] = None, frame_rate: float = 0.01) -> list:
    """One row per n: oracle WER after truncating every unit to its top n,
    depth statistics of what was actually returned, and the gzip size of the
    alternatives CTM.

    ``ref`` and ``docs`` may be a single network/document or parallel lists
    (one reference network per document).
    """
    if isinstance(ref, AltNetwork):
        ref, docs = [ref], [docs]
    if len(ref) != len(docs):
        raise ValueError("need one reference network per alternatives document")
    build = hyp_builder or (lambda d: alternatives_network(d, frame_rate))
    rows = []
    for n in n_values:
        cut = [d.truncated(n) for d in docs]
        results = [align(r, build(d), costs) for r, d in zip(ref, cut)]
        m = aggregate(results)
        depths = unit_depths(cut)
        stats = depth_stats(depths) if depths else (0, 0, 0)
        text = "".join(write_ctm_with_alts(d, frame_rate) for d in cut if d.as_phrase_doc().positions)
        rows.append(CurveRow(n, m.wer, *stats, compressed_size(text), m))
    return rows
