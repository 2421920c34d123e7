"""Alternatives derived from word lattices: N-best lists, phrase
alternatives and binned word-level alternatives.

Lattice weights are negative log probabilities. Every arc carries its own
frame extent, which is the word alignment the phrase procedure relies on;
:func:`connect` plus the acyclicity check stand in for a separate word
alignment pass.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from .errors import LatticeError
from .formats import (EPSILON, Lattice, PhraseAlternative, PhraseAlternativesDoc,
                      PhrasePosition, topological_order)

DEFAULT_SILENCE = frozenset({"<sil>", EPSILON, "!SIL"})
DEFAULT_POSTERIOR_THRESHOLD = 0.01


def _neglog_add(a: float, b: float) -> float:
    """-log(exp(-a) + exp(-b))"""
    if a == math.inf:
        return b
    if b == math.inf:
        return a
    lo, hi = (a, b) if a < b else (b, a)
    return lo - math.log1p(math.exp(lo - hi))


def _out_arcs(lat):
    out = defaultdict(list)
    for i, a in enumerate(lat.arcs):
        out[a.src].append(i)
    return out


def _in_arcs(lat):
    inc = defaultdict(list)
    for i, a in enumerate(lat.arcs):
        inc[a.dst].append(i)
    return inc


def _accessible(lat):
    out = _out_arcs(lat)
    seen = {lat.start}
    stack = [lat.start]
    while stack:
        s = stack.pop()
        for i in out[s]:
            d = lat.arcs[i].dst
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return seen


def _coaccessible(lat):
    inc = _in_arcs(lat)
    seen = set(lat.finals)
    stack = list(lat.finals)
    while stack:
        s = stack.pop()
        for i in inc[s]:
            p = lat.arcs[i].src
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def is_connected(lat: Lattice) -> bool:
    keep = _accessible(lat) & _coaccessible(lat)
    return set(lat.states) == keep


def connect(lat: Lattice) -> Lattice:
    """Drop states that are not on some start-to-final path."""
    topological_order(lat)
    keep = _accessible(lat) & _coaccessible(lat)
    if lat.start not in keep:
        raise LatticeError("no final state is reachable from the start state")
    arcs = [a for a in lat.arcs if a.src in keep and a.dst in keep]
    finals = {s: w for s, w in lat.finals.items() if s in keep}
    return Lattice(arcs, lat.start, finals, lat.utterance_id, lat.recording_id, lat.channel, lat.offset)


def is_word(label: str, silence=DEFAULT_SILENCE) -> bool:
    return label not in silence


# ---------------------------------------------------------------------------
# forward-backward


def forward_backward(lat: Lattice):
    """Arc posteriors ``exp(-(alpha[src] + w + beta[dst] - total))``.

    Returns ``(posteriors, total)`` where ``posteriors[i]`` belongs to
    ``lat.arcs[i]`` and ``total`` is the negative log of the summed path
    probability mass.
    """
    order = topological_order(lat)
    if not is_connected(lat):
        raise LatticeError("lattice has states off every start-final path; run connect() first")
    out = _out_arcs(lat)
    alpha = {s: math.inf for s in order}
    alpha[lat.start] = 0.0
    for s in order:
        if alpha[s] == math.inf:
            continue
        for i in out[s]:
            a = lat.arcs[i]
            alpha[a.dst] = _neglog_add(alpha[a.dst], alpha[s] + a.weight)
    beta = {s: math.inf for s in order}
    for s in reversed(order):
        b = lat.finals.get(s, math.inf)
        for i in out[s]:
            a = lat.arcs[i]
            b = _neglog_add(b, a.weight + beta[a.dst])
        beta[s] = b
    total = beta[lat.start]
    post = [math.exp(-(alpha[a.src] + a.weight + beta[a.dst] - total)) for a in lat.arcs]
    return post, total


# ---------------------------------------------------------------------------
# N-best


@dataclass(frozen=True)
class NBestEntry:
    words: tuple
    weight: float
    times: Optional[tuple] = None


@dataclass
class NBestList:
    entries: list
    utterance_id: Optional[str] = None
    recording_id: Optional[str] = None
    channel: Optional[str] = None
    offset: float = 0.0
    start_frame: int = 0
    end_frame: int = 0

    def __len__(self):
        return len(self.entries)

    def sequences(self):
        return [e.words for e in self.entries]

    def truncated(self, n: Optional[int]):
        if n is None:
            return self
        return NBestList(self.entries[:n], self.utterance_id, self.recording_id, self.channel,
                         self.offset, self.start_frame, self.end_frame)

    def depths(self):
        return [len(self.entries)]

    def as_phrase_doc(self) -> PhraseAlternativesDoc:
        """The whole utterance as one position whose alternatives are the
        list entries."""
        pos = PhrasePosition(self.start_frame, self.end_frame,
                             [PhraseAlternative(e.words, e.weight, e.times) for e in self.entries])
        return PhraseAlternativesDoc([pos], self.utterance_id, self.recording_id, self.channel, self.offset)


def _kbest_sequences(lat: Lattice, n: Optional[int], silence, label_of=None):
    """Per-state top-n distinct word sequences over an acyclic lattice.

    Each state keeps its n best (weight, sequence, times) prefixes, distinct
    by sequence; any sequence pruned at a state is beaten by n distinct
    sequences sharing the same suffix, so pruning is exact.
    """
    order = topological_order(lat)
    inc = _in_arcs(lat)
    label_of = label_of or (lambda i, a: a.label)
    best = {}

    def prune(cands):
        seen = {}
        for w, seq, times in sorted(cands, key=lambda c: (c[0], c[1])):
            if seq not in seen:
                seen[seq] = (w, seq, times)
                if n is not None and len(seen) == n:
                    break
        return list(seen.values())

    for s in order:
        if s == lat.start:
            cands = [(0.0, (), ())]
        else:
            cands = []
        for i in inc[s]:
            a = lat.arcs[i]
            label = label_of(i, a)
            word = label not in silence
            for w, seq, times in best.get(a.src, ()):
                if word:
                    cands.append((w + a.weight, seq + (label,), times + ((a.start_frame, a.end_frame),)))
                else:
                    cands.append((w + a.weight, seq, times))
        best[s] = prune(cands)

    finals = []
    for s, fw in lat.finals.items():
        for w, seq, times in best.get(s, ()):
            finals.append((w + fw, seq, times))
    return prune(finals)


def nbest(lat: Lattice, n: Optional[int], silence=DEFAULT_SILENCE) -> NBestList:
    """The n lowest-weight distinct word sequences; ``n=None`` means all."""
    if n is not None and n <= 0:
        raise ValueError("n must be a positive integer")
    found = _kbest_sequences(lat, n, silence)
    entries = [NBestEntry(seq, w, times) for w, seq, times in found]
    start = min((a.start_frame for a in lat.arcs), default=0)
    return NBestList(entries, lat.utterance_id, lat.recording_id, lat.channel, lat.offset,
                     start, lat.num_frames)


# ---------------------------------------------------------------------------
# phrase alternatives


def detect_phrase_boundaries(lat: Lattice, post, threshold: float = DEFAULT_POSTERIOR_THRESHOLD,
                             silence=DEFAULT_SILENCE) -> list:
    """Frames not crossed by any non-silence arc with posterior >= threshold.

    Runs of such frames collapse to their midpoint, except the runs holding
    the lattice start or end, which collapse onto the start or end frame.
    """
    t0 = min((a.start_frame for a in lat.arcs), default=0)
    t1 = lat.num_frames
    if t1 <= t0:
        return [t0] if t0 == t1 else []
    blocked = [0] * (t1 - t0 + 2)
    for a, p in zip(lat.arcs, post):
        if a.label in silence or p < threshold:
            continue
        if a.end_frame - a.start_frame >= 2:
            blocked[a.start_frame + 1 - t0] += 1
            blocked[a.end_frame - t0] -= 1
    free = []
    depth = 0
    for k in range(t1 - t0 + 1):
        depth += blocked[k]
        free.append(depth == 0)
    bounds = []
    k = 0
    while k < len(free):
        if not free[k]:
            k += 1
            continue
        j = k
        while j + 1 < len(free) and free[j + 1]:
            j += 1
        a, b = k + t0, j + t0
        if a == t0:
            bounds.append(t0)
            if b == t1:
                bounds.append(t1)
        elif b == t1:
            bounds.append(t1)
        else:
            bounds.append((a + b) // 2)
        k = j + 1
    return bounds


def _phrase_index(mid: float, bounds) -> int:
    # b[i] <= mid < b[i+1]; the last phrase also takes mid == end
    last = len(bounds) - 2
    for i in range(last + 1):
        if mid < bounds[i + 1]:
            return i
    return last


def phrase_alternatives(lat: Lattice, boundaries, n: Optional[int],
                        silence=DEFAULT_SILENCE) -> PhraseAlternativesDoc:
    """Ranked word sequences per phrase interval.

    Every arc belongs to the phrase holding its time midpoint; for each phrase
    the labels of all other arcs are masked to epsilon and the n best
    distinct sequences of the masked lattice (minimum weight per sequence)
    become that position's alternatives. Positions whose only alternative is
    empty are dropped.
    """
    if n is not None and n <= 0:
        raise ValueError("n must be a positive integer")
    bounds = sorted(set(boundaries))
    doc = PhraseAlternativesDoc([], lat.utterance_id, lat.recording_id, lat.channel, lat.offset)
    if len(bounds) < 2:
        return doc
    owner = [_phrase_index(a.midpoint, bounds) for a in lat.arcs]
    for p in range(len(bounds) - 1):
        if not any(o == p and a.label not in silence for o, a in zip(owner, lat.arcs)):
            continue
        masked = lambda i, a, p=p: a.label if owner[i] == p else EPSILON
        found = _kbest_sequences(lat, n, silence, masked)
        alts = [PhraseAlternative(seq, w, times) for w, seq, times in found]
        if len(alts) == 1 and not alts[0].words:
            continue
        doc.positions.append(PhrasePosition(bounds[p], bounds[p + 1], alts))
    return doc


def lattice_to_phrases(lat: Lattice, n: Optional[int], threshold: float = DEFAULT_POSTERIOR_THRESHOLD,
                       silence=DEFAULT_SILENCE) -> PhraseAlternativesDoc:
    lat = connect(lat)
    post, _ = forward_backward(lat)
    bounds = detect_phrase_boundaries(lat, post, threshold, silence)
    return phrase_alternatives(lat, bounds, n, silence)


# ---------------------------------------------------------------------------
# word-level alternatives


class WordAltsDoc(PhraseAlternativesDoc):
    """Phrase-alternatives document whose alternatives hold at most one word."""

    def validate(self):
        super().validate()
        for p in self.positions:
            if any(len(a.words) > 1 for a in p.alternatives):
                raise ValueError("word-level positions hold single-word alternatives only")
        return self

    def truncated(self, n):
        t = super().truncated(n)
        return WordAltsDoc(t.positions, t.utterance_id, t.recording_id, t.channel, t.offset)


def _bin_of(span, bins) -> int:
    mid = (span[0] + span[1]) / 2.0
    best, best_d = 0, None
    for j, (s, e) in enumerate(bins):
        d = 0.0 if s <= mid <= e else min(abs(mid - s), abs(mid - e))
        if best_d is None or d < best_d:
            best, best_d = j, d
        if d == 0.0:
            break
    return best


def word_alternatives(doc: PhraseAlternativesDoc) -> WordAltsDoc:
    """Re-bin phrase alternatives into single-word positions.

    The rank-0 alternative fixes the number of word positions. Every other
    alternative places its words by time midpoint (or by index when timings
    are missing); extra words landing on an occupied position are dropped
    and unfilled positions receive the empty word. This cannot represent
    every lattice path, whatever the depth.
    """
    out = WordAltsDoc([], doc.utterance_id, doc.recording_id, doc.channel, doc.offset)
    for pos in doc.positions:
        head = pos.alternatives[0]
        width = len(head.words)
        if width == 0:
            width = 1 if any(a.words for a in pos.alternatives) else 0
        if width == 0:
            continue
        timed = all(a.times is not None for a in pos.alternatives) and head.words
        if timed:
            bins = list(head.times)
        else:
            step = (pos.end_frame - pos.start_frame) / width
            bins = [(round(pos.start_frame + j * step), round(pos.start_frame + (j + 1) * step))
                    for j in range(width)]
        columns = [dict() for _ in range(width)]  # word -> (score, order, span)
        for order, alt in enumerate(pos.alternatives):
            placed = [None] * width
            for k, w in enumerate(alt.words):
                j = _bin_of(alt.times[k], bins) if timed else k
                if j < width and placed[j] is None:
                    placed[j] = (w, alt.times[k] if alt.times else bins[j])
            for j in range(width):
                w, span = placed[j] if placed[j] is not None else ("", None)
                prev = columns[j].get(w)
                if prev is None or alt.score < prev[0]:
                    columns[j][w] = (alt.score, order if prev is None else prev[1], span)
        for j, col in enumerate(columns):
            ranked = sorted(col.items(), key=lambda kv: (kv[1][0], kv[1][1]))
            alts = []
            for w, (score, _, span) in ranked:
                if w:
                    alts.append(PhraseAlternative((w,), score, (span,) if timed else None))
                else:
                    alts.append(PhraseAlternative((), score, () if timed else None))
            if len(alts) == 1 and not alts[0].words:
                continue
            out.positions.append(PhrasePosition(bins[j][0], bins[j][1], alts))
    return out


# ---------------------------------------------------------------------------
# depth statistics


def nearest_rank(sorted_values, pct: float):
    k = max(1, math.ceil(pct / 100.0 * len(sorted_values)))
    return sorted_values[k - 1]


def unit_depths(docs) -> list:
    """Per-unit depths: one per N-best list, one per position otherwise."""
    if hasattr(docs, "depths"):
        docs = [docs]
    depths = []
    for d in docs:
        if isinstance(d, int):
            depths.append(d)
        else:
            depths.extend(d.depths())
    return depths


def depth_stats(docs):
    """``(N_max, N_90, N_50)`` with nearest-rank percentiles."""
    depths = sorted(unit_depths(docs))
    if not depths:
        raise ValueError("depth statistics need at least one unit")
    return depths[-1], nearest_rank(depths, 90), nearest_rank(depths, 50)
