"""Alternative-aware minimum-cost alignment and WER / precision / recall.

Both networks are compiled into acyclic word graphs (one chain per
alternative, an epsilon edge per empty alternative) and aligned by a shortest
path over their product graph. Path weights are compared lexicographically:

1. primary edit cost ``sub*S + ins*I + del*D``;
2. the sum of chosen alternative ranks, so as-written forms win ties;
3. the number of errors, so equal-cost paths report the fewest errors.

Counts come from the chosen path, never from the cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .errors import NestedAlternativeError
from .glm_filter import AltNetwork


@dataclass(frozen=True)
class CostModel:
    sub: float = 4
    ins: float = 3
    dele: float = 3
    correct: float = 0

    @classmethod
    def parse(cls, text: str) -> "CostModel":
        """Parse ``sub,ins,del``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("costs must be given as sub,ins,del")
        sub, ins, dele = (float(p) for p in parts)
        if min(sub, ins, dele) < 0:
            raise ValueError("edit costs must be non-negative")
        return cls(sub, ins, dele)

    def __str__(self):
        return f"{self.sub:g},{self.ins:g},{self.dele:g}"


SCTK_COSTS = CostModel()


@dataclass
class AlignmentResult:
    correct: int = 0
    substituted: int = 0
    deleted: int = 0
    inserted: int = 0
    cost: float = 0.0
    rank_cost: int = 0
    # (ref word or None, hyp word or None, verdict in C/S/D/I)
    pairs: list = field(default_factory=list)
    ref_choices: list = field(default_factory=list)
    hyp_choices: list = field(default_factory=list)

    @property
    def ref_length(self):
        return self.correct + self.deleted + self.substituted

    @property
    def hyp_length(self):
        return self.correct + self.inserted + self.substituted

    @property
    def errors(self):
        return self.substituted + self.deleted + self.inserted


@dataclass(frozen=True)
class Metrics:
    wer: float
    precision: float
    recall: float
    correct: int = 0
    substituted: int = 0
    deleted: int = 0
    inserted: int = 0

    @property
    def ref_length(self):
        return self.correct + self.deleted + self.substituted

    @property
    def errors(self):
        return self.substituted + self.deleted + self.inserted


def metrics_from_counts(c: int, s: int, d: int, i: int) -> Metrics:
    ref_len = c + d + s
    hyp_len = c + i + s
    if ref_len > 0:
        wer = 100.0 * (i + d + s) / ref_len
        recall = c / ref_len
    else:
        # no reference words: any insertion is an unbounded error rate
        wer = 0.0 if i == 0 else math.inf
        recall = 1.0
    precision = c / hyp_len if hyp_len > 0 else 1.0
    return Metrics(wer, precision, recall, c, s, d, i)


def compute_metrics(result: AlignmentResult) -> Metrics:
    return metrics_from_counts(result.correct, result.substituted, result.deleted, result.inserted)


def aggregate(results: Iterable) -> Metrics:
    """Micro-average: counts are summed before the ratios are taken."""
    results = list(results)
    if not results:
        raise ValueError("cannot aggregate an empty list of results")
    c = sum(r.correct for r in results)
    s = sum(r.substituted for r in results)
    d = sum(r.deleted for r in results)
    i = sum(r.inserted for r in results)
    return metrics_from_counts(c, s, d, i)


# ---------------------------------------------------------------------------
# graph compilation


class _Edge:
    __slots__ = ("src", "word", "rank_cost", "slot", "rank", "first")

    def __init__(self, src, word, rank_cost, slot, rank, first):
        self.src = src
        self.word = word
        self.rank_cost = rank_cost
        self.slot = slot
        self.rank = rank
        self.first = first


def _compile(net: AltNetwork):
    """Return in-edge lists indexed by node; node ids are topologically sorted."""
    if not net.is_flat():
        raise NestedAlternativeError(
            "network holds nested alternatives; run flatten_nested_alts before aligning")
    in_edges = [[]]
    boundary = 0
    for si, slot in enumerate(net.slots):
        inner = sum(max(len(a.items) - 1, 0) for a in slot.alternatives)
        end = boundary + inner + 1
        in_edges.extend([] for _ in range(inner + 1))
        nxt = boundary + 1
        for alt in slot.alternatives:
            words = alt.items
            if not words:
                in_edges[end].append(_Edge(boundary, None, alt.rank, si, alt.rank, True))
                continue
            prev = boundary
            for k, w in enumerate(words):
                if k == len(words) - 1:
                    dst = end
                else:
                    dst = nxt
                    nxt += 1
                in_edges[dst].append(_Edge(prev, w, alt.rank if k == 0 else 0, si, alt.rank, k == 0))
                prev = dst
        boundary = end
    return in_edges


# ---------------------------------------------------------------------------
# alignment

_C, _S, _D, _I, _REPS, _HEPS = range(6)


def align(ref: AltNetwork, hyp: AltNetwork, costs: CostModel = SCTK_COSTS) -> AlignmentResult:
    ref_in = _compile(ref)
    hyp_in = _compile(hyp)
    R, H = len(ref_in), len(hyp_in)
    sub, ins, dele, cor = costs.sub, costs.ins, costs.dele, costs.correct
    cost = [[None] * H for _ in range(R)]
    back = [[None] * H for _ in range(R)]
    cost[0][0] = (0, 0, 0)

    for r in range(R):
        rin = ref_in[r]
        crow = cost[r]
        brow = back[r]
        for h in range(H):
            if r == 0 and h == 0:
                continue
            hin = hyp_in[h]
            best = None
            bp = None
            # diagonal moves first, then deletions, then insertions
            for e in rin:
                if e.word is None:
                    continue
                prow = cost[e.src]
                for f in hin:
                    if f.word is None:
                        continue
                    p = prow[f.src]
                    if e.word.text == f.word.text:
                        cand = (p[0] + cor, p[1] + e.rank_cost + f.rank_cost, p[2])
                        kind = _C
                    else:
                        cand = (p[0] + sub, p[1] + e.rank_cost + f.rank_cost, p[2] + 1)
                        kind = _S
                    if best is None or cand < best:
                        best, bp = cand, (kind, e, f)
            for e in rin:
                p = cost[e.src][h]
                if e.word is None:
                    cand = (p[0], p[1] + e.rank_cost, p[2])
                    kind = _REPS
                else:
                    cand = (p[0] + dele, p[1] + e.rank_cost, p[2] + 1)
                    kind = _D
                if best is None or cand < best:
                    best, bp = cand, (kind, e, None)
            for f in hin:
                p = crow[f.src]
                if f.word is None:
                    cand = (p[0], p[1] + f.rank_cost, p[2])
                    kind = _HEPS
                else:
                    cand = (p[0] + ins, p[1] + f.rank_cost, p[2] + 1)
                    kind = _I
                if best is None or cand < best:
                    best, bp = cand, (kind, None, f)
            crow[h] = best
            brow[h] = bp

    res = AlignmentResult()
    res.ref_choices = [None] * len(ref.slots)
    res.hyp_choices = [None] * len(hyp.slots)
    final = cost[R - 1][H - 1]
    res.cost, res.rank_cost = final[0], final[1]
    r, h = R - 1, H - 1
    pairs = []
    while (r, h) != (0, 0):
        kind, e, f = back[r][h]
        if e is not None and e.first:
            res.ref_choices[e.slot] = e.rank
        if f is not None and f.first:
            res.hyp_choices[f.slot] = f.rank
        if kind == _C:
            res.correct += 1
            pairs.append((e.word, f.word, "C"))
        elif kind == _S:
            res.substituted += 1
            pairs.append((e.word, f.word, "S"))
        elif kind == _D:
            res.deleted += 1
            pairs.append((e.word, None, "D"))
        elif kind == _I:
            res.inserted += 1
            pairs.append((None, f.word, "I"))
        if e is not None:
            r = e.src
        if f is not None:
            h = f.src
    pairs.reverse()
    res.pairs = pairs
    return res


def format_alignment(result: AlignmentResult) -> str:
    """Three-line REF/HYP/Eval rendering in the style of sclite .pra files."""
    ref_row, hyp_row, eval_row = ["REF:"], ["HYP:"], ["Eval:"]
    for rw, hw, v in result.pairs:
        r = rw.text if rw is not None else "*" * len(hw.text)
        h = hw.text if hw is not None else "*" * len(rw.text)
        if v == "C":
            r, h = r.lower(), h.lower()
        width = max(len(r), len(h))
        ref_row.append(r.ljust(width))
        hyp_row.append(h.ljust(width))
        eval_row.append(("" if v == "C" else v).ljust(width))
    pad = max(len(x[0]) for x in (ref_row, hyp_row, eval_row))
    rows = []
    for row in (ref_row, hyp_row, eval_row):
        rows.append(" ".join([row[0].ljust(pad)] + row[1:]).rstrip())
    return "\n".join(rows)
