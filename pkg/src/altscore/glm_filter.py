"""GLM normalization of reference and hypothesis streams into AltNetworks.

An :class:`AltNetwork` is a sequence of slots; every slot offers ranked
alternative word sequences, possibly empty. Rank 0 is the as-written form
and wins ties during alignment.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .formats import ALTERNATION, CtmAltBlock, CtmToken, GlmRule, StmSegment

log = logging.getLogger(__name__)

DEFAULT_HESITATIONS = frozenset({
    "%HESITATION", "UH", "UM", "EH", "MM", "HM", "AH", "HUH", "HA", "ER",
    "OOF", "HEE", "ACH", "EEE", "EW",
})
DEFAULT_BACKCHANNELS = frozenset({"UH-HUH", "UM-HUM", "MM-HMM", "MHM", "YEAH-HUH"})

BACKCHANNEL_MODES = ("score", "optional", "exclude")


@dataclass(frozen=True)
class Word:
    text: str
    optional: bool = False
    start: Optional[float] = field(default=None, compare=False)
    duration: Optional[float] = field(default=None, compare=False)

    def __str__(self):
        return f"({self.text})" if self.optional else self.text


@dataclass(frozen=True)
class Alternative:
    items: tuple  # Word, or a nested Slot before flattening
    rank: int = 0

    @property
    def is_flat(self):
        return all(isinstance(x, Word) for x in self.items)

    @property
    def words(self):
        if not self.is_flat:
            raise ValueError("alternative still holds nested alternatives")
        return self.items

    def texts(self):
        return tuple(w.text for w in self.words)

    def __str__(self):
        return " ".join(str(x) for x in self.items) if self.items else "@"


@dataclass(frozen=True)
class Slot:
    alternatives: tuple

    def __post_init__(self):
        if not self.alternatives:
            raise ValueError("a slot needs at least one alternative")

    @property
    def is_flat(self):
        return all(a.is_flat for a in self.alternatives)

    def has_empty(self):
        return any(not a.items for a in self.alternatives)

    def __str__(self):
        if len(self.alternatives) == 1:
            return str(self.alternatives[0])
        return "{ " + " / ".join(str(a) for a in self.alternatives) + " }"


@dataclass
class AltNetwork:
    slots: list = field(default_factory=list)

    @classmethod
    def build(cls, layout: Iterable[Sequence[Union[str, Sequence[str]]]]):
        """Build a flat network from ``[[alt0, alt1, ...], ...]`` where each
        alternative is a word list or a space separated string."""
        slots = []
        for alts in layout:
            built = []
            for rank, alt in enumerate(alts):
                words = alt.split() if isinstance(alt, str) else list(alt)
                built.append(Alternative(tuple(Word(w.upper()) for w in words), rank))
            slots.append(Slot(tuple(built)))
        return cls(slots)

    @classmethod
    def from_words(cls, words: Iterable[str]):
        return cls([Slot((Alternative((Word(w.upper()),), 0),)) for w in words])

    def is_flat(self):
        return all(s.is_flat for s in self.slots)

    def expansion_count(self):
        n = 1
        for s in self.slots:
            n *= len(s.alternatives)
        return n

    def __len__(self):
        return len(self.slots)

    def __str__(self):
        return " ".join(str(s) for s in self.slots)


@dataclass(frozen=True)
class FilterPolicy:
    hesitation_words: frozenset = DEFAULT_HESITATIONS
    backchannel_words: frozenset = DEFAULT_BACKCHANNELS
    exclude_hyp_hesitations: bool = False
    backchannel_mode: str = "score"

    def __post_init__(self):
        if self.backchannel_mode not in BACKCHANNEL_MODES:
            raise ValueError(f"backchannel_mode must be one of {BACKCHANNEL_MODES}")
        object.__setattr__(self, "hesitation_words", frozenset(w.upper() for w in self.hesitation_words))
        object.__setattr__(self, "backchannel_words", frozenset(w.upper() for w in self.backchannel_words))

    def category(self, word: str) -> Optional[str]:
        if word in self.hesitation_words:
            return "hesitation"
        if word in self.backchannel_words:
            return "backchannel"
        return None


def load_word_list(path) -> frozenset:
    with open(path) as f:
        return frozenset(w.upper() for line in f for w in line.split(";;")[0].split())


# ---------------------------------------------------------------------------
# rules


def promote_expansions(rules: Iterable[GlmRule]) -> list:
    """Turn every expansion ``LHS => RHS`` into ``LHS => { LHS / RHS }``."""
    out = []
    for r in rules:
        if r.kind == ALTERNATION:
            out.append(r)
        elif r.rhs[0] == r.lhs:
            out.append(r)
        else:
            out.append(GlmRule(r.lhs, (r.lhs, r.rhs[0]), ALTERNATION, r.annotation))
    return out


class _RuleTable:
    def __init__(self, rules):
        self.table = {}
        for r in rules:
            self.table.setdefault(r.lhs, r)  # file order wins among equal lhs
        self.maxlen = max((len(k) for k in self.table), default=0)

    def rewrite(self, words: Sequence[Word]) -> list:
        """Single left-to-right pass, longest lhs first, no re-application."""
        slots = []
        i, n = 0, len(words)
        while i < n:
            rule = None
            for length in range(min(self.maxlen, n - i), 0, -1):
                span = words[i:i + length]
                cand = self.table.get(tuple(w.text for w in span))
                if cand is not None and len({w.optional for w in span}) == 1:
                    rule = cand
                    break
            if rule is None:
                w = words[i]
                alts = [Alternative((w,), 0)]
                if w.optional:
                    alts.append(Alternative((), 1))
                slots.append(Slot(tuple(alts)))
                i += 1
            else:
                slots.append(_rule_slot(rule, span))
                i += len(span)
        return slots


def _spread_times(span, phrase, optional):
    starts = [w.start for w in span]
    if any(s is None for s in starts):
        return tuple(Word(t, optional) for t in phrase)
    t0 = span[0].start
    t1 = span[-1].start + (span[-1].duration or 0.0)
    step = (t1 - t0) / len(phrase) if phrase else 0.0
    return tuple(Word(t, optional, t0 + k * step, step) for k, t in enumerate(phrase))


def _rule_slot(rule: GlmRule, span: Sequence[Word]) -> Slot:
    optional = span[0].optional
    alts = []
    for rank, phrase in enumerate(rule.rhs):
        if phrase == tuple(w.text for w in span):
            words = tuple(span)
        else:
            words = _spread_times(span, phrase, optional)
        alts.append(Alternative(words, rank))
    if optional and not any(not a.items for a in alts):
        alts.append(Alternative((), len(alts)))
    return Slot(tuple(alts))


def apply_glm_to_reference(segments: Iterable[StmSegment], rules: Iterable[GlmRule]) -> list:
    table = _RuleTable(rules)
    nets = []
    for seg in segments:
        words = [Word(w.surface, w.optional_deletion) for w in seg.words]
        nets.append(AltNetwork(table.rewrite(words)))
    return nets


def _token_word(tok: CtmToken) -> Word:
    return Word(tok.surface, False, tok.start, tok.duration)


def apply_glm_to_hypothesis(stream: Iterable[Union[CtmToken, CtmAltBlock]],
                            rules: Iterable[GlmRule]) -> AltNetwork:
    table = _RuleTable(rules)
    slots = []
    run = []
    for item in stream:
        if isinstance(item, CtmAltBlock):
            slots.extend(table.rewrite(run))
            run = []
            alts = []
            for rank, tokens in enumerate(item.alternatives):
                inner = table.rewrite([_token_word(t) for t in tokens])
                parts = []
                for s in inner:
                    if len(s.alternatives) == 1:
                        parts.extend(s.alternatives[0].items)
                    else:
                        parts.append(s)
                alts.append(Alternative(tuple(parts), rank))
            slots.append(Slot(tuple(alts)))
        else:
            run.append(_token_word(item))
    slots.extend(table.rewrite(run))
    return flatten_nested_alts(AltNetwork(slots))


# ---------------------------------------------------------------------------
# flattening and policy


def _expand(items) -> list:
    options = []
    for x in items:
        if isinstance(x, Word):
            options.append([(x,)])
        else:
            options.append([seq for a in x.alternatives for seq in _expand(a.items)])
    return [tuple(w for part in combo for w in part) for combo in itertools.product(*options)]


def _dedup(sequences) -> tuple:
    seen = set()
    alts = []
    for seq in sequences:
        key = tuple(w.text for w in seq)
        if key in seen:
            continue
        seen.add(key)
        alts.append(Alternative(tuple(seq), len(alts)))
    return tuple(alts)


def flatten_nested_alts(network: AltNetwork) -> AltNetwork:
    """Expand nested alternatives into a single level per slot.

    Expansion order follows rank order at every nesting level; duplicates keep
    their first (lowest) rank and ranks are renumbered densely.
    """
    slots = []
    for slot in network.slots:
        seqs = [seq for a in slot.alternatives for seq in _expand(a.items)]
        slots.append(Slot(_dedup(seqs)))
    return AltNetwork(slots)


def apply_policy(network: AltNetwork, policy: FilterPolicy, side: str) -> AltNetwork:
    if side not in ("reference", "hypothesis"):
        raise ValueError("side must be 'reference' or 'hypothesis'")
    if not network.is_flat():
        network = flatten_nested_alts(network)
    slots = []
    if side == "hypothesis":
        drop = set()
        if policy.exclude_hyp_hesitations:
            drop |= policy.hesitation_words
        if policy.backchannel_mode == "exclude":
            drop |= policy.backchannel_words - policy.hesitation_words
        for slot in network.slots:
            if not drop:
                slots.append(slot)
                continue
            kept = [tuple(w for w in a.words if w.text not in drop) for a in slot.alternatives]
            if not any(kept):
                continue
            slots.append(Slot(_dedup(kept)))
        return AltNetwork(slots)

    skippable = {"hesitation"}
    if policy.backchannel_mode in ("optional", "exclude"):
        skippable.add("backchannel")
    for slot in network.slots:
        first = slot.alternatives[0].words
        cats = {policy.category(w.text) for w in first}
        if first and len(cats) == 1 and cats <= skippable:
            alts = [Alternative(tuple(replace(w, optional=True) for w in first), 0)]
            alts.extend(slot.alternatives[1:])
            if not slot.has_empty():
                alts.append(Alternative((), len(alts)))
            slot = Slot(tuple(alts))
        slots.append(slot)
    return AltNetwork(slots)
