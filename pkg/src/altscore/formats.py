"""Readers and writers for STM, CTM (with ALT blocks), GLM, lattice and
phrase-alternatives text files.

All formats are line oriented and space delimited; ``;;`` starts a comment.
Word surfaces are uppercased on ingest so that every later comparison is
case-insensitive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import FormatError, LatticeError

IGNORE_SEGMENT = "IGNORE_TIME_SEGMENT_IN_SCORING"
ALT_BEGIN = "<ALT_BEGIN>"
ALT_MID = "<ALT>"
ALT_END = "<ALT_END>"
EPSILON = "<eps>"
NULL_WORD = "@"

EXPANSION = "expansion"
ALTERNATION = "alternation"


# ---------------------------------------------------------------------------
# number formatting


def fmt_seconds(x: float) -> str:
    """Seconds with at least two decimals and no float noise: 4.49, 12.345."""
    s = f"{x:.6f}".rstrip("0")
    whole, _, frac = s.partition(".")
    if len(frac) < 2:
        frac = frac.ljust(2, "0")
    if whole == "-0":
        whole = "0"
    return f"{whole}.{frac}"


def fmt_weight(x: float) -> str:
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _strip_comment(line: str) -> str:
    pos = line.find(";;")
    if pos >= 0:
        line = line[:pos]
    return line.strip()


def _norm_word(w: str) -> str:
    # markers such as <eps> or <sil> keep their case
    if w.startswith("<"):
        return w
    return w.upper()


# ---------------------------------------------------------------------------
# STM


@dataclass(frozen=True)
class RefWord:
    surface: str
    optional_deletion: bool = False

    def __str__(self):
        return f"({self.surface})" if self.optional_deletion else self.surface


@dataclass
class StmSegment:
    recording_id: str
    channel: str
    speaker_id: str
    start: float
    end: float
    words: list = field(default_factory=list)
    label_tags: Optional[str] = None
    ignore: bool = False

    @property
    def key(self):
        return (self.recording_id, self.channel)

    def text(self) -> str:
        return " ".join(str(w) for w in self.words)


def _parse_ref_word(tok: str, lineno, source) -> RefWord:
    if tok.startswith("(") and tok.endswith(")") and len(tok) > 2:
        return RefWord(_norm_word(tok[1:-1]), True)
    if "{" in tok or "}" in tok:
        raise FormatError(
            "inline alternations are not supported in STM; express them as GLM alternations",
            lineno, source)
    return RefWord(_norm_word(tok), False)


def parse_stm(text: str, source: Optional[str] = None) -> list:
    segments = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";;"):
            continue
        fields = line.split()
        if len(fields) < 5:
            raise FormatError(f"STM line needs at least 5 fields, got {len(fields)}", lineno, source)
        rec, chan, spk = fields[:3]
        try:
            start = float(fields[3])
        except ValueError:
            raise FormatError(f"bad start time {fields[3]!r}", lineno, source) from None
        try:
            end = float(fields[4])
        except ValueError:
            raise FormatError(f"bad end time {fields[4]!r}", lineno, source) from None
        if start < 0:
            raise FormatError(f"negative start time {start}", lineno, source)
        if end <= start:
            raise FormatError(f"segment end {end} is not after start {start}", lineno, source)
        rest = fields[5:]
        tags = None
        if rest and rest[0].startswith("<") and rest[0].endswith(">"):
            tags = rest[0]
            rest = rest[1:]
        ignore = len(rest) == 1 and rest[0].upper() == IGNORE_SEGMENT
        words = [] if ignore else [_parse_ref_word(t, lineno, source) for t in rest]
        segments.append(StmSegment(rec, chan, spk, start, end, words, tags, ignore))
    return segments


def format_stm_segment(seg: StmSegment) -> str:
    parts = [seg.recording_id, seg.channel, seg.speaker_id, fmt_seconds(seg.start), fmt_seconds(seg.end)]
    if seg.label_tags:
        parts.append(seg.label_tags)
    if seg.ignore:
        parts.append(IGNORE_SEGMENT)
    else:
        parts.extend(str(w) for w in seg.words)
    return " ".join(parts)


def write_stm(segments: Iterable[StmSegment]) -> str:
    return "".join(format_stm_segment(s) + "\n" for s in segments)


# ---------------------------------------------------------------------------
# CTM


@dataclass(frozen=True)
class CtmToken:
    recording_id: str
    channel: str
    start: float
    duration: float
    surface: str
    confidence: Optional[float] = None

    @property
    def end(self):
        return self.start + self.duration

    @property
    def midpoint(self):
        return self.start + self.duration / 2.0


@dataclass
class CtmAltBlock:
    recording_id: str
    channel: str
    alternatives: list  # list of list of CtmToken; rank = list position

    def first_token(self) -> Optional[CtmToken]:
        for alt in self.alternatives:
            if alt:
                return alt[0]
        return None

    def word_sequences(self):
        return [tuple(t.surface for t in alt) for alt in self.alternatives]


CtmItem = Union[CtmToken, CtmAltBlock]


def parse_ctm(text: str, source: Optional[str] = None) -> list:
    """Parse CTM text into plain tokens and ALT blocks, in file order.

    An ALT region ``<ALT_BEGIN> ... <ALT> ... <ALT_END>`` becomes a single
    :class:`CtmAltBlock`; an alternative with no lines between markers is an
    empty (skippable) alternative.
    """
    items = []
    block = None
    block_line = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise FormatError(f"CTM line needs 5 or 6 fields, got {len(fields)}", lineno, source)
        rec, chan, start, dur, word = fields[:5]
        if word in (ALT_BEGIN, ALT_MID, ALT_END):
            if word == ALT_BEGIN:
                if block is not None:
                    raise FormatError(
                        "nested <ALT_BEGIN> inside an open ALT block; "
                        "expand nested alternatives with flatten_nested_alts first",
                        lineno, source)
                block = CtmAltBlock(rec, chan, [[]])
                block_line = lineno
            elif block is None:
                raise FormatError(f"{word} without a matching <ALT_BEGIN>", lineno, source)
            elif word == ALT_MID:
                block.alternatives.append([])
            else:
                items.append(block)
                block = None
            continue
        try:
            tok = CtmToken(rec, chan, float(start), float(dur), _norm_word(word),
                           float(fields[5]) if len(fields) == 6 else None)
        except ValueError:
            raise FormatError("non-numeric time or confidence field", lineno, source) from None
        if tok.duration < 0:
            raise FormatError(f"negative duration {tok.duration}", lineno, source)
        if block is not None:
            if (rec, chan) != (block.recording_id, block.channel):
                raise FormatError("token inside ALT block has a different recording/channel", lineno, source)
            block.alternatives[-1].append(tok)
        else:
            items.append(tok)
    if block is not None:
        raise FormatError("<ALT_BEGIN> is never closed by <ALT_END>", block_line, source)
    return items


def format_ctm_token(tok: CtmToken) -> str:
    line = f"{tok.recording_id} {tok.channel} {fmt_seconds(tok.start)} {fmt_seconds(tok.duration)} {tok.surface}"
    if tok.confidence is not None:
        line += f" {fmt_weight(tok.confidence)}"
    return line


def write_ctm(items: Iterable[CtmItem]) -> str:
    out = []
    for item in items:
        if isinstance(item, CtmAltBlock):
            marker = f"{item.recording_id} {item.channel} * *"
            for i, alt in enumerate(item.alternatives):
                out.append(f"{marker} {ALT_BEGIN if i == 0 else ALT_MID}")
                out.extend(format_ctm_token(t) for t in alt)
            out.append(f"{marker} {ALT_END}")
        else:
            out.append(format_ctm_token(item))
    return "".join(line + "\n" for line in out)


# ---------------------------------------------------------------------------
# GLM


@dataclass(frozen=True)
class GlmRule:
    lhs: tuple
    rhs: tuple  # ranked tuple of phrases (tuples of words)
    kind: str = EXPANSION
    annotation: Optional[str] = None

    def __post_init__(self):
        if not self.lhs:
            raise ValueError("GLM rule needs a non-empty left-hand side")
        if self.kind == EXPANSION and len(self.rhs) != 1:
            raise ValueError("expansion rules have exactly one right-hand side")
        if self.kind == ALTERNATION and len(self.rhs) < 2:
            raise ValueError("alternation rules need at least two right-hand sides")


def _split_top_level_slash(s: str):
    depth = 0
    for i, ch in enumerate(s):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "/" and depth == 0:
            return s[:i], s[i + 1:].strip()
    return s, None


def _parse_rhs(s: str, lineno, source):
    s = s.replace("{", " { ").replace("}", " } ")
    pieces = []  # each piece: list of options, each option a tuple of words
    has_braces = False
    toks = s.split()
    i = 0
    while i < len(toks):
        tok = toks[i]
        if tok == "{":
            has_braces = True
            j = i + 1
            options, cur = [], []
            while j < len(toks) and toks[j] != "}":
                if toks[j] == "{":
                    raise FormatError("nested braces in GLM rule", lineno, source)
                if toks[j] == "/":
                    options.append(cur)
                    cur = []
                else:
                    cur.append(toks[j])
                j += 1
            if j == len(toks):
                raise FormatError("unclosed '{' in GLM rule", lineno, source)
            options.append(cur)
            pieces.append([tuple(_norm_word(w) for w in o if w != NULL_WORD) for o in options])
            i = j + 1
        elif tok == "}":
            raise FormatError("unbalanced '}' in GLM rule", lineno, source)
        else:
            pieces.append([() if tok == NULL_WORD else (_norm_word(tok),)])
            i += 1
    if not pieces:
        raise FormatError("empty right-hand side", lineno, source)
    phrases = []
    for combo in itertools.product(*pieces):
        phrase = tuple(w for part in combo for w in part)
        if phrase not in phrases:
            phrases.append(phrase)
    return phrases, has_braces


def parse_glm(text: str, source: Optional[str] = None) -> list:
    """Parse GLM rules.

    ``LHS => RHS`` is an expansion; ``LHS => { A / B C }`` an alternation with
    ranks in written order. ``@`` is the empty word. Text after a ``/`` that
    sits outside braces is a scope annotation, kept but never matched on.
    Header directives starting with ``*`` are skipped.
    """
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line or line.startswith("*"):
            continue
        if "=>" not in line:
            raise FormatError("GLM rule is missing '=>'", lineno, source)
        lhs_text, rhs_text = line.split("=>", 1)
        lhs = tuple(_norm_word(w) for w in lhs_text.split())
        if not lhs:
            raise FormatError("empty left-hand side", lineno, source)
        rhs_text, annotation = _split_top_level_slash(rhs_text)
        phrases, has_braces = _parse_rhs(rhs_text, lineno, source)
        kind = ALTERNATION if has_braces and len(phrases) > 1 else EXPANSION
        rules.append(GlmRule(lhs, tuple(phrases), kind, annotation or None))
    return rules


def _phrase_text(p):
    return " ".join(p) if p else NULL_WORD


def format_glm_rule(rule: GlmRule) -> str:
    if rule.kind == ALTERNATION:
        rhs = "{ " + " / ".join(_phrase_text(p) for p in rule.rhs) + " }"
    else:
        rhs = _phrase_text(rule.rhs[0])
    line = f"{' '.join(rule.lhs)} => {rhs}"
    if rule.annotation:
        line += f" / {rule.annotation}"
    return line


def write_glm(rules: Iterable[GlmRule]) -> str:
    return "".join(format_glm_rule(r) + "\n" for r in rules)


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    label: str
    start_frame: int
    end_frame: int
    weight: float

    @property
    def midpoint(self):
        return (self.start_frame + self.end_frame) / 2.0


@dataclass
class Lattice:
    """Acyclic weighted word graph; weights are negative log probabilities
    and frames are 10 ms units unless configured otherwise."""

    arcs: list
    start: int
    finals: dict
    utterance_id: Optional[str] = None
    recording_id: Optional[str] = None
    channel: Optional[str] = None
    offset: float = 0.0

    @property
    def states(self):
        s = {self.start, *self.finals}
        for a in self.arcs:
            s.add(a.src)
            s.add(a.dst)
        return sorted(s)

    @property
    def num_frames(self):
        return max((a.end_frame for a in self.arcs), default=0)

    def same_structure(self, other: "Lattice") -> bool:
        key = lambda a: (a.src, a.dst, a.label, a.start_frame, a.end_frame, a.weight)
        return (self.start == other.start and self.finals == other.finals
                and sorted(self.arcs, key=key) == sorted(other.arcs, key=key)
                and (self.utterance_id, self.recording_id, self.channel, self.offset)
                == (other.utterance_id, other.recording_id, other.channel, other.offset))


def topological_order(lat: Lattice) -> list:
    """Kahn's algorithm; raises LatticeError on a cycle."""
    states = lat.states
    indeg = {s: 0 for s in states}
    out = {s: [] for s in states}
    for a in lat.arcs:
        indeg[a.dst] += 1
        out[a.src].append(a.dst)
    ready = [s for s in states if indeg[s] == 0]
    ready.reverse()
    order = []
    while ready:
        s = ready.pop()
        order.append(s)
        for d in out[s]:
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    if len(order) != len(states):
        raise LatticeError("lattice contains a cycle")
    return order


def _parse_lattice_block(lines, source) -> Lattice:
    arcs, finals = [], {}
    start = None
    meta = {}
    for lineno, fields in lines:
        head = fields[0]
        try:
            if head == "utterance":
                if len(fields) not in (2, 5):
                    raise FormatError("utterance header needs 1 or 4 values", lineno, source)
                meta["utterance_id"] = fields[1]
                if len(fields) == 5:
                    meta["recording_id"] = fields[2]
                    meta["channel"] = fields[3]
                    meta["offset"] = float(fields[4])
            elif head == "start":
                if len(fields) != 2:
                    raise FormatError("start line needs exactly one state", lineno, source)
                start = int(fields[1])
            elif head == "final":
                if len(fields) != 3:
                    raise FormatError("final line needs a state and a weight", lineno, source)
                finals[int(fields[1])] = float(fields[2])
            else:
                if len(fields) != 6:
                    raise FormatError(
                        f"arc line needs 6 fields (from to label start end weight), got {len(fields)}",
                        lineno, source)
                a = Arc(int(fields[0]), int(fields[1]), _norm_word(fields[2]),
                        int(fields[3]), int(fields[4]), float(fields[5]))
                if a.start_frame > a.end_frame:
                    raise FormatError("arc start_frame is after end_frame", lineno, source)
                arcs.append(a)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"bad numeric field: {exc}", lineno, source) from None
    if start is None:
        if arcs:
            start = arcs[0].src
        elif finals:
            start = next(iter(finals))
        else:
            raise FormatError("empty lattice", lines[0][0] if lines else None, source)
    lat = Lattice(arcs, start, finals, **meta)
    topological_order(lat)
    return lat


def _lattice_lines(text):
    blocks, cur = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        fields = line.split()
        if fields[0] == "utterance" and cur:
            blocks.append(cur)
            cur = []
        cur.append((lineno, fields))
    if cur:
        blocks.append(cur)
    return blocks


def parse_lattice(text: str, source: Optional[str] = None) -> Lattice:
    blocks = _lattice_lines(text)
    if not blocks:
        raise FormatError("empty lattice", None, source)
    if len(blocks) > 1:
        raise FormatError("text holds several lattices; use parse_lattices", blocks[1][0][0], source)
    return _parse_lattice_block(blocks[0], source)


def parse_lattices(text: str, source: Optional[str] = None) -> list:
    return [_parse_lattice_block(b, source) for b in _lattice_lines(text)]


def write_lattice(lat: Lattice) -> str:
    out = []
    if lat.utterance_id is not None:
        if lat.recording_id is not None:
            out.append(f"utterance {lat.utterance_id} {lat.recording_id} {lat.channel} {fmt_seconds(lat.offset)}")
        else:
            out.append(f"utterance {lat.utterance_id}")
    out.append(f"start {lat.start}")
    for a in lat.arcs:
        out.append(f"{a.src} {a.dst} {a.label} {a.start_frame} {a.end_frame} {fmt_weight(a.weight)}")
    for s, w in lat.finals.items():
        out.append(f"final {s} {fmt_weight(w)}")
    return "".join(line + "\n" for line in out)


def write_lattices(lats: Iterable[Lattice]) -> str:
    return "".join(write_lattice(l) for l in lats)


# ---------------------------------------------------------------------------
# phrase alternatives


@dataclass(frozen=True)
class PhraseAlternative:
    words: tuple
    score: float
    times: Optional[tuple] = None  # per-word (start_frame, end_frame)


@dataclass
class PhrasePosition:
    start_frame: int
    end_frame: int
    alternatives: list

    @property
    def depth(self):
        return len(self.alternatives)


@dataclass
class PhraseAlternativesDoc:
    positions: list
    utterance_id: Optional[str] = None
    recording_id: Optional[str] = None
    channel: Optional[str] = None
    offset: float = 0.0

    def validate(self):
        prev_end = None
        for p in self.positions:
            if not p.alternatives:
                raise ValueError(f"position {p.start_frame}-{p.end_frame} has no alternatives")
            if p.start_frame > p.end_frame:
                raise ValueError("position interval is reversed")
            if prev_end is not None and p.start_frame < prev_end:
                raise ValueError("positions overlap or are out of time order")
            best = min(a.score for a in p.alternatives)
            if p.alternatives[0].score > best:
                raise ValueError("rank 0 alternative does not have the minimal score")
            prev_end = p.end_frame
        return self

    def truncated(self, n: Optional[int]):
        if n is None:
            return self
        return PhraseAlternativesDoc(
            [PhrasePosition(p.start_frame, p.end_frame, p.alternatives[:n]) for p in self.positions],
            self.utterance_id, self.recording_id, self.channel, self.offset)

    def depths(self):
        return [p.depth for p in self.positions]

    def as_phrase_doc(self):
        return self


def _format_alt(alt: PhraseAlternative) -> str:
    parts = ["alt", fmt_weight(alt.score)]
    if alt.times is not None:
        parts.extend(f"{w}:{s}:{e}" for w, (s, e) in zip(alt.words, alt.times))
    else:
        parts.extend(alt.words)
    return " ".join(parts)


def write_phrase_doc(doc: PhraseAlternativesDoc) -> str:
    out = []
    if doc.utterance_id is not None:
        if doc.recording_id is not None:
            out.append(f"utterance {doc.utterance_id} {doc.recording_id} {doc.channel} {fmt_seconds(doc.offset)}")
        else:
            out.append(f"utterance {doc.utterance_id}")
    for p in doc.positions:
        out.append(f"position {p.start_frame} {p.end_frame}")
        out.extend(_format_alt(a) for a in p.alternatives)
    return "".join(line + "\n" for line in out)


def write_phrase_docs(docs: Iterable[PhraseAlternativesDoc]) -> str:
    return "".join(write_phrase_doc(d) for d in docs)


def _parse_alt_line(fields, lineno, source) -> PhraseAlternative:
    try:
        score = float(fields[1])
    except (IndexError, ValueError):
        raise FormatError("alt line needs a numeric score", lineno, source) from None
    toks = fields[2:]
    timed = [t.rsplit(":", 2) for t in toks]
    if toks and all(len(t) == 3 for t in timed):
        try:
            times = tuple((int(s), int(e)) for _, s, e in timed)
        except ValueError:
            raise FormatError("bad word timing", lineno, source) from None
        return PhraseAlternative(tuple(_norm_word(w) for w, _, _ in timed), score, times)
    if any(len(t) == 3 for t in timed):
        raise FormatError("either all or none of the words in an alt line carry timings", lineno, source)
    return PhraseAlternative(tuple(_norm_word(w) for w in toks), score, None)


def parse_phrase_docs(text: str, source: Optional[str] = None) -> list:
    docs = []
    doc = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        fields = line.split()
        head = fields[0]
        if head == "utterance":
            if len(fields) not in (2, 5):
                raise FormatError("utterance header needs 1 or 4 values", lineno, source)
            doc = PhraseAlternativesDoc([], fields[1])
            if len(fields) == 5:
                doc.recording_id, doc.channel = fields[2], fields[3]
                doc.offset = float(fields[4])
            docs.append(doc)
        elif head == "position":
            if len(fields) != 3:
                raise FormatError("position line needs start and end frames", lineno, source)
            if doc is None:
                doc = PhraseAlternativesDoc([])
                docs.append(doc)
            try:
                doc.positions.append(PhrasePosition(int(fields[1]), int(fields[2]), []))
            except ValueError:
                raise FormatError("bad frame index", lineno, source) from None
        elif head == "alt":
            if doc is None or not doc.positions:
                raise FormatError("alt line before any position", lineno, source)
            doc.positions[-1].alternatives.append(_parse_alt_line(fields, lineno, source))
        else:
            raise FormatError(f"unknown line type {head!r}", lineno, source)
    for d in docs:
        try:
            d.validate()
        except ValueError as exc:
            raise FormatError(str(exc), None, source) from None
    return docs


def parse_phrase_doc(text: str, source: Optional[str] = None) -> PhraseAlternativesDoc:
    docs = parse_phrase_docs(text, source)
    if len(docs) != 1:
        raise FormatError(f"expected one phrase-alternatives document, found {len(docs)}", None, source)
    return docs[0]


# ---------------------------------------------------------------------------
# alternatives -> CTM


def _alt_tokens(alt, pos, rec, chan, frame_rate, offset):
    n = len(alt.words)
    if alt.times is not None:
        spans = alt.times
    else:
        width = (pos.end_frame - pos.start_frame) / n if n else 0
        spans = [(pos.start_frame + i * width, pos.start_frame + (i + 1) * width) for i in range(n)]
    return [CtmToken(rec, chan, offset + s * frame_rate, (e - s) * frame_rate, w)
            for w, (s, e) in zip(alt.words, spans)]


def doc_to_ctm_items(doc, frame_rate: float = 0.01, recording_id: Optional[str] = None,
                     channel: Optional[str] = None) -> list:
    """Convert an alternatives document (phrase, word-level or N-best) into
    CTM items: one ALT block per multi-alternative position."""
    doc = doc.as_phrase_doc()
    rec = recording_id or doc.recording_id or doc.utterance_id or "utt"
    chan = channel or doc.channel or "A"
    items = []
    for pos in doc.positions:
        alts = [_alt_tokens(a, pos, rec, chan, frame_rate, doc.offset) for a in pos.alternatives]
        if len(alts) == 1:
            items.extend(alts[0])
        else:
            items.append(CtmAltBlock(rec, chan, alts))
    return items


def write_ctm_with_alts(doc, frame_rate: float = 0.01, recording_id: Optional[str] = None,
                        channel: Optional[str] = None) -> str:
    if not doc.as_phrase_doc().positions:
        raise ValueError("cannot serialize an empty alternatives document")
    return write_ctm(doc_to_ctm_items(doc, frame_rate, recording_id, channel))
