"""Canonical text fixtures for every file format.

Each text is already in the writers' canonical form, so ``write(parse(t))``
must return ``t`` byte for byte.
"""

from __future__ import annotations

import random

from altscore.formats import (Arc, CtmAltBlock, CtmToken, GlmRule, Lattice, PhraseAlternative,
                              PhraseAlternativesDoc, PhrasePosition, RefWord, StmSegment, write_ctm,
                              write_glm, write_lattice, write_phrase_doc, write_stm)

UM_IM_BLOCK = """\
sw_4390 A * * <ALT_BEGIN>
sw_4390 A 4.49 0.66 UM
sw_4390 A * * <ALT>
sw_4390 A 4.49 0.66 I'M
sw_4390 A * * <ALT_END>
"""

WORDS = ["YEAH", "I'M", "NOT", "SURE", "UH-HUH", "%HESITATION", "THE", "CAT", "RIGHT", "OKAY"]

STM_HAND = [
    "",
    "sw_4390 A sw_4390_A 4.49 5.15 (%HESITATION) I'M\n",
    "sw_4390 A sw_4390_A 0.00 1.25 YEAH\nsw_4390 A sw_4390_A 1.25 3.50 I'M NOT SURE\n",
    "sw_4390 B sw_4390_B 2.10 2.80 UH-HUH\n",
    "a A spk1 0.00 2.00 A B\na A spk1 2.00 4.00 C\n",
    "rec1 1 s1 10.125 12.50 <O,F0,MALE> HELLO THERE\n",
    "rec1 1 s1 0.00 5.00 IGNORE_TIME_SEGMENT_IN_SCORING\n",
    "rec2 A spk 0.00 0.50\n",
    "rec2 A spk 3.333333 4.00 (UH) (UM) WELL\n",
    "x A x 0.01 0.02 A\nx B x 0.01 0.02 B\nx A x 0.02 0.03 C\n",
]

CTM_HAND = [
    "",
    UM_IM_BLOCK,
    "sw_4390 A 4.49 0.66 UM\n",
    "sw_4390 A 4.49 0.66 UM 0.82\nsw_4390 A 5.15 0.30 YEAH 1\n",
    "r A * * <ALT_BEGIN>\nr A 1.00 0.20 I'M\nr A * * <ALT>\nr A 1.00 0.10 I\nr A 1.10 0.10 AM\n"
    "r A * * <ALT_END>\n",
    "r A * * <ALT_BEGIN>\nr A 2.00 0.30 UH\nr A * * <ALT>\nr A * * <ALT_END>\n",
    "r A * * <ALT_BEGIN>\nr A * * <ALT>\nr A * * <ALT_END>\n",
    "r B 0.00 0.00 A\nr B 0.00 1.50 B\n",
    "r A 0.10 0.20 A\nr A * * <ALT_BEGIN>\nr A 0.30 0.20 B\nr A * * <ALT>\nr A 0.30 0.20 C\n"
    "r A * * <ALT>\nr A 0.30 0.20 D\nr A * * <ALT_END>\nr A 0.50 0.20 E\n",
    "r A 123.456789 0.01 LONG\n",
]

GLM_HAND = [
    "",
    "I'M => I AM\n",
    "I'M => { I'M / I AM }\n",
    "I'M => I AM / [ ] __ [ ]\n",
    "GONNA => { GONNA / GOING TO } / [ ] __ [ ]\n",
    "UH-HUH => @\n",
    "A B C => { A B C / ABC / A C }\n",
    "OKAY => { OKAY / O K / @ }\n",
    "WE'LL => WE WILL\nHE'S => { HE'S / HE IS / HE HAS }\n",
    "MR. => MISTER\n",
]

LATTICE_HAND = [
    "start 0\n0 1 A 0 10 0.5\nfinal 1 0\n",
    "utterance u1\nstart 0\n0 1 UM 0 66 1.2\n0 1 I'M 0 66 1.5\nfinal 1 0\n",
    "utterance sw_4390_A_001 sw_4390 A 4.49\nstart 0\n0 1 A 0 50 0.1\n1 2 <sil> 50 70 0.2\n"
    "2 3 B 70 120 0.3\nfinal 3 0\n",
    "start 0\n0 1 A 0 10 1\n0 2 B 0 10 2\n1 3 C 10 20 1\n2 3 C 10 20 0.25\nfinal 3 0.5\n",
    "start 5\n5 6 X 0 0 0\nfinal 6 0\n",
    "start 0\n0 1 <eps> 0 5 0\n1 2 WORD 5 9 3.75\nfinal 2 0\nfinal 1 2\n",
    "utterance a\nstart 0\n0 1 A 0 60 0\n1 2 B 60 120 0\n0 2 C 0 120 5.517452896464707\nfinal 2 0\n",
    "start 0\n0 1 !SIL 0 3 0.01\n1 2 HI 3 9 1e-05\nfinal 2 0\n",
]

PHRASE_HAND = [
    "position 0 66\nalt 1.2 UM\nalt 1.5 I'M\n",
    "utterance u1\nposition 0 10\nalt 0 A\n",
    "utterance u2 rec A 1.50\nposition 0 50\nalt 0.5 A:0:20 B:20:50\nalt 0.7 C:0:50\nposition 60 90\nalt 1 D:60:90\n",
    "position 0 10\nalt 0\nalt 2 A\n",
    "position 0 10\nalt 0.1 A B C\nalt 0.2 A\nalt 0.3\n",
    "utterance x\nposition 0 5\nalt 3 YEAH\nposition 5 9\nalt 1 RIGHT\nalt 1 WRITE\n",
]


# ---------------------------------------------------------------------------
# generated fixtures


def _stm_text(rng):
    segs = []
    t = round(rng.uniform(0, 5), 2)
    for k in range(rng.randint(1, 4)):
        end = round(t + rng.uniform(0.1, 4), 2)
        words = [RefWord(rng.choice(WORDS), rng.random() < 0.2) for _ in range(rng.randint(0, 6))]
        segs.append(StmSegment(f"rec{rng.randint(1, 3)}", rng.choice("AB"), f"spk{k}", t, end, words))
        t = end
    return write_stm(segs)


def _tok(rng, rec, chan, t):
    return CtmToken(rec, chan, t, round(rng.uniform(0, 0.8), 2), rng.choice(WORDS),
                    round(rng.random(), 3) if rng.random() < 0.3 else None)


def _ctm_text(rng):
    items = []
    t = 0.0
    for _ in range(rng.randint(1, 6)):
        t = round(t + rng.uniform(0.05, 0.9), 2)
        if rng.random() < 0.3:
            alts = [[_tok(rng, "sw_1", "A", t) for _ in range(rng.randint(0, 2))]
                    for _ in range(rng.randint(2, 4))]
            items.append(CtmAltBlock("sw_1", "A", alts))
        else:
            items.append(_tok(rng, "sw_1", "A", t))
    return write_ctm(items)


def _glm_text(rng):
    rules = []
    for _ in range(rng.randint(1, 4)):
        lhs = tuple(rng.sample(WORDS, rng.randint(1, 2)))
        if rng.random() < 0.5:
            rules.append(GlmRule(lhs, (tuple(rng.sample(WORDS, rng.randint(0, 2))),), "expansion",
                                 "[ ] __ [ ]" if rng.random() < 0.3 else None))
        else:
            rhs = []
            while len(rhs) < rng.randint(2, 3):
                p = tuple(rng.sample(WORDS, rng.randint(0, 2)))
                if p not in rhs:
                    rhs.append(p)
            rules.append(GlmRule(lhs, tuple(rhs), "alternation"))
    return write_glm(rules)


def _lattice_text(rng):
    k = rng.randint(2, 6)
    arcs = [Arc(s, s + 1, rng.choice(WORDS + ["<sil>"]), 10 * s, 10 * s + 10, round(rng.uniform(0, 5), 3))
            for s in range(k - 1)]
    arcs += [Arc(s, s + 2, rng.choice(WORDS), 10 * s, 10 * s + 20, round(rng.uniform(0, 5), 3))
             for s in range(k - 2) if rng.random() < 0.5]
    meta = {}
    if rng.random() < 0.5:
        meta = dict(utterance_id=f"u{rng.randint(0, 99)}", recording_id="rec", channel="A",
                    offset=round(rng.uniform(0, 100), 2))
    return write_lattice(Lattice(arcs, 0, {k - 1: round(rng.uniform(0, 1), 2)}, **meta))


def _phrase_text(rng):
    positions = []
    t = 0
    for _ in range(rng.randint(1, 4)):
        end = t + rng.randint(1, 60)
        scores = sorted(round(rng.uniform(0, 9), 3) for _ in range(rng.randint(1, 4)))
        alts = [PhraseAlternative(tuple(rng.sample(WORDS, rng.randint(0, 3))), s) for s in scores]
        positions.append(PhrasePosition(t, end, alts))
        t = end + rng.randint(0, 5)
    return write_phrase_doc(PhraseAlternativesDoc(positions, "utt", None, None, 0.0))


def generated(kind, count, seed=7):
    rng = random.Random(f"{kind}-{seed}")
    make = {"stm": _stm_text, "ctm": _ctm_text, "glm": _glm_text, "lattice": _lattice_text,
            "phrase": _phrase_text}[kind]
    return [make(rng) for _ in range(count)]


def corpus(kind):
    hand = {"stm": STM_HAND, "ctm": CTM_HAND, "glm": GLM_HAND, "lattice": LATTICE_HAND,
            "phrase": PHRASE_HAND}[kind]
    return hand + generated(kind, 25 - len(hand))
