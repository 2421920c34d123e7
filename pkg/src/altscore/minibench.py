"""Bundled synthetic mini-benchmark.

``ref.stm``, ``sys1.ctm`` and ``minibench.glm`` are hand written, one
scripted phenomenon per recording. ``lattices.lat`` is generated here: one
dense lattice per reference segment, built so the reference word sequence is
always a lattice path but rarely the best one.

Regenerate with ``python -m altscore.minibench``.
"""

from __future__ import annotations

import random
from pathlib import Path

from .formats import Arc, Lattice, parse_stm, write_lattices

DATA_DIR = Path(__file__).parent / "data" / "minibench"

CONFUSIONS = ("A", "AN", "AND", "THE", "THAT", "IT", "IS", "YEAH", "NO", "SO", "OH", "TO", "TOO",
              "WELL", "WE'LL", "HERE", "HEAR", "NOW", "KNOW", "RIGHT", "WRITE", "THEN", "THAN")


def path(name: str) -> Path:
    return DATA_DIR / name


def dense_lattice(words, num_frames, rng: random.Random, utt_id=None, recording_id=None,
                  channel=None, offset=0.0) -> Lattice:
    """A lattice over ``len(words)`` equal time slots.

    Each slot has the reference word plus 2-4 competitors; some slots get a
    two-word split path, and some adjacent slot pairs get a single word
    spanning both, so the graph is not a simple sausage.
    """
    k = len(words)
    if k == 0:
        return Lattice([Arc(0, 1, "<sil>", 0, num_frames, 0.0)], 0, {1: 0.0},
                       utt_id, recording_id, channel, offset)
    edges = [round(i * num_frames / k) for i in range(k + 1)]
    arcs = []
    nxt = k + 1
    for i, ref in enumerate(words):
        t0, t1 = edges[i], edges[i + 1]
        arcs.append(Arc(i, i + 1, ref, t0, t1, round(rng.uniform(1.0, 3.0), 3)))
        for w in rng.sample([c for c in CONFUSIONS if c != ref], rng.randint(2, 4)):
            arcs.append(Arc(i, i + 1, w, t0, t1, round(rng.uniform(0.5, 3.0), 3)))
        if rng.random() < 0.5 and t1 - t0 >= 2:
            mid = (t0 + t1) // 2
            a, b = rng.sample(CONFUSIONS, 2)
            arcs.append(Arc(i, nxt, a, t0, mid, round(rng.uniform(1.0, 3.0), 3)))
            arcs.append(Arc(nxt, i + 1, b, mid, t1, round(rng.uniform(1.0, 3.0), 3)))
            nxt += 1
        if i + 2 <= k and rng.random() < 0.4:
            arcs.append(Arc(i, i + 2, rng.choice(CONFUSIONS), t0, edges[i + 2],
                            round(rng.uniform(1.5, 4.0), 3)))
    return Lattice(arcs, 0, {k: 0.0}, utt_id, recording_id, channel, offset)


def build_lattices(segments, seed: int = 2022, frame_rate: float = 0.01) -> list:
    rng = random.Random(seed)
    lats = []
    for n, seg in enumerate(segments):
        if seg.ignore:
            continue
        frames = round((seg.end - seg.start) / frame_rate)
        words = [w.surface for w in seg.words]
        lats.append(dense_lattice(words, frames, rng, f"{seg.recording_id}_{seg.channel}_{n:03d}",
                                  seg.recording_id, seg.channel, seg.start))
    return lats


def generate_lattice_text(seed: int = 2022) -> str:
    segments = parse_stm(path("ref.stm").read_text())
    return write_lattices(build_lattices(segments, seed))


if __name__ == "__main__":
    path("lattices.lat").write_text(generate_lattice_text())
