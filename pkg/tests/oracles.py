"""Brute-force reference implementations used to check the library.

Nothing here imports the algorithms under test; only data types are shared.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

from altscore.formats import Arc, Lattice
from altscore.glm_filter import AltNetwork

SILENCE = {"<sil>", "<eps>", "!SIL"}


# ---------------------------------------------------------------------------
# edit distance


def levenshtein(ref, hyp, sub=4, ins=3, dele=3):
    """Textbook weighted edit distance over two word lists."""
    prev = [j * ins for j in range(len(hyp) + 1)]
    for i in range(1, len(ref) + 1):
        cur = [i * dele] + [0] * len(hyp)
        for j in range(1, len(hyp) + 1):
            diag = prev[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else sub)
            cur[j] = min(diag, prev[j] + dele, cur[j - 1] + ins)
        prev = cur
    return prev[-1]


def network_paths(net):
    """Every word sequence a flat AltNetwork can produce."""
    options = [[a.texts() for a in slot.alternatives] for slot in net.slots]
    return [tuple(w for part in combo for w in part) for combo in itertools.product(*options)]


def brute_force_cost(ref, hyp, costs=(4, 3, 3)):
    sub, ins, dele = costs
    return min(levenshtein(r, h, sub, ins, dele)
               for r in set(network_paths(ref)) for h in set(network_paths(hyp)))


def exact_metrics(c, s, d, i):
    """WER, precision and recall as exact rationals; None marks an unbounded WER."""
    ref_len = c + s + d
    hyp_len = c + s + i
    if ref_len:
        wer = Fraction(100 * (s + d + i), ref_len)
        recall = Fraction(c, ref_len)
    else:
        wer = Fraction(0) if i == 0 else None
        recall = Fraction(1)
    precision = Fraction(c, hyp_len) if hyp_len else Fraction(1)
    return wer, precision, recall


# ---------------------------------------------------------------------------
# lattices


def lattice_paths(lat):
    """All (arcs, total weight) start-to-final paths by depth-first search."""
    out = {}
    for a in lat.arcs:
        out.setdefault(a.src, []).append(a)
    paths = []

    def walk(state, arcs, weight):
        if state in lat.finals:
            paths.append((tuple(arcs), weight + lat.finals[state]))
        for a in out.get(state, ()):
            arcs.append(a)
            walk(a.dst, arcs, weight + a.weight)
            arcs.pop()

    walk(lat.start, [], 0.0)
    return paths


def words_of(arcs, silence=SILENCE):
    return tuple(a.label for a in arcs if a.label not in silence)


def sequence_weights(lat, silence=SILENCE):
    """Distinct word sequence -> best path weight."""
    best = {}
    for arcs, w in lattice_paths(lat):
        seq = words_of(arcs, silence)
        if seq not in best or w < best[seq]:
            best[seq] = w
    return best


def path_posteriors(lat):
    """Arc posteriors by summing normalized path probabilities."""
    paths = lattice_paths(lat)
    total = sum(math.exp(-w) for _, w in paths)
    post = {}
    for arcs, w in paths:
        p = math.exp(-w) / total
        for a in arcs:
            post[id(a)] = post.get(id(a), 0.0) + p
    return [post.get(id(a), 0.0) for a in lat.arcs]


def in_cross_product(seq, positions):
    """Can ``seq`` be split into one alternative per position, in order?"""
    seq = tuple(seq)
    reach = {0}
    for alts in positions:
        nxt = set()
        for k in reach:
            for alt in alts:
                if seq[k:k + len(alt)] == tuple(alt):
                    nxt.add(k + len(alt))
        reach = nxt
        if not reach:
            return False
    return len(seq) in reach


def cross_product(positions):
    return {tuple(w for alt in combo for w in alt) for combo in itertools.product(*positions)}


def random_lattice(rng: random.Random, max_states=12, vocab="ABCDEFG", silence_rate=0.15,
                   max_paths=10_000):
    """Random time-consistent acyclic lattice with one final state.

    State ids are topologically ordered and carry strictly increasing frame
    times, so every start-to-final path covers the same frame range.
    """
    while True:
        k = rng.randint(2, max_states)
        times = sorted(rng.sample(range(1, 40 * k), k - 1))
        times = [0] + times
        arcs = []
        for s in range(k - 1):
            arcs.append(_rand_arc(rng, s, s + 1, times, vocab, silence_rate))
            for _ in range(rng.randint(0, 2)):
                d = rng.randint(s + 1, min(k - 1, s + 3))
                arcs.append(_rand_arc(rng, s, d, times, vocab, silence_rate))
        lat = Lattice(arcs, 0, {k - 1: 0.0})
        if count_paths(lat) <= max_paths:
            return lat


def _rand_arc(rng, s, d, times, vocab, silence_rate):
    label = "<sil>" if rng.random() < silence_rate else rng.choice(vocab)
    return Arc(s, d, label, times[s], times[d], round(rng.uniform(0.1, 4.0), 3))


def count_paths(lat) -> int:
    out = {}
    for a in lat.arcs:
        out.setdefault(a.src, []).append(a.dst)
    memo = {}

    def count(s):
        if s not in memo:
            memo[s] = (1 if s in lat.finals else 0) + sum(count(d) for d in out.get(s, ()))
        return memo[s]

    return count(lat.start)


# ---------------------------------------------------------------------------
# networks


def random_network(rng: random.Random, vocab="ABCD", max_slots=4, max_alts=3, max_len=3):
    layout = []
    for _ in range(rng.randint(0, max_slots)):
        alts = []
        for _ in range(rng.randint(1, max_alts)):
            alts.append([rng.choice(vocab) for _ in range(rng.randint(0, max_len))])
        layout.append(alts)
    return AltNetwork.build(layout)
