"""Command line entry point: ``altscore <subcommand> ...``.

Every flag may also be given in a ``key=value`` config file passed with
``--config``; keys are the long flag names without leading dashes. Flags on
the command line win over the config file.

Exit codes: 0 success, 1 input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import plots
from .align_core import CostModel, format_alignment
from .errors import FormatError, LatticeError
from .formats import (CtmAltBlock, CtmToken, doc_to_ctm_items, fmt_seconds, parse_ctm, parse_glm, parse_lattices,
                      parse_phrase_docs, parse_stm, write_ctm, write_ctm_with_alts, write_phrase_docs,
                      write_stm, StmSegment)
from .glm_filter import DEFAULT_BACKCHANNELS, DEFAULT_HESITATIONS, FilterPolicy, Slot, load_word_list
from .lattice_ops import (DEFAULT_POSTERIOR_THRESHOLD, depth_stats, lattice_to_phrases, nbest,
                          word_alternatives)
from .oracle import compressed_size, concat_docs, oracle_curve
from .pipeline import ScoreConfig, effective_rules, prepare_hypothesis, prepare_reference, run_stages, score_corpus
from .report import (CURVE_COLUMNS, SCORE_COLUMNS, curve_row, fmt_wer, format_delimited, format_table,
                     metrics_row, sort_by_wer)
from .segmentation import PER_SEGMENT, SINGLE_SEGMENT, assign_hyp_to_segments, merge_stm

log = logging.getLogger("altscore")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _parse_depths(text):
    out = []
    for part in str(text).split(","):
        part = part.strip().lower()
        if not part:
            continue
        if part in ("inf", "infinity", "all"):
            out.append(None)
        else:
            n = int(part)
            if n <= 0:
                raise CliError("depths must be positive integers or 'inf'")
            out.append(n)
    if not out:
        raise CliError("no depth given")
    return out


def _max_depth(depths):
    return None if None in depths else max(depths)


def _load_rules(args):
    if not args.glm:
        return []
    return parse_glm(_read(args.glm), source=args.glm)


def _policy(args):
    return FilterPolicy(
        hesitation_words=load_word_list(args.hesitation_list) if args.hesitation_list else DEFAULT_HESITATIONS,
        backchannel_words=load_word_list(args.backchannel_list) if args.backchannel_list else DEFAULT_BACKCHANNELS,
        exclude_hyp_hesitations=args.exclude_hyp_hesitations,
        backchannel_mode=args.backchannels,
    )


def _score_config(args, segmentation=PER_SEGMENT):
    try:
        costs = CostModel.parse(args.costs)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return ScoreConfig(_policy(args), args.legacy_expansions, segmentation, costs, args.slack)


def _system_name(path):
    name = os.path.basename(path)
    for suffix in (".ctm", ".txt"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name


def _report_dir(args):
    if not args.report_dir:
        return None
    d = Path(args.report_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# score


def cmd_score(args):
    if not args.stm or not args.ctm:
        raise CliError("score needs --stm and at least one --ctm")
    segments = parse_stm(_read(args.stm), source=args.stm)
    rules = _load_rules(args)
    systems = [(_system_name(p), parse_ctm(_read(p), source=p)) for p in args.ctm]
    outdir = _report_dir(args)
    if args.stages:
        return _score_stages(args, segments, rules, systems, outdir)

    seg_mode = SINGLE_SEGMENT if args.segmentation == "single" else PER_SEGMENT
    config = _score_config(args, seg_mode)
    summary, detail = [], []
    for name, items in systems:
        scored = score_corpus(segments, items, rules, config, jobs=args.jobs)
        summary.append(metrics_row(name, "all", scored.overall))
        if args.per_recording:
            for rec, m in sorted(scored.by_recording().items()):
                detail.append(metrics_row(name, rec, m))
        if args.alignments:
            for s in scored.segments:
                print(f"id: ({s.recording_id}-{s.channel}-{fmt_seconds(s.start)}-{fmt_seconds(s.end)})")
                print(format_alignment(s.result))
    rows = sort_by_wer(summary) + detail
    sys.stdout.write(format_table(rows, SCORE_COLUMNS))
    tsv = format_delimited(rows, SCORE_COLUMNS)
    if args.tsv:
        _emit(tsv, args.tsv)
    if outdir is not None:
        (outdir / "score.tsv").write_text(tsv)
        plots.plot_system_metrics(sort_by_wer(summary), outdir / "score.png")
    return 0


def _score_stages(args, segments, rules, systems, outdir):
    base = _score_config(args)
    columns = [("stage", "Stage", "<")] + [(name, name, ">") for name, _ in systems]
    rows, labels = None, []
    wers = {name: [] for name, _ in systems}
    for name, items in systems:
        ladder = run_stages(segments, items, rules, base, jobs=args.jobs)
        if rows is None:
            rows = [{"stage": label} for _, label, _ in ladder]
            labels = [label for _, label, _ in ladder]
        for row, (_, _, scored) in zip(rows, ladder):
            m = scored.overall
            row[name] = fmt_wer(m.wer)
            wers[name].append(m.wer)
    sys.stdout.write(format_table(rows, columns))
    tsv = format_delimited(rows, columns)
    if args.tsv:
        _emit(tsv, args.tsv)
    if outdir is not None:
        (outdir / "stages.tsv").write_text(tsv)
        plots.plot_stage_ladder(labels, wers, outdir / "stages.png")
    return 0


# ---------------------------------------------------------------------------
# filter / merge-stm


def _slot_stm_text(slot: Slot) -> str:
    alts = slot.alternatives
    if len(alts) == 1:
        return " ".join(str(w) for w in alts[0].words)
    if len(alts) == 2 and not alts[1].items and len(alts[0].items) == 1:
        return f"({alts[0].items[0].text})"
    return "{ " + " / ".join(" ".join(w.text for w in a.words) or "@" for a in alts) + " }"


def network_to_ctm_items(net, rec, chan):
    def tokens(words):
        return [CtmToken(rec, chan, w.start or 0.0, w.duration or 0.0, w.text) for w in words]

    items = []
    for slot in net.slots:
        if len(slot.alternatives) == 1:
            items.extend(tokens(slot.alternatives[0].words))
        else:
            items.append(CtmAltBlock(rec, chan, [tokens(a.words) for a in slot.alternatives]))
    return items


def _filter_kind(args):
    if args.type:
        return args.type
    low = args.input.lower()
    if low.endswith(".stm"):
        return "stm"
    if low.endswith(".ctm"):
        return "ctm"
    raise CliError("cannot tell STM from CTM by the file name; pass --type")


def cmd_filter(args):
    kind = _filter_kind(args)
    rules = effective_rules(_load_rules(args), ScoreConfig(legacy_expansions=args.legacy_expansions))
    policy = _policy(args)
    text = _read(args.input)
    if kind == "stm":
        out = []
        for seg in parse_stm(text, source=args.input):
            if seg.ignore:
                out.append(write_stm([seg]))
                continue
            net = prepare_reference(seg, rules, policy)
            body = " ".join(_slot_stm_text(s) for s in net.slots)
            head = write_stm([StmSegment(seg.recording_id, seg.channel, seg.speaker_id, seg.start,
                                         seg.end, [], seg.label_tags)]).rstrip("\n")
            out.append(f"{head} {body}".rstrip() + "\n")
        _emit("".join(out), args.output)
        return 0
    items = parse_ctm(text, source=args.input)
    groups, order = {}, []
    for item in items:
        key = (item.recording_id, item.channel)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(item)
    out = []
    for key in order:
        net = prepare_hypothesis(groups[key], rules, policy)
        out.extend(network_to_ctm_items(net, *key))
    _emit(write_ctm(out), args.output)
    return 0


def cmd_merge_stm(args):
    segments = parse_stm(_read(args.input), source=args.input)
    _emit(write_stm(merge_stm(segments)), args.output)
    return 0


# ---------------------------------------------------------------------------
# lattices


def _lattices(path):
    return parse_lattices(_read(path), source=path)


def _emit_docs(docs, args):
    if args.format == "phrases":
        _emit(write_phrase_docs(docs), args.output)
    else:
        _emit("".join(write_ctm_with_alts(d, args.frame_rate) for d in docs
                      if d.as_phrase_doc().positions), args.output)


def _single_depth(args):
    depths = _parse_depths(args.n)
    if len(depths) != 1:
        raise CliError("--n takes a single depth here")
    return depths[0]


def cmd_lattice_nbest(args):
    n = _single_depth(args)
    docs = [nbest(lat, n).as_phrase_doc() for lat in _lattices(args.input)]
    _emit_docs(docs, args)
    return 0


def cmd_lattice_phrases(args):
    n = _single_depth(args)
    docs = [lattice_to_phrases(lat, n, args.posterior_threshold) for lat in _lattices(args.input)]
    _emit_docs(docs, args)
    return 0


def cmd_lattice_words(args):
    n = _single_depth(args)
    docs = [word_alternatives(lattice_to_phrases(lat, args.phrase_depth, args.posterior_threshold)).truncated(n)
            for lat in _lattices(args.input)]
    _emit_docs(docs, args)
    return 0


# ---------------------------------------------------------------------------
# oracle-score


LEVELS = ("nbest", "word", "phrase")


def level_docs(lat, level, depth, threshold, phrase_depth):
    if level == "nbest":
        return nbest(lat, depth).as_phrase_doc()
    if level == "phrase":
        return lattice_to_phrases(lat, depth, threshold)
    return word_alternatives(lattice_to_phrases(lat, phrase_depth, threshold)).truncated(depth)


def lattice_segments(lats, segments, frame_rate):
    """Map each lattice to the reference segment holding its time midpoint."""
    probes = []
    for k, lat in enumerate(lats):
        if lat.recording_id is None:
            raise CliError(f"lattice {lat.utterance_id or k} lacks a recording/channel/offset header")
        t0 = min((a.start_frame for a in lat.arcs), default=0)
        span = (lat.num_frames - t0) * frame_rate
        probes.append(CtmToken(lat.recording_id, lat.channel, lat.offset + t0 * frame_rate, span, str(k)))
    assigned = assign_hyp_to_segments(probes, segments)
    owner = {}
    for idx, toks in assigned.items():
        for t in toks:
            owner[int(t.surface)] = idx
    return owner


def oracle_units(segments, lats, level, depth, args, rules, policy):
    owner = lattice_segments(lats, segments, args.frame_rate)
    per_seg = {}
    for k, lat in enumerate(lats):
        if owner[k] is None:
            log.warning("lattice %s matches no reference segment; skipped", lat.utterance_id)
            continue
        doc = level_docs(lat, level, depth, args.posterior_threshold, args.phrase_depth)
        per_seg.setdefault(owner[k], []).append(doc)
    refs, docs = [], []
    for idx, seg in enumerate(segments):
        if seg.ignore:
            continue
        refs.append(prepare_reference(seg, rules, policy))
        docs.append(concat_docs(per_seg.get(idx, []), args.frame_rate, seg.recording_id, seg.channel))
    return refs, docs


def cmd_oracle_score(args):
    if not args.stm or not args.lattices:
        raise CliError("oracle-score needs --stm and --lattices")
    segments = parse_stm(_read(args.stm), source=args.stm)
    lats = _lattices(args.lattices)
    config = _score_config(args)
    rules = effective_rules(_load_rules(args), config)
    depths = _parse_depths(args.n)
    levels = args.level or ["phrase"]
    for lv in levels:
        if lv not in LEVELS:
            raise CliError(f"unknown level {lv!r}")

    def builder(doc):
        return prepare_hypothesis(doc_to_ctm_items(doc, args.frame_rate), rules, config.policy)

    rows, curves = [], {}
    for lv in levels:
        refs, docs = oracle_units(segments, lats, lv, _max_depth(depths), args, rules, config.policy)
        curve = oracle_curve(refs, docs, depths, config.costs, builder, args.frame_rate)
        curves[lv] = curve
        rows.extend(curve_row(args.name, lv, r) for r in curve)
    sys.stdout.write(format_table(rows, CURVE_COLUMNS))
    tsv = format_delimited(rows, CURVE_COLUMNS)
    if args.tsv:
        _emit(tsv, args.tsv)
    outdir = _report_dir(args)
    if outdir is not None:
        (outdir / "oracle.tsv").write_text(tsv)
        plots.plot_oracle_curves(curves, outdir / "oracle.png")
    return 0


# ---------------------------------------------------------------------------
# stats


def _stats_kind(args):
    if args.type:
        return args.type
    for suffix, kind in ((".stm", "stm"), (".ctm", "ctm"), (".lat", "lattices"), (".phr", "phrases")):
        if args.input.lower().endswith(suffix):
            return kind
    raise CliError("cannot tell the file type from its name; pass --type")


def cmd_stats(args):
    kind = _stats_kind(args)
    text = _read(args.input)
    rows = []
    if kind == "stm":
        segs = parse_stm(text, source=args.input)
        words = [w for s in segs for w in s.words]
        rows = [("segments", len(segs)), ("words", len(words)),
                ("optional words", sum(w.optional_deletion for w in words)),
                ("recordings", len({s.recording_id for s in segs}))]
    elif kind == "lattices":
        lats = parse_lattices(text, source=args.input)
        arcs = sum(len(l.arcs) for l in lats)
        frames = sum(l.num_frames for l in lats)
        rows = [("lattices", len(lats)), ("states", sum(len(l.states) for l in lats)), ("arcs", arcs),
                ("arcs per second", f"{arcs / (frames * args.frame_rate):.1f}" if frames else "0")]
    else:
        if kind == "ctm":
            items = parse_ctm(text, source=args.input)
            depths = [len(i.alternatives) if isinstance(i, CtmAltBlock) else 1 for i in items]
        else:
            depths = [d for doc in parse_phrase_docs(text, source=args.input) for d in doc.depths()]
        n_max, n_90, n_50 = depth_stats(depths) if depths else (0, 0, 0)
        rows = [("units", len(depths)), ("N_max", n_max), ("N_.9", n_90), ("N_.5", n_50),
                ("gzip bytes", compressed_size(text))]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k.ljust(width)}  {v}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _common(p):
    p.add_argument("--config", help="key=value file mirroring the long flags")
    p.add_argument("--frame-rate", type=float, default=0.01, help="seconds per lattice frame")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for per-segment alignment")
    p.add_argument("-v", "--verbose", action="store_true")


def _scoring_flags(p):
    p.add_argument("--glm", help="GLM mapping file")
    p.add_argument("--legacy-expansions", action="store_true",
                   help="apply GLM expansions as written instead of promoting them to alternations")
    p.add_argument("--exclude-hyp-hesitations", action="store_true")
    p.add_argument("--backchannels", choices=("score", "optional", "exclude"), default="score")
    p.add_argument("--hesitation-list", help="file of hesitation words")
    p.add_argument("--backchannel-list", help="file of backchannel words")
    p.add_argument("--costs", default="4,3,3", help="edit costs sub,ins,del")
    p.add_argument("--slack", type=float, default=10.0,
                   help="seconds a token may sit outside every segment before a warning")


def build_parser():
    parser = argparse.ArgumentParser(prog="altscore", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="WER, precision and recall of CTM files against an STM")
    _common(p)
    _scoring_flags(p)
    p.add_argument("--stm")
    p.add_argument("--ctm", action="append", help="hypothesis CTM; repeat for several systems")
    p.add_argument("--segmentation", choices=("per-segment", "single"), default="per-segment")
    p.add_argument("--stages", action="store_true", help="print the cumulative scoring ladder")
    p.add_argument("--per-recording", action="store_true")
    p.add_argument("--alignments", action="store_true", help="print REF/HYP alignments")
    p.add_argument("--tsv", help="write the tab-delimited report here")
    p.add_argument("--report-dir", help="directory for the TSV report and figures")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("filter", help="apply GLM rules and policy to an STM or CTM file")
    _common(p)
    _scoring_flags(p)
    p.add_argument("input")
    p.add_argument("--type", choices=("stm", "ctm"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("merge-stm", help="convert a multi-segment STM to one segment per channel")
    _common(p)
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_merge_stm)

    for name, func, help_ in (("lattice-nbest", cmd_lattice_nbest, "utterance-level N-best lists"),
                              ("lattice-phrases", cmd_lattice_phrases, "phrase-level alternatives"),
                              ("lattice-words", cmd_lattice_words, "word-level alternatives")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("input", help="lattice archive")
        p.add_argument("--n", default="10", help="depth, or 'inf'")
        p.add_argument("--posterior-threshold", type=float, default=DEFAULT_POSTERIOR_THRESHOLD)
        p.add_argument("--phrase-depth", type=int, default=1000,
                       help="phrase depth used before re-binning into words")
        p.add_argument("--format", choices=("ctm", "phrases"), default="ctm")
        p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("oracle-score", help="oracle WER of lattice alternatives at several depths")
    _common(p)
    _scoring_flags(p)
    p.add_argument("--stm")
    p.add_argument("--lattices")
    p.add_argument("--level", action="append", help="nbest, word or phrase; repeatable")
    p.add_argument("--n", default="1,10,100", help="comma separated depths; 'inf' for unlimited")
    p.add_argument("--posterior-threshold", type=float, default=DEFAULT_POSTERIOR_THRESHOLD)
    p.add_argument("--phrase-depth", type=int, default=1000)
    p.add_argument("--name", default="system")
    p.add_argument("--tsv")
    p.add_argument("--report-dir")
    p.set_defaults(func=cmd_oracle_score)

    p = sub.add_parser("stats", help="size and depth statistics of a file")
    _common(p)
    p.add_argument("input")
    p.add_argument("--type", choices=("stm", "ctm", "phrases", "lattices"))
    p.set_defaults(func=cmd_stats)
    return parser


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("config lines look like key=value", lineno, path)
        k, v = line.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _config_defaults(subparser, config):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise CliError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise CliError(f"config key {key!r} expects true/false")
            defaults[key] = low in _TRUE
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            conv = action.type or str
            try:
                defaults[key] = conv(value)
            except ValueError:
                raise CliError(f"bad value for config key {key!r}: {value!r}") from None
            if action.choices and defaults[key] not in action.choices:
                raise CliError(f"config key {key!r} must be one of {list(action.choices)}")
    return defaults


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**_config_defaults(subparser, read_config(args.config)))
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except CliError as exc:
        print(f"altscore: error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"altscore: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, FormatError, LatticeError) as exc:
        print(f"altscore: error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        log.exception("internal error")
        return 2


if __name__ == "__main__":
    sys.exit(main())
