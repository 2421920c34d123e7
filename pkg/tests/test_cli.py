import shutil

import pytest

from altscore.cli import main
from altscore.formats import CtmAltBlock, parse_ctm, parse_phrase_docs
from altscore.minibench import path as bench_path
from altscore.report import parse_delimited

STM = bench_path("ref.stm")
CTM = bench_path("sys1.ctm")
GLM = bench_path("minibench.glm")
LAT = bench_path("lattices.lat")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def table_rows(out):
    lines = out.splitlines()
    return [line.split() for line in lines[2:] if line.strip()]


@pytest.fixture
def bench(tmp_path):
    for p in (STM, CTM, GLM, LAT):
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def test_score_prints_table_and_matching_tsv(capsys, bench):
    tsv = bench / "out.tsv"
    code, out, _ = run(capsys, "score", "--stm", STM, "--ctm", CTM, "--glm", GLM, "--tsv", tsv)
    assert code == 0
    (row,) = table_rows(out)
    (trow,) = parse_delimited(tsv.read_text())
    assert row == [trow[k] for k in ("system", "recording", "wer", "precision", "recall",
                                     "correct", "substituted", "deleted", "inserted")]
    assert row[0] == "sys1"


def test_score_three_systems_sorted_by_wer(capsys, bench):
    good = bench / "good.ctm"
    good.write_text("".join(f"{s.split()[0]} A {float(s.split()[3]) + 0.1:.2f} 0.10 {w}\n"
                            for s in STM.read_text().splitlines()
                            if s and not s.startswith(";;") for w in s.split()[6:]
                            if "IGNORE" not in w))
    empty = bench / "empty.ctm"
    empty.write_text("")
    code, out, _ = run(capsys, "score", "--stm", STM, "--ctm", empty, "--ctm", CTM, "--ctm", good)
    assert code == 0
    rows = table_rows(out)
    assert [r[0] for r in rows] == ["good", "sys1", "empty"]
    wers = [float(r[2]) for r in rows]
    assert wers == sorted(wers) and wers[-1] == 100.0


def test_score_stages_has_six_rows_in_order(capsys, bench):
    code, out, _ = run(capsys, "score", "--stm", STM, "--ctm", CTM, "--glm", GLM, "--stages")
    assert code == 0
    lines = out.splitlines()[2:]
    assert len(lines) == 6
    wers = [float(line.split()[-1]) for line in lines]
    assert wers == sorted(wers, reverse=True)


def test_identical_reference_and_hypothesis_is_zero_at_every_stage(capsys, bench):
    stm = bench / "same.stm"
    stm.write_text("r A s 0.00 2.00 HELLO THERE\nr A s 2.00 4.00 GOOD MORNING\n")
    ctm = bench / "same.ctm"
    ctm.write_text("r A 0.50 0.20 HELLO\nr A 1.00 0.20 THERE\nr A 2.50 0.20 GOOD\nr A 3.00 0.20 MORNING\n")
    code, out, _ = run(capsys, "score", "--stm", stm, "--ctm", ctm, "--stages")
    assert code == 0
    assert [line.split()[-1] for line in out.splitlines()[2:]] == ["0.00"] * 6


def test_report_dir_writes_tables_and_figures(capsys, bench):
    rep = bench / "rep"
    assert run(capsys, "score", "--stm", STM, "--ctm", CTM, "--report-dir", rep)[0] == 0
    assert run(capsys, "score", "--stm", STM, "--ctm", CTM, "--stages", "--report-dir", rep)[0] == 0
    code, out, _ = run(capsys, "oracle-score", "--stm", STM, "--lattices", LAT, "--level", "nbest",
                       "--level", "phrase", "--n", "1,inf", "--report-dir", rep)
    assert code == 0
    for stem in ("score", "stages", "oracle"):
        assert (rep / f"{stem}.tsv").stat().st_size > 0
        assert (rep / f"{stem}.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rows = parse_delimited((rep / "oracle.tsv").read_text())
    assert [(r["level"], r["n"]) for r in rows] == [("nbest", "1"), ("nbest", "inf"),
                                                    ("phrase", "1"), ("phrase", "inf")]
    assert [r[2] for r in table_rows(out)] == [r["wer"] for r in rows]


def test_score_is_byte_identical_across_runs_and_jobs(capsys, bench):
    outs = []
    for jobs in ("1", "1", "2"):
        code, out, _ = run(capsys, "score", "--stm", STM, "--ctm", CTM, "--glm", GLM,
                           "--per-recording", "--jobs", jobs)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_config_file_and_flags_override(capsys, bench):
    cfg = bench / "run.cfg"
    cfg.write_text(f"# settings\nstm = {STM}\nctm = {CTM}\ncosts = 1,1,1\n")
    code, via_cfg, _ = run(capsys, "score", "--config", cfg)
    assert code == 0
    _, via_flags, _ = run(capsys, "score", "--stm", STM, "--ctm", CTM, "--costs", "1,1,1")
    assert via_cfg == via_flags
    cfg.write_text(f"stm = {STM}\nctm = {CTM}\nsegmentation = single\n")
    _, single, _ = run(capsys, "score", "--config", cfg)
    _, override, _ = run(capsys, "score", "--config", cfg, "--segmentation", "per-segment")
    _, default, _ = run(capsys, "score", "--stm", STM, "--ctm", CTM)
    assert single != default
    assert override == default


@pytest.mark.parametrize("cfg_text", ["nonsense_key = 1\n", "no equals sign\n", "stages = maybe\n"])
def test_bad_config_is_an_input_error(capsys, bench, cfg_text):
    cfg = bench / "bad.cfg"
    cfg.write_text(cfg_text)
    code, _, err = run(capsys, "score", "--config", cfg)
    assert code == 1 and "error" in err


def test_input_errors_exit_one(capsys, bench):
    bad = bench / "bad.stm"
    bad.write_text("r A s 0 1 A\nr A s\n")
    code, _, err = run(capsys, "score", "--stm", bad, "--ctm", CTM)
    assert code == 1 and ":2" in err
    assert run(capsys, "score", "--stm", bench / "missing.stm", "--ctm", CTM)[0] == 1
    assert run(capsys, "score", "--stm", STM)[0] == 1
    assert run(capsys, "filter", bench / "noext")[0] == 1


def test_internal_errors_exit_two(capsys, bench, monkeypatch):
    import altscore.cli as cli

    def boom(*a, **k):
        raise RuntimeError("unexpected")

    monkeypatch.setattr(cli, "score_corpus", boom)
    assert run(capsys, "score", "--stm", STM, "--ctm", CTM)[0] == 2


def test_filter_promotes_expansion_into_alt_block(capsys, bench):
    ctm = bench / "one.ctm"
    ctm.write_text("r A 1.00 0.40 I'M\n")
    glm = bench / "im.glm"
    glm.write_text("I'M => I AM\n")
    code, out, _ = run(capsys, "filter", ctm, "--glm", glm)
    assert code == 0
    (block,) = parse_ctm(out)
    assert isinstance(block, CtmAltBlock)
    assert [[t.surface for t in alt] for alt in block.alternatives] == [["I'M"], ["I", "AM"]]
    code, out, _ = run(capsys, "filter", ctm, "--glm", glm, "--legacy-expansions")
    assert [t.surface for t in parse_ctm(out)] == ["I", "AM"]


def test_filter_with_empty_glm_is_identity(capsys, bench):
    ctm = bench / "plain.ctm"
    ctm.write_text("r A 1.00 0.40 HELLO\nr A 1.50 0.30 WORLD\n")
    glm = bench / "empty.glm"
    glm.write_text(";; nothing\n")
    code, out, _ = run(capsys, "filter", ctm, "--glm", glm)
    assert code == 0 and parse_ctm(out) == parse_ctm(ctm.read_text())
    stm = bench / "plain.stm"
    stm.write_text("r A s 0.00 2.00 HELLO WORLD\n")
    code, out, _ = run(capsys, "filter", stm, "--glm", glm)
    assert out.split()[-2:] == ["HELLO", "WORLD"]


def test_filter_stm_writes_alternations(capsys, bench):
    stm = bench / "x.stm"
    stm.write_text("r A s 0.00 2.00 I'M (%HESITATION) HERE\n")
    out_path = bench / "filtered.stm"
    assert run(capsys, "filter", stm, "--glm", GLM, "-o", out_path)[0] == 0
    assert out_path.read_text().rstrip().endswith("{ I'M / I AM } (%HESITATION) HERE")


def test_merge_stm(capsys, bench):
    code, out, _ = run(capsys, "merge-stm", STM)
    assert code == 0
    lines = [line for line in out.splitlines() if line and not line.startswith(";;")]
    assert len({tuple(line.split()[:2]) for line in lines}) == len(lines)


@pytest.mark.parametrize("command", ["lattice-nbest", "lattice-phrases", "lattice-words"])
def test_lattice_commands_emit_both_formats(capsys, bench, command):
    code, out, _ = run(capsys, command, LAT, "--n", "3", "--format", "phrases")
    assert code == 0
    docs = parse_phrase_docs(out)
    assert docs and all(max(doc.depths(), default=1) <= 3 for doc in docs)
    code, out, _ = run(capsys, command, LAT, "--n", "3")
    assert code == 0 and parse_ctm(out)


def test_oracle_score_rejects_unknown_level(capsys, bench):
    assert run(capsys, "oracle-score", "--stm", STM, "--lattices", LAT, "--level", "syllable")[0] == 1


def test_stats_for_each_file_type(capsys, bench):
    for f, key in ((STM, "segments"), (CTM, "units"), (LAT, "arcs")):
        code, out, _ = run(capsys, "stats", f)
        assert code == 0 and key in out
    phr = bench / "x.phr"
    run(capsys, "lattice-phrases", LAT, "--format", "phrases", "-o", phr)
    code, out, _ = run(capsys, "stats", phr)
    assert code == 0 and "N_max" in out
