import csv
import io
from pathlib import Path

import pytest

from jroc.cli import DEFAULT_MODELS, build_parser, main, resolve_seed
from jroc.lattice import read_points_csv

DATA = Path(__file__).parent / "data"
MODELS3 = "majority,knn:k=5,tree:depth=4"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_search_full_iris(capsys):
    code, out, _ = run(capsys, "search", "--data", "iris", "--models", MODELS3, "--seed", "1")
    assert code == 0
    pts = read_points_csv(out)
    assert len(pts) == 48
    assert [p.model_id for p in pts[::16]] == ["majority", "knn:k=5", "tree:depth=4"]
    code, again, _ = run(capsys, "search", "--data", "iris", "--models", MODELS3, "--seed", "1", "--jobs", "3")
    assert again == out


def test_search_backward_diabetes(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code, _, _ = run(capsys, "search", "--data", "diabetes", "--models", "majority,knn:k=3",
                     "--method", "bmc", "--out", str(out))
    assert code == 0
    pts = read_points_csv(out.read_text())
    assert len(pts) == 2 * 37
    code, _, _ = run(capsys, "search", "--data", "diabetes", "--models", "majority", "--method", "rnd",
                     "--sample-size", "12", "--out", str(out))
    assert code == 0 and len(read_points_csv(out.read_text())) == 12


def test_seed_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("JROC_SEED", "9")
    assert resolve_seed(None) == 9 and resolve_seed(4) == 4
    _, via_env, _ = run(capsys, "search", "--data", "iris", "--models", "knn:k=3")
    monkeypatch.delenv("JROC_SEED")
    assert resolve_seed(None) == 0 and resolve_seed(None, default=2) == 2
    _, explicit, _ = run(capsys, "search", "--data", "iris", "--models", "knn:k=3", "--seed", "9")
    assert via_env == explicit


@pytest.mark.parametrize("argv, code", [
    (["search"], 1),
    (["search", "--data", "iris", "--models", "svm"], 1),
    (["search", "--data", "iris", "--method", "forward"], 1),
    (["search", "--data", "iris", "--max-full", "3"], 1),
    (["choose", "--points", "x.csv", "--alpha", "2"], 1),
    (["search", "--data", "/nonexistent/file.csv"], 2),
    (["stats", "--cells", "/nonexistent/cells.csv"], 2),
    (["nosuch"], 1),
])
def test_exit_codes(capsys, argv, code):
    # argparse-level errors leave through SystemExit, the rest return the code
    try:
        got = main(argv)
    except SystemExit as e:
        got = e.code
    assert got == code
    capsys.readouterr()


def test_bad_points_file_is_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=1\nmodel_id,config_bitstring,tc,mc\nx,10,oops,1\n")
    code, _, err = run(capsys, "choose", "--points", str(bad), "--alpha", "0.5")
    assert code == 2 and "data error" in err


def test_internal_error_exit_code(capsys, monkeypatch):
    import jroc.cli as cli

    def boom(args):
        raise RuntimeError("boom")
    monkeypatch.setattr(cli, "cmd_choose", boom)
    code, _, err = run(capsys, "choose", "--points", "x", "--alpha", "0.5")
    assert code == 3 and "internal error" in err


@pytest.mark.parametrize("sub", ["search", "choose", "hull", "experiment", "stats", "plot"])
def test_help_lists_flags_with_defaults(sub, capsys):
    parser = build_parser()
    with pytest.raises(SystemExit) as e:
        main([sub, "--help"])
    assert e.value.code == 0
    text = capsys.readouterr().out
    subparser = parser._subparsers._group_actions[0].choices[sub]
    for action in subparser._actions:
        for opt in action.option_strings:
            assert opt in text
        if action.default not in (None, False) and action.option_strings and action.dest != "help":
            assert "default:" in text
    if sub == "search":
        assert DEFAULT_MODELS in " ".join(text.split())


@pytest.fixture(scope="module")
def points_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("pts") / "points.csv"
    assert main(["search", "--data", "iris", "--models", MODELS3, "--out", str(path)]) == 0
    return path


def test_choose(points_file, capsys):
    pts = read_points_csv(points_file.read_text())
    code, out, _ = run(capsys, "choose", "--points", str(points_file), "--alpha", "1.0")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["mc"]) == min(p.mc for p in pts)
    code, out, _ = run(capsys, "choose", "--points", str(points_file), "--alpha", "0")
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["tc"]) == 0.0


def test_hull_and_regions(points_file, capsys, tmp_path):
    regions = tmp_path / "regions.csv"
    code, out, _ = run(capsys, "hull", "--points", str(points_file), "--regions", str(regions))
    assert code == 0
    verts = read_points_csv(out)
    assert 1 <= len(verts) <= 48
    rows = list(csv.reader(regions.read_text().splitlines()[1:]))
    assert rows[0] == ["alpha_lo", "alpha_hi", "model_id"]
    assert float(rows[1][0]) == 0.0 and float(rows[-1][1]) == 1.0


def test_plot(points_file, capsys, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for out in (a, b):
        assert main(["plot", "--points", str(points_file), "--hulls", "--iso", "0.1,0.5,0.9",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes() and a.read_text().count('class="isometric"') == 3
    ev = tmp_path / "ev.svg"
    assert main(["plot", "--points", str(points_file), "--kind", "evolution", "--model", "knn:k=5",
                 "--out", str(ev)]) == 0
    assert ">ALL<" in ev.read_text()
    assert main(["plot", "--points", str(points_file), "--kind", "evolution", "--model", "nope",
                 "--out", str(ev)]) == 1
    capsys.readouterr()


def test_stats_uniform_table(capsys, tmp_path):
    fig = tmp_path / "cd.png"
    code, out, _ = run(capsys, "stats", "--cells", str(DATA / "uniform_context_cells.csv"),
                       "--critical", "10.97", "--figure", str(fig))
    assert code == 0 and "62.5118" in out and "# schema=1" in out
    assert fig.read_bytes().startswith(b"\x89PNG")
    code, out, _ = run(capsys, "stats", "--cells", str(DATA / "uniform_context_cells.csv"), "--format", "csv")
    assert out.startswith("# schema=1\n")


def test_small_experiment(capsys, tmp_path):
    out = tmp_path / "res"
    argv = ["experiment", "--data", "iris", "--models", "majority,knn:k=3", "--alphas", "0.3,0.7",
            "--reps", "2", "--out", str(out)]
    assert main(argv) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["by_alpha.csv", "by_alpha.png", "by_dataset.csv", "by_dataset.png", "cells.csv", "mdat.csv"]
    mdat = (out / "mdat.csv").read_text().splitlines()
    assert len(mdat) == 2 + 5 and mdat[1].count(",") == 4
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(argv + ["--jobs", "2"]) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first
    out2 = tmp_path / "nofig"
    assert main(argv[:-1] + [str(out2), "--no-figures"]) == 0
    assert not list(out2.glob("*.png"))
