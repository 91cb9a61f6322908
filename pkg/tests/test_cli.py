from __future__ import annotations

import json
import warnings

import pytest

from stylekit.cli import main
from stylekit.features import REGISTRY

SRC = "def add_nums(a, b):\n    return a + b\n"

RICH = (
    "def alpha(x):\n    u = x + 1\n    v = u * 2\n    return v\n"
    "\n"
    "def beta(y):\n    p = y - 1\n    q = p * 3\n    return q\n"
)


@pytest.fixture
def files(tmp_path):
    a = tmp_path / "a.py"
    b = tmp_path / "b.py"
    a.write_text(SRC)
    b.write_text(SRC.replace("add_nums", "addNums"))
    return a, b


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_json(files, capsys):
    a, _ = files
    code, out, _ = run(capsys, "analyze", a, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "s2c-style-v1"
    assert list(doc["raw"]) == list(REGISTRY)
    assert len(doc["normalized"]) == 34


def test_analyze_csv(files, capsys):
    a, _ = files
    code, out, _ = run(capsys, "analyze", a, "--csv")
    assert code == 0
    assert out.splitlines()[0] == "kind," + ",".join(REGISTRY)


def test_analyze_json_is_single_document(files, capsys):
    a, _ = files
    _, out, _ = run(capsys, "analyze", a, "--json")
    json.loads(out)  # exactly one JSON document on stdout


def test_css_identical_files(files, capsys, tmp_path):
    a, _ = files
    twin = tmp_path / "twin.py"
    twin.write_text(SRC)
    code, out, _ = run(capsys, "css", a, twin)
    assert code == 0
    assert out.strip() == "1.0"


def test_css_json(files, capsys):
    a, b = files
    code, out, _ = run(capsys, "css", a, b, "--json")
    assert code == 0
    doc = json.loads(out)
    assert 0.0 <= doc["css"] <= 1.0


def test_diff_sections(files, capsys):
    a, b = files
    code, out, _ = run(capsys, "diff", a, b)
    assert code == 0
    assert "[naming]" in out and "[layout]" in out and "[structural]" in out
    assert "dist_camelCase" in out


def test_diff_json(files, capsys):
    a, b = files
    code, out, _ = run(capsys, "diff", a, b, "--json")
    doc = json.loads(out)
    assert set(doc) == {"naming", "layout", "structural"}
    assert len(doc["naming"]) == 14


def test_score_report(files, capsys):
    a, b = files
    code, out, _ = run(capsys, "score", "--candidate", a, "--reference", b, "--json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"css", "bleu4", "rouge1", "rouge2", "rougeL", "style_loss"}


def test_score_with_ce_adds_total(files, capsys):
    a, b = files
    code, out, _ = run(capsys, "score", "--candidate", a, "--reference", b,
                       "--json", "--ce", "2.0", "--lambda", "0.5")
    doc = json.loads(out)
    assert doc["total_loss"] == pytest.approx(2.0 + 0.5 * doc["style_loss"])


def test_unknown_flag_is_usage_error(files, capsys):
    a, _ = files
    code, _, err = run(capsys, "analyze", a, "--nope")
    assert code == 1
    assert "error" in err


def test_unknown_command_is_usage_error(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 1


def test_missing_file_is_input_error(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/f.py")
    assert code == 2
    assert "no such file" in err


def test_json_error_on_stderr_is_single_line_json(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/f.py", "--json")
    assert code == 2
    doc = json.loads(err.strip())
    assert doc["code"] == 2
    assert doc["error"] == "FileNotFoundError"


def test_corpus_roundtrip(tmp_path, capsys):
    src_dir = tmp_path / "srcs"
    src_dir.mkdir()
    (src_dir / "one.py").write_text(RICH)
    (src_dir / "two.py").write_text(RICH.replace("alpha", "gamma"))
    out_path = tmp_path / "corpus.jsonl"
    code, out, _ = run(capsys, "corpus", src_dir, "--out", out_path,
                       "--split", "train=0.5,valid=0.5", "--precompute",
                       "--seed", "3", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["records"] == 2
    assert out_path.exists()
    assert out_path.with_suffix(".jsonl.manifest.json").exists()


def test_pairs_train_embed_eval_pipeline(tmp_path, capsys):
    src_dir = tmp_path / "srcs"
    src_dir.mkdir()
    for i in range(6):
        (src_dir / f"f{i}.py").write_text(
            RICH.replace("alpha", f"al{'x' * i}").replace("beta", f"be{'y' * i}")
        )
    pairs_path = tmp_path / "pairs.jsonl"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code, out, _ = run(capsys, "pairs", src_dir, "--out", pairs_path, "--json")
    assert code == 0
    assert json.loads(out)["pairs"] >= 6

    ckpt = tmp_path / "model.ckpt"
    code, out, err = run(capsys, "train", "--pairs", pairs_path, "--out", ckpt,
                         "--epochs", "2", "--batch", "4", "--seed", "0", "--json")
    assert code == 0, err
    doc = json.loads(out)
    assert ckpt.exists()
    assert ckpt.with_suffix(".log.csv").exists()

    code, out, _ = run(capsys, "embed", src_dir / "f0.py", "--ckpt", ckpt, "--json")
    assert code == 0
    assert json.loads(out)["dim"] == 1024

    code, out, _ = run(capsys, "embed", src_dir / "f0.py", "--ckpt", ckpt,
                       "--tower", "code", "--json")
    assert json.loads(out)["dim"] == 1024

    code, out, _ = run(capsys, "eval-retrieval", "--pairs", pairs_path,
                       "--ckpt", ckpt, "--k", "3", "--json")
    assert code == 0
    doc = json.loads(out)
    assert 0.0 <= doc["recall"] <= 1.0


def test_config_file_flags_win(tmp_path, capsys, files):
    a, b = files
    cfg = tmp_path / "conf.ini"
    cfg.write_text("lambda = 0.9\nseed = 4\n")
    code, out, _ = run(capsys, "score", "--candidate", a, "--reference", b,
                       "--json", "--ce", "1.0", "--config", cfg)
    doc = json.loads(out)
    assert doc["total_loss"] == pytest.approx(1.0 + 0.9 * doc["style_loss"])
    # explicit flag beats the config value
    code, out, _ = run(capsys, "score", "--candidate", a, "--reference", b,
                       "--json", "--ce", "1.0", "--lambda", "0.0", "--config", cfg)
    doc = json.loads(out)
    assert doc["total_loss"] == pytest.approx(1.0)


def test_determinism_same_seed_same_output(tmp_path, capsys):
    src_dir = tmp_path / "srcs"
    src_dir.mkdir()
    for i in range(4):
        (src_dir / f"f{i}.py").write_text(RICH.replace("alpha", f"fn{i}"))
    outputs = []
    for _ in range(2):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code, out, _ = run(capsys, "pairs", src_dir, "--seed", "9",
                               "--max-per-file", "1")
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]
