import json

import numpy as np
import pytest

from coinseg.cli import build_parser, main
from coinseg.imagekit import read_mask, write_image, write_mask
from coinseg.segmenter import bank_from_json
from coinseg.synthgen import SynthConfig, generate


SMALL_SYNTH = {"side": 64, "num_points": 15, "num_prototypes": 3}


@pytest.fixture(scope="module")
def sample_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-sample")
    d = root / "sample"
    cfg = root / "synth.json"
    cfg.write_text(json.dumps(SMALL_SYNTH))
    assert main(["generate", "--synth", str(cfg), "--seed", "0",
                 "--out", str(d)]) == 0
    return d


# ---------------------------------------------------------------------------
# exit codes

def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "segment" in capsys.readouterr().out


def test_unknown_flag_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["segment", "--bogus"])
    assert exc.value.code == 1


def test_missing_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_bad_flag_type_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["segment", "--image", "x.png", "--prototypes", "p.json",
              "--out", "m.png", "--radius", "2.5"])
    assert exc.value.code == 1


def test_missing_input_file_exits_two(tmp_path, capsys):
    code = main(["segment", "--image", str(tmp_path / "nope.png"),
                 "--prototypes", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "m.png")])
    assert code == 2
    assert "i/o error" in capsys.readouterr().err


def test_invalid_config_file_exits_one(tmp_path, sample_dir, capsys):
    bad = tmp_path / "seg.json"
    bad.write_text(json.dumps({"treshold": 0.7}))
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--config", str(bad), "--out", str(tmp_path / "m.png")])
    assert code == 1
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "m.png").exists()


def test_malformed_prototypes_exit_one(tmp_path, sample_dir):
    bad = tmp_path / "p.json"
    bad.write_text(json.dumps([[1, 2, 3]]))
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(bad), "--out", str(tmp_path / "m.png")])
    assert code == 1
    bad.write_text("{not json")
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(bad), "--out", str(tmp_path / "m.png")])
    assert code == 1


def test_hsv_on_gray_input_exits_one(tmp_path, sample_dir):
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--hsv", "--out", str(tmp_path / "m.png")])
    assert code == 1


# ---------------------------------------------------------------------------
# generate

def test_generate_writes_triple_and_is_deterministic(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL_SYNTH))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--synth", str(cfg), "--seed", "3", "--out", str(a)]) == 0
    assert main(["generate", "--synth", str(cfg), "--seed", "3", "--out", str(b)]) == 0
    for name in ("image.png", "gold.png", "prototypes.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = json.loads((a / "prototypes.json").read_text())
    assert doc["config"]["seed"] == 3
    assert len(doc["prototypes"]) == 3


def test_generate_seed_changes_output(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL_SYNTH))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--synth", str(cfg), "--seed", "1", "--out", str(a)]) == 0
    assert main(["generate", "--synth", str(cfg), "--seed", "2", "--out", str(b)]) == 0
    assert (a / "image.png").read_bytes() != (b / "image.png").read_bytes()


def test_generate_impossible_settings_exit_one(tmp_path, capsys):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps({"side": 10, "num_points": 3, "num_prototypes": 1,
                               "min_spacing": 50.0}))
    code = main(["generate", "--synth", str(cfg), "--out", str(tmp_path / "x")])
    assert code == 1
    assert not (tmp_path / "x").exists()


# ---------------------------------------------------------------------------
# segment

def test_segment_happy_path(tmp_path, sample_dir, capsys):
    out = tmp_path / "mask.png"
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--radius", "2", "--out", str(out)])
    assert code == 0
    assert "object pixels" in capsys.readouterr().out
    mask = read_mask(out)
    assert mask.shape == (64, 64)
    assert 0 < mask.sum() < mask.size


def test_segment_flag_overrides_config_file(tmp_path, sample_dir):
    cfgfile = tmp_path / "seg.json"
    cfgfile.write_text(json.dumps({"selectivity": 3.0, "threshold": 0.9}))
    bank_path = tmp_path / "bank.json"
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--config", str(cfgfile), "--threshold", "0.7",
                 "--out", str(tmp_path / "m.png"), "--save-bank", str(bank_path)])
    assert code == 0
    bank = bank_from_json(json.loads(bank_path.read_text()))
    assert bank.config.selectivity == 3.0
    assert bank.config.threshold == 0.7


def test_segment_accepts_service_style_wrappers(tmp_path, sample_dir):
    # an export document carrying config and prototypes side by side feeds
    # both flags at once
    export = tmp_path / "export.json"
    doc = {"prototypes": [[32, 30], [20, 22]],
           "config": {"selectivity": 2.0, "threshold": 0.6, "radius": 2,
                      "decay": 0.0}}
    export.write_text(json.dumps(doc))
    code = main(["segment", "--image", str(sample_dir / "image.png"),
                 "--prototypes", str(export), "--config", str(export),
                 "--out", str(tmp_path / "m.png")])
    assert code == 0
    assert read_mask(tmp_path / "m.png").shape == (64, 64)


def test_segment_is_deterministic(tmp_path, sample_dir):
    outs = []
    for name in ("m1.png", "m2.png"):
        out = tmp_path / name
        assert main(["segment", "--image", str(sample_dir / "image.png"),
                     "--prototypes", str(sample_dir / "prototypes.json"),
                     "--radius", "2", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


# ---------------------------------------------------------------------------
# evaluate

def test_evaluate_pair_mode(tmp_path, sample_dir, capsys):
    gold = sample_dir / "gold.png"
    out = tmp_path / "report.json"
    code = main(["evaluate", "--pred", str(gold), "--gold", str(gold),
                 "--out", str(out)])
    assert code == 0
    assert "ba 1.000000" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["ba"] == 1.0
    assert doc["confusion"]["fp"] == 0 and doc["confusion"]["fn"] == 0


def test_evaluate_single_class_gold_exits_one(tmp_path):
    ones = tmp_path / "ones.png"
    write_mask(ones, np.ones((8, 8), dtype=np.uint8))
    out = tmp_path / "report.json"
    code = main(["evaluate", "--pred", str(ones), "--gold", str(ones),
                 "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_evaluate_pair_needs_both_masks(tmp_path, sample_dir):
    code = main(["evaluate", "--pred", str(sample_dir / "gold.png")])
    assert code == 1


def test_evaluate_dir_mode(tmp_path, capsys):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL_SYNTH))
    masks = tmp_path / "masks"
    masks.mkdir()
    for k in range(2):
        sample = generate(SynthConfig(seed=k, **SMALL_SYNTH))
        write_mask(masks / f"{k:04d}.png", sample.gold)
    out = tmp_path / "report.json"
    code = main(["evaluate", "--pred-dir", str(masks), "--synth", str(cfg),
                 "--count", "2", "--out", str(out)])
    assert code == 0
    assert "mean ba 1.000000" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["values"] == [1.0, 1.0]


def test_evaluate_dir_mode_needs_count(tmp_path):
    code = main(["evaluate", "--pred-dir", str(tmp_path)])
    assert code == 1


# ---------------------------------------------------------------------------
# sweep and gridsearch

def test_sweep_writes_exact_csv(tmp_path, sample_dir):
    out = tmp_path / "sweep.csv"
    svg = tmp_path / "sweep.svg"
    code = main(["sweep", "--image", str(sample_dir / "image.png"),
                 "--gold", str(sample_dir / "gold.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--radius", "2", "--parameter", "threshold",
                 "--values", "0.55,0.7,0.85", "--out", str(out),
                 "--svg", str(svg)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "parameter,value,ba"
    assert len(lines) == 4
    for line in lines[1:]:
        assert line.startswith("threshold,")
    assert svg.read_bytes()[:5] == b"<?xml"


def test_sweep_rejects_bad_values_list(tmp_path, sample_dir):
    code = main(["sweep", "--image", str(sample_dir / "image.png"),
                 "--gold", str(sample_dir / "gold.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--parameter", "threshold", "--values", "0.5,oops",
                 "--out", str(tmp_path / "s.csv")])
    assert code == 1
    assert not (tmp_path / "s.csv").exists()


def test_sweep_rejects_unknown_parameter(tmp_path, sample_dir):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--image", str(sample_dir / "image.png"),
              "--gold", str(sample_dir / "gold.png"),
              "--prototypes", str(sample_dir / "prototypes.json"),
              "--parameter", "window", "--values", "1",
              "--out", str(tmp_path / "s.csv")])
    assert exc.value.code == 1


def test_gridsearch_writes_best_config(tmp_path, sample_dir, capsys):
    out = tmp_path / "best.json"
    code = main(["gridsearch", "--image", str(sample_dir / "image.png"),
                 "--gold", str(sample_dir / "gold.png"),
                 "--prototypes", str(sample_dir / "prototypes.json"),
                 "--selectivities", "1,2", "--thresholds", "0.55,0.7",
                 "--radii", "1,2", "--decays", "0.0002", "--out", str(out)])
    assert code == 0
    assert "best ba" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert set(doc["config"]) == {"selectivity", "threshold", "radius", "decay"}
    assert 0.0 <= doc["ba"] <= 1.0
    assert doc["config"]["selectivity"] in (1.0, 2.0)


# ---------------------------------------------------------------------------
# benchmark

def test_benchmark_reports_and_artifacts(tmp_path, capsys):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL_SYNTH))
    out = tmp_path / "report.json"
    csv_path = tmp_path / "run.csv"
    svg = tmp_path / "hist.svg"
    code = main(["benchmark", "--count", "2", "--synth", str(cfg),
                 "--radius", "2", "--threshold", "0.7", "--decay", "0",
                 "--out", str(out), "--csv", str(csv_path), "--svg", str(svg)])
    assert code == 0
    assert "mean ba" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert len(doc["values"]) == 2
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "index,ba"
    assert len(lines) == 3
    assert svg.read_bytes()[:5] == b"<?xml"


def test_benchmark_records_failures_on_stderr(tmp_path, capsys):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps({"side": 10, "num_points": 2, "num_prototypes": 1,
                               "min_spacing": 50.0}))
    out = tmp_path / "report.json"
    code = main(["benchmark", "--count", "1", "--synth", str(cfg),
                 "--out", str(out)])
    assert code == 0
    assert "sample 0" in capsys.readouterr().err
    doc = json.loads(out.read_text())
    assert doc["values"] == [] and len(doc["failures"]) == 1


# ---------------------------------------------------------------------------
# parser structure

def test_parser_lists_all_subcommands():
    parser = build_parser()
    text = parser.format_help()
    for name in ("segment", "generate", "evaluate", "sweep", "gridsearch",
                 "benchmark", "serve"):
        assert name in text
