import math

import numpy as np
import pytest

from coinseg.evalsweep import (
    ConfusionCounts,
    RunReport,
    SweepSpec,
    UndefinedClassError,
    balanced_accuracy,
    confusion,
    grid_search,
    plot_histogram,
    plot_sweep,
    replace_bank_config,
    run_benchmark,
    score_mask_dir,
    sweep,
    write_sweep_csv,
)
from coinseg.imagekit import write_mask
from coinseg.segmenter import SegmenterConfig, segment, train
from coinseg.synthgen import SynthConfig, generate


# ---------------------------------------------------------------------------
# confusion and balanced accuracy

def test_confusion_hand_example():
    pred = np.array([[1, 1, 0], [0, 1, 0]])
    gold = np.array([[1, 0, 0], [1, 1, 0]])
    c = confusion(pred, gold)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 2, 1)
    assert c.total == 6


def test_ba_splits_sensitivity_and_specificity():
    # sensitivity 4/5, specificity 3/5, mean 0.7
    c = ConfusionCounts(tp=4, fn=1, tn=3, fp=2)
    assert balanced_accuracy(c) == pytest.approx(0.7, abs=1e-15)


def test_ba_perfect_and_inverted():
    gold = np.zeros((4, 4), dtype=np.uint8)
    gold[1:3, 1:3] = 1
    assert balanced_accuracy(confusion(gold, gold)) == 1.0
    assert balanced_accuracy(confusion(1 - gold, gold)) == 0.0


def test_ba_immune_to_class_imbalance():
    # tiny object, huge background: all-background prediction scores 0.5
    gold = np.zeros((50, 50), dtype=np.uint8)
    gold[0, 0] = 1
    pred = np.zeros_like(gold)
    assert balanced_accuracy(confusion(pred, gold)) == 0.5


def test_ba_complement_invariance():
    rng = np.random.default_rng(21)
    for _ in range(20):
        gold = (rng.random((9, 9)) < 0.4).astype(np.uint8)
        if gold.min() == gold.max():
            continue
        pred = (rng.random((9, 9)) < 0.5).astype(np.uint8)
        a = balanced_accuracy(confusion(pred, gold))
        b = balanced_accuracy(confusion(1 - pred, 1 - gold))
        assert a == pytest.approx(b, abs=1e-15)


def test_ba_undefined_without_both_classes():
    ones = np.ones((3, 3), dtype=np.uint8)
    with pytest.raises(UndefinedClassError) as exc:
        balanced_accuracy(confusion(ones, ones))
    assert exc.value.has_positive and not exc.value.has_negative
    zeros = np.zeros((3, 3), dtype=np.uint8)
    with pytest.raises(UndefinedClassError) as exc:
        balanced_accuracy(confusion(zeros, zeros))
    assert exc.value.has_negative and not exc.value.has_positive


def test_confusion_input_checks():
    with pytest.raises(ValueError):
        confusion(np.array([[2]]), np.array([[1]]))
    with pytest.raises(ValueError):
        confusion(np.zeros((2, 2)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        confusion(np.zeros(4), np.zeros(4))


# ---------------------------------------------------------------------------
# sweeps

def _small_sample():
    return generate(SynthConfig(side=64, num_points=15, num_prototypes=3, seed=0))


def test_sweep_single_value_matches_direct_run():
    s = _small_sample()
    base = SegmenterConfig(selectivity=2.0, threshold=0.7, radius=2, decay=0.0)
    rows = sweep(s.image, s.gold, s.prototypes, SweepSpec("threshold", (0.7,), base))
    bank = train(s.image, s.prototypes, base)
    direct = balanced_accuracy(confusion(segment(bank, s.image), s.gold))
    assert rows == [(0.7, direct)]


def test_sweep_value_order_preserved():
    s = _small_sample()
    base = SegmenterConfig(radius=2)
    values = (0.9, 0.3, 0.6)
    rows = sweep(s.image, s.gold, s.prototypes, SweepSpec("threshold", values, base))
    assert tuple(v for v, _ in rows) == values


def test_sweep_retrains_for_radius():
    s = _small_sample()
    base = SegmenterConfig(threshold=0.7, decay=0.0)
    rows = sweep(s.image, s.gold, s.prototypes, SweepSpec("radius", (1, 2, 3), base))
    assert len(rows) == 3
    for _, ba in rows:
        assert 0.0 <= ba <= 1.0


def test_sweep_selectivity_golden_values():
    # frozen reference run: seed 0 sample, documented working point; any
    # drift in generator or engine numerics shows up here first
    s = generate(SynthConfig(seed=0))
    base = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)
    rows = sweep(s.image, s.gold, s.prototypes,
                 SweepSpec("selectivity", (1.0, 2.0, 3.0), base))
    expect = (0.9503117406242108, 0.8640449659474939, 0.8037390874649974)
    for (_, got), want in zip(rows, expect):
        assert got == pytest.approx(want, abs=1e-12)


def test_sweep_spec_validation():
    base = SegmenterConfig()
    with pytest.raises(ValueError):
        SweepSpec("window", (1,), base)
    with pytest.raises(ValueError):
        SweepSpec("radius", (), base)


def test_sweep_csv_format(tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, "threshold", [(0.5, 0.875), (0.6, 0.75)])
    lines = path.read_text().splitlines()
    assert lines[0] == "parameter,value,ba"
    assert lines[1] == "threshold,0.5,0.875"
    assert lines[2] == "threshold,0.6,0.75"


# ---------------------------------------------------------------------------
# grid search

def test_grid_search_dominates_every_cell():
    s = _small_sample()
    sels = (1.0, 2.0)
    thrs = (0.55, 0.7, 0.85)
    rads = (1, 2)
    decs = (0.0, 1 / 500)
    best_cfg, best_ba = grid_search(s.image, s.gold, s.prototypes,
                                    selectivities=sels, thresholds=thrs,
                                    radii=rads, decays=decs)
    seen = []
    for sel in sels:
        for thr in thrs:
            for rad in rads:
                for dec in decs:
                    cfg = SegmenterConfig(sel, thr, rad, dec)
                    bank = train(s.image, s.prototypes, cfg)
                    ba = balanced_accuracy(confusion(segment(bank, s.image), s.gold))
                    seen.append((ba, cfg))
    assert best_ba == max(ba for ba, _ in seen)
    exhaustive_winner = min(
        (cfg for ba, cfg in seen if ba == best_ba),
        key=lambda c: (c.selectivity, c.threshold, c.radius, c.decay),
    )
    assert best_cfg == exhaustive_winner


def test_grid_search_tie_breaks_to_smallest_tuple():
    # a perfectly separable two-level image: many cells reach ba 1.0, the
    # reported winner must be the lexicographically smallest one
    img_levels = np.full((24, 24), 65.0)
    img_levels[6:18, 6:18] = 165.0
    from coinseg.imagekit import RasterImage

    img = RasterImage(img_levels / 255.0, "gray")
    gold = np.zeros((24, 24), dtype=np.uint8)
    gold[6:18, 6:18] = 1
    cfg, ba = grid_search(img, gold, [(11, 11), (12, 12)],
                          selectivities=(2.0, 3.0), thresholds=(0.65, 0.7),
                          radii=(1, 2), decays=(0.0,))
    assert ba == 1.0
    assert (cfg.selectivity, cfg.threshold, cfg.radius, cfg.decay) == (2.0, 0.65, 1, 0.0)


def test_grid_search_rejects_empty_grid():
    s = _small_sample()
    with pytest.raises(ValueError):
        grid_search(s.image, s.gold, s.prototypes, thresholds=())


def test_replace_bank_config_guards_radius():
    s = _small_sample()
    bank = train(s.image, s.prototypes, SegmenterConfig(radius=2))
    swapped = replace_bank_config(bank, SegmenterConfig(threshold=0.9, radius=2))
    assert swapped.config.threshold == 0.9
    assert swapped.neurons is bank.neurons
    with pytest.raises(ValueError):
        replace_bank_config(bank, SegmenterConfig(radius=3))


# ---------------------------------------------------------------------------
# benchmark runs

def test_noise_free_two_level_run_is_near_perfect():
    # without texture noise the samples are exactly two-valued; errors can
    # come only from boundary geometry (necks and inlets move window
    # mixtures across the threshold), so the scores are deterministic and
    # high but not exactly 1
    cfgs = [SynthConfig(texture_amplitude=0.0, prototype_margin=2, seed=s)
            for s in range(4)]
    seg = SegmenterConfig(selectivity=2.0, threshold=0.7, radius=2, decay=0.0)
    report = run_benchmark(cfgs, seg)
    expect = (0.988398691696083, 0.9853008464882178,
              0.990954193394676, 0.9829452496631605)
    assert report.failures == ()
    for got, want in zip(report.values, expect):
        assert got == pytest.approx(want, abs=1e-12)
        assert got > 0.97


def test_report_stats_recompute(tmp_path):
    cfgs = [SynthConfig(seed=s) for s in range(6)]
    seg = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)
    report = run_benchmark(cfgs, seg)
    assert len(report.values) == 6
    mean = math.fsum(report.values) / 6
    var = math.fsum((v - mean) ** 2 for v in report.values) / 6
    assert report.mean == pytest.approx(mean, abs=1e-12)
    assert report.std == pytest.approx(math.sqrt(var), abs=1e-12)
    assert math.fsum(report.histogram) == pytest.approx(1.0, abs=1e-12)
    assert len(report.histogram) == 20 and len(report.bin_edges) == 21


def test_histogram_last_bin_closed():
    report = RunReport.from_values([1.0, 1.0, 0.5])
    assert report.histogram[-1] == pytest.approx(2 / 3)
    assert report.histogram[10] == pytest.approx(1 / 3)


def test_empty_report_is_nan():
    report = RunReport.from_values([])
    assert math.isnan(report.mean) and math.isnan(report.std)
    assert report.histogram == (0.0,) * 20


def test_report_round_trips_to_dict():
    report = RunReport.from_values([0.5, 0.75], failures=[(3, "boom")])
    doc = report.to_dict()
    assert doc["values"] == [0.5, 0.75]
    assert doc["failures"] == [[3, "boom"]]


def test_redraw_never_hurts_and_helps_somewhere():
    cfgs = [SynthConfig(seed=s) for s in range(15)]
    seg = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)
    plain = run_benchmark(cfgs, seg)
    redraw = run_benchmark(cfgs, seg, redraw_threshold=0.85)
    assert len(plain.values) == len(redraw.values) == 15
    for p, r in zip(plain.values, redraw.values):
        assert r >= p
    assert any(r > p for p, r in zip(plain.values, redraw.values))


def test_benchmark_records_failures_and_continues():
    cfgs = [
        SynthConfig(seed=0),
        SynthConfig(side=10, num_points=2, num_prototypes=1, min_spacing=100.0),
        SynthConfig(seed=1),
    ]
    seg = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)
    report = run_benchmark(cfgs, seg)
    assert len(report.values) == 2
    assert len(report.failures) == 1
    assert report.failures[0][0] == 1


def test_benchmark_threaded_matches_serial():
    cfgs = [SynthConfig(seed=s) for s in range(8)]
    seg = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)
    serial = run_benchmark(cfgs, seg)
    threaded = run_benchmark(cfgs, seg, workers=4)
    assert serial.values == threaded.values


def test_benchmark_needs_configs():
    with pytest.raises(ValueError):
        run_benchmark([], SegmenterConfig())


# ---------------------------------------------------------------------------
# external mask scoring

def test_score_mask_dir_happy_and_missing(tmp_path):
    cfgs = [SynthConfig(seed=s) for s in range(3)]
    for k, cfg in enumerate(cfgs[:2]):
        sample = generate(cfg)
        write_mask(tmp_path / f"{k:04d}.png", sample.gold)
    report = score_mask_dir(cfgs, tmp_path)
    assert report.values == (1.0, 1.0)
    assert len(report.failures) == 1 and report.failures[0][0] == 2


def test_score_mask_dir_custom_pattern(tmp_path):
    cfg = SynthConfig(seed=0)
    sample = generate(cfg)
    write_mask(tmp_path / "pred-0.png", sample.gold)
    report = score_mask_dir([cfg], tmp_path, pattern="pred-{index}.png")
    assert report.values == (1.0,)


# ---------------------------------------------------------------------------
# plots

def test_plot_outputs_are_svg_and_deterministic(tmp_path):
    report = RunReport.from_values([0.7, 0.8, 0.9])
    a, b = tmp_path / "h1.svg", tmp_path / "h2.svg"
    plot_histogram(report, a)
    plot_histogram(report, b)
    head = a.read_bytes()[:5]
    assert head == b"<?xml"
    assert a.read_bytes() == b.read_bytes()

    c, d = tmp_path / "s1.svg", tmp_path / "s2.svg"
    rows = [(1.0, 0.9), (2.0, 0.86), (3.0, 0.8)]
    plot_sweep("selectivity", rows, c)
    plot_sweep("selectivity", rows, d)
    assert c.read_bytes() == d.read_bytes()
    assert c.read_bytes()[:5] == b"<?xml"
