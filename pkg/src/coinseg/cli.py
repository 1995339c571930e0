"""Command-line front end.

Subcommands: segment, generate, evaluate, sweep, gridsearch, benchmark,
serve. Exit code 0 on success, 1 on a validation problem (bad flags, bad
config values, impossible generation settings), 2 on an I/O problem
(missing, unreadable, undecodable, or unwritable files).

Config files are JSON objects whose keys mirror the dataclass field names
(SegmenterConfig: selectivity, threshold, radius, decay; SynthConfig: see
`coinseg.synthgen`). Flags override file values. A service export document
or a generated prototypes.json works directly for both --config and
--prototypes: the relevant sub-object is unwrapped automatically.

Prototype files are a JSON list of [row, col] integer pairs, row-major
with the origin at the top-left pixel, or an object carrying such a list
under "prototypes".

Every output is staged in memory and written only after the whole command
has succeeded, via a temp file in the target directory renamed into
place. A failing command leaves no new files behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import evalsweep, imagekit, segmenter, synthgen

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Stage:
    """Deferred output writer: nothing touches disk until commit()."""

    def __init__(self):
        self._jobs = []

    def add(self, path, writer):
        self._jobs.append((Path(path), writer))

    def add_text(self, path, text: str):
        self.add(path, lambda p, t=text: Path(p).write_text(t))

    def commit(self):
        for path, writer in self._jobs:
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f".tmp-{os.getpid()}-{path.name}")
            try:
                writer(tmp)
                os.replace(tmp, path)
            finally:
                if tmp.exists():
                    tmp.unlink(missing_ok=True)


def _load_json(path):
    return json.loads(Path(path).read_text())


def _unwrap(doc: dict, key: str):
    """Dig `key` out of wrapper documents (service exports, sample manifests)."""
    if isinstance(doc, dict) and key in doc and isinstance(doc[key], (dict, list)):
        return doc[key]
    return doc


def _load_prototypes(path) -> list[tuple[int, int]]:
    doc = _unwrap(_load_json(path), "prototypes")
    if not isinstance(doc, list) or not doc:
        raise ValueError(f"{path}: expected a nonempty JSON list of [row, col] pairs")
    out = []
    for item in doc:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(v, int) for v in item)):
            raise ValueError(f"{path}: prototype entries must be [row, col] integers")
        out.append((item[0], item[1]))
    return out


_SEG_FIELDS = ("selectivity", "threshold", "radius", "decay")


def _seg_config(args) -> segmenter.SegmenterConfig:
    base = segmenter.SegmenterConfig()
    if getattr(args, "config", None):
        doc = _unwrap(_load_json(args.config), "config")
        base = segmenter.SegmenterConfig.from_dict(doc, base)
    overrides = {
        name: getattr(args, name)
        for name in _SEG_FIELDS
        if getattr(args, name, None) is not None
    }
    return replace(base, **overrides)


def _synth_config(args) -> synthgen.SynthConfig:
    base = synthgen.SynthConfig()
    if getattr(args, "synth", None):
        doc = _unwrap(_load_json(args.synth), "config")
        base = synthgen.SynthConfig.from_dict(doc, base)
    if getattr(args, "seed", None) is not None:
        base = replace(base, seed=args.seed)
    if getattr(args, "texture_amplitude", None) is not None:
        base = replace(base, texture_amplitude=args.texture_amplitude)
    return base


def _add_seg_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON segmenter config (or a service export)")
    p.add_argument("--selectivity", type=float, help="override: similarity exponent")
    p.add_argument("--threshold", type=float, help="override: score threshold")
    p.add_argument("--radius", type=int, help="override: window radius")
    p.add_argument("--decay", type=float, help="override: distance decay rate")


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_segment(args) -> int:
    cfg = _seg_config(args)
    prototypes = _load_prototypes(args.prototypes)
    img = imagekit.read_image(args.image)
    if args.hsv:
        if img.colorspace != "rgb":
            raise ValueError(f"--hsv needs an RGB input, got {img.colorspace}")
        img = imagekit.rgb_to_hsv(img)
    bank = segmenter.train(img, prototypes, cfg)
    mask = segmenter.segment(bank, img)
    stage = _Stage()
    stage.add(args.out, lambda p: imagekit.write_mask(p, mask))
    if args.save_bank:
        stage.add_text(args.save_bank,
                       json.dumps(segmenter.bank_to_json(bank), indent=2) + "\n")
    stage.commit()
    print(f"wrote {args.out} ({int(mask.sum())} object pixels)")
    return EXIT_OK


def _cmd_generate(args) -> int:
    cfg = _synth_config(args)
    sample = synthgen.generate(cfg)
    stage = _Stage()
    out = Path(args.out)
    stage.add(out / "image.png", lambda p: imagekit.write_image(p, sample.image))
    stage.add(out / "gold.png", lambda p: imagekit.write_mask(p, sample.gold))
    stage.add_text(out / "prototypes.json",
                   json.dumps(synthgen.sample_to_manifest(sample), indent=2) + "\n")
    stage.commit()
    print(f"wrote sample (seed {cfg.seed}) to {out}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    stage = _Stage()
    if args.pred_dir:
        if not args.count:
            raise ValueError("--pred-dir mode needs --count")
        base = _synth_config(args)
        cfgs = [replace(base, seed=args.seed0 + k) for k in range(args.count)]
        report = evalsweep.score_mask_dir(cfgs, args.pred_dir, pattern=args.pattern)
        if args.out:
            stage.add_text(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
        stage.commit()
        scored = len(report.values)
        if scored:
            print(f"scored {scored} mask(s); mean ba {report.mean:.6f}")
        else:
            print("scored 0 masks")
        for k, msg in report.failures:
            print(f"sample {k}: {msg}", file=sys.stderr)
        return EXIT_OK
    if not (args.pred and args.gold):
        raise ValueError("need --pred and --gold (or --pred-dir)")
    pred = imagekit.read_mask(args.pred)
    gold = imagekit.read_mask(args.gold)
    counts = evalsweep.confusion(pred, gold)
    ba = evalsweep.balanced_accuracy(counts)
    if args.out:
        doc = {"ba": ba, "confusion": {"tp": counts.tp, "fp": counts.fp,
                                       "tn": counts.tn, "fn": counts.fn}}
        stage.add_text(args.out, json.dumps(doc, indent=2) + "\n")
    stage.commit()
    print(f"ba {ba:.6f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _seg_config(args)
    values = _floats(args.values)
    spec = evalsweep.SweepSpec(parameter=args.parameter, values=tuple(values), base=base)
    img = imagekit.read_image(args.image)
    gold = imagekit.read_mask(args.gold)
    prototypes = _load_prototypes(args.prototypes)
    rows = evalsweep.sweep(img, gold, prototypes, spec)
    stage = _Stage()
    stage.add(args.out, lambda p: evalsweep.write_sweep_csv(p, args.parameter, rows))
    if args.svg:
        stage.add(args.svg, lambda p: evalsweep.plot_sweep(args.parameter, rows, p))
    stage.commit()
    print(f"swept {args.parameter} over {len(rows)} value(s); "
          f"best ba {max(ba for _, ba in rows):.6f}")
    return EXIT_OK


def _cmd_gridsearch(args) -> int:
    img = imagekit.read_image(args.image)
    gold = imagekit.read_mask(args.gold)
    prototypes = _load_prototypes(args.prototypes)
    grids = {}
    if args.selectivities:
        grids["selectivities"] = _floats(args.selectivities)
    if args.thresholds:
        grids["thresholds"] = _floats(args.thresholds)
    if args.radii:
        grids["radii"] = [int(v) for v in _floats(args.radii)]
    if args.decays:
        grids["decays"] = _floats(args.decays)
    cfg, ba = evalsweep.grid_search(img, gold, prototypes, **grids)
    stage = _Stage()
    if args.out:
        stage.add_text(args.out,
                       json.dumps({"config": cfg.to_dict(), "ba": ba}, indent=2) + "\n")
    stage.commit()
    print(f"best ba {ba:.6f} at selectivity={cfg.selectivity} "
          f"threshold={cfg.threshold} radius={cfg.radius} decay={cfg.decay}")
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    base = _synth_config(args)
    seg = _seg_config(args)
    cfgs = [replace(base, seed=args.seed0 + k) for k in range(args.count)]
    report = evalsweep.run_benchmark(
        cfgs, seg,
        redraw_threshold=args.redraw_threshold,
        workers=args.threads,
    )
    stage = _Stage()
    if args.out:
        stage.add_text(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    if args.csv:
        lines = ["index,ba"] + [f"{k},{ba}" for k, ba in enumerate(report.values)]
        stage.add_text(args.csv, "\n".join(lines) + "\n")
    if args.svg:
        stage.add(args.svg, lambda p: evalsweep.plot_histogram(report, p))
    stage.commit()
    if report.values:
        print(f"{len(report.values)} sample(s): mean ba {report.mean:.6f}, "
              f"std {report.std:.6f}")
    for k, msg in report.failures:
        print(f"sample {k}: {msg}", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = args.ui_dir
    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coinseg",
                     description="prototype-neuron image segmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[], help="segment one image",
                       description="Train on prototype pixels and write the mask.")
    p.add_argument("--image", required=True, help="input PNG/PGM/PPM")
    p.add_argument("--prototypes", required=True, help="JSON [row, col] list")
    _add_seg_flags(p)
    p.add_argument("--hsv", action="store_true",
                   help="convert an RGB input to HSV before segmenting")
    p.add_argument("--out", required=True, help="output mask PNG")
    p.add_argument("--save-bank", help="also write the trained bank as JSON")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("generate", help="generate one synthetic sample",
                       description="Write image.png, gold.png, prototypes.json.")
    p.add_argument("--synth", help="JSON generator config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--texture-amplitude", type=float, dest="texture_amplitude",
                   help="override the texture amplitude")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="score masks against gold standards")
    p.add_argument("--pred", help="predicted mask PNG")
    p.add_argument("--gold", help="gold mask PNG")
    p.add_argument("--pred-dir", help="directory of NNNN.png masks to score "
                                      "against regenerated gold standards")
    p.add_argument("--synth", help="generator config for --pred-dir mode")
    p.add_argument("--count", type=int, help="sample count for --pred-dir mode")
    p.add_argument("--seed0", type=int, default=0, help="first seed (default 0)")
    p.add_argument("--pattern", default="{index:04d}.png",
                   help="mask filename pattern (default %(default)s)")
    p.add_argument("--out", help="write a JSON report here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="vary one parameter, score each value")
    p.add_argument("--image", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--prototypes", required=True)
    _add_seg_flags(p)
    p.add_argument("--parameter", required=True, choices=evalsweep.SWEEPABLE)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="output CSV (parameter,value,ba)")
    p.add_argument("--svg", help="also plot the curve here")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gridsearch", help="exhaustive search over parameter grids")
    p.add_argument("--image", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--prototypes", required=True)
    p.add_argument("--selectivities", help="comma-separated grid")
    p.add_argument("--thresholds", help="comma-separated grid")
    p.add_argument("--radii", help="comma-separated grid")
    p.add_argument("--decays", help="comma-separated grid")
    p.add_argument("--out", help="write the best config + ba as JSON")
    p.set_defaults(func=_cmd_gridsearch)

    p = sub.add_parser("benchmark", help="generate, segment, and score a batch")
    p.add_argument("--count", type=int, required=True, help="number of samples")
    p.add_argument("--seed0", type=int, default=0, help="first seed (default 0)")
    p.add_argument("--synth", help="JSON generator config")
    p.add_argument("--texture-amplitude", type=float, dest="texture_amplitude",
                   help="override the texture amplitude")
    _add_seg_flags(p)
    p.add_argument("--redraw-threshold", type=float,
                   help="re-draw prototypes for samples scoring below this")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the batch (default 1)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--csv", help="write index,ba rows here")
    p.add_argument("--svg", help="write the histogram here")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", type=Path,
                   help="static UI directory served at /ui "
                        "(default: ./frontend/dist when present)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, synthgen.GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
