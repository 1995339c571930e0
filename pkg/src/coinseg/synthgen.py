"""Seeded generator of synthetic benchmark samples.

Each sample is a triple: a textured gray image, its gold-standard mask,
and a handful of auto-picked prototype pixels, all derived from one seed:

1. scatter points uniformly with a minimum pairwise spacing (rejection
   sampling with a hard retry cap),
2. drop a unit impulse on each point, smooth with a truncated Gaussian,
   rescale the field to peak 1, and keep pixels at or above the mask
   threshold as object,
3. fill object and background with independently smoothed white-noise
   textures around their mean gray levels,
4. pick prototypes uniformly among the scattered points whose whole
   feature window sits inside the object mask.

One PCG64 stream drives a sample (`np.random.default_rng(seed)`), with a
fixed draw order: points, object noise, background noise, prototype
choice. Batch generation with distinct seeds is embarrassingly parallel
and bit-reproducible. Texture noise is drawn even at amplitude 0, so the
prototype choice does not move when only the amplitude changes.

Textures are quantized to the 256 gray levels before storage; writing a
sample to PNG and reading it back is lossless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .imagekit import RasterImage, erode, read_image, read_mask, write_image, write_mask
from .segmenter import window_offsets

__all__ = [
    "SynthConfig",
    "SynthSample",
    "GenerationError",
    "poisson_points",
    "make_gold",
    "make_texture",
    "pick_prototypes",
    "generate",
    "redraw_prototypes",
    "save_sample",
    "load_sample",
]

# rejection-sampling budget for point placement
DRAW_CAP = 1_000_000


class GenerationError(RuntimeError):
    """A sample could not be produced; try another seed or looser settings."""


def _as_int(name, value, minimum):
    v = value
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(f"{name} must be an integer, got {value!r}")
        v = int(v)
    if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if v < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value!r}")
    return int(v)


@dataclass(frozen=True)
class SynthConfig:
    """Everything the generator needs, seed included.

    side:              image height and width in pixels
    min_spacing:       minimum pairwise distance between scattered points
    num_points:        how many points to scatter
    blob_sigma:        smoothing std-dev that inflates points into blobs
    mask_threshold:    object cutoff on the peak-normalized blob field, [0, 1]
    num_prototypes:    how many prototype pixels to pick (<= num_points)
    object_level:      mean object gray level, [0, 255]
    background_level:  mean background gray level, [0, 255]
    object_scale:      texture smoothing std-dev inside the object
    background_scale:  texture smoothing std-dev outside it
    texture_amplitude: gray-level std-dev of both textures (0 disables noise)
    prototype_margin:  window radius a prototype must fit inside the mask;
                       match the segmentation radius used downstream
    seed:              nonnegative 64-bit seed
    """

    side: int = 128
    min_spacing: float = 6.0
    num_points: int = 60
    blob_sigma: float = 5.0
    mask_threshold: float = 0.3
    num_prototypes: int = 5
    object_level: float = 165.0
    background_level: float = 65.0
    object_scale: float = 0.7
    background_scale: float = 1.0
    texture_amplitude: float = 30.0
    prototype_margin: int = 4
    seed: int = 0

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "side", _as_int("side", self.side, 1))
        set_(self, "num_points", _as_int("num_points", self.num_points, 1))
        set_(self, "num_prototypes", _as_int("num_prototypes", self.num_prototypes, 1))
        set_(self, "prototype_margin", _as_int("prototype_margin", self.prototype_margin, 0))
        set_(self, "seed", _as_int("seed", self.seed, 0))
        for name in ("min_spacing", "blob_sigma", "mask_threshold", "object_level",
                     "background_level", "object_scale", "background_scale",
                     "texture_amplitude"):
            set_(self, name, float(getattr(self, name)))
        if self.num_prototypes > self.num_points:
            raise ValueError(
                f"num_prototypes ({self.num_prototypes}) cannot exceed "
                f"num_points ({self.num_points})"
            )
        if not self.min_spacing > 0:
            raise ValueError(f"min_spacing must be > 0, got {self.min_spacing}")
        if not 0.0 <= self.mask_threshold <= 1.0:
            raise ValueError(f"mask_threshold must lie in [0, 1], got {self.mask_threshold}")
        for name in ("object_level", "background_level"):
            v = getattr(self, name)
            if not 0.0 <= v <= 255.0:
                raise ValueError(f"{name} must lie in [0, 255], got {v}")
        for name in ("blob_sigma", "object_scale", "background_scale", "texture_amplitude"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, doc: dict, base: "SynthConfig | None" = None):
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        if base is None:
            base = cls()
        return replace(base, **doc)


@dataclass(frozen=True)
class SynthSample:
    """One generated benchmark item.

    Carries the scattered points and the config so prototype sets can be
    re-drawn later without regenerating the image.
    """

    image: RasterImage
    gold: np.ndarray
    prototypes: tuple
    points: tuple
    seed: int
    config: SynthConfig


def poisson_points(side, count, spacing, rng) -> list[tuple[int, int]]:
    """Scatter `count` integer points on a side x side grid, pairwise at
    least `spacing` apart (Euclidean), by uniform rejection sampling.

    Raises GenerationError if DRAW_CAP candidate draws cannot place them.
    """
    side = _as_int("side", side, 1)
    count = _as_int("count", count, 1)
    spacing = float(spacing)
    if not spacing > 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    spacing2 = spacing * spacing
    taken_r = np.empty(count, dtype=np.int64)
    taken_c = np.empty(count, dtype=np.int64)
    placed = 0
    for _ in range(DRAW_CAP):
        cand = rng.integers(0, side, size=2)
        r, c = int(cand[0]), int(cand[1])
        d2 = (taken_r[:placed] - r) ** 2 + (taken_c[:placed] - c) ** 2
        if placed and (d2 < spacing2).any():
            continue
        taken_r[placed] = r
        taken_c[placed] = c
        placed += 1
        if placed == count:
            return [(int(a), int(b)) for a, b in zip(taken_r, taken_c)]
    raise GenerationError(
        f"placed only {placed} of {count} points with spacing {spacing} "
        f"on a {side}x{side} grid after {DRAW_CAP} draws"
    )


def _gauss_kernel(sigma: float) -> np.ndarray:
    """Truncated 1-D Gaussian, radius ceil(3 sigma), normalized to sum 1."""
    if sigma <= 0:
        return np.ones(1)
    rad = int(math.ceil(3.0 * sigma))
    x = np.arange(-rad, rad + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _smooth(field: np.ndarray, sigma: float) -> np.ndarray:
    # separable pass with zero padding; the square truncation window makes
    # the 2-D kernel the outer product of two 1-D ones
    k = _gauss_kernel(sigma)
    out = correlate1d(field, k, axis=0, mode="constant", cval=0.0)
    return correlate1d(out, k, axis=1, mode="constant", cval=0.0)


def make_gold(points, side, blob_sigma, mask_threshold) -> np.ndarray:
    """Blob mask from impulses: smooth, peak-normalize, threshold inclusively."""
    side = _as_int("side", side, 1)
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    field = np.zeros((side, side), dtype=np.float64)
    for r, c in pts:
        field[int(r), int(c)] = 1.0
    field = _smooth(field, float(blob_sigma))
    peak = field.max()
    if peak > 0:
        field /= peak
    return (field >= float(mask_threshold)).astype(np.uint8)


def _unit_texture(rng, shape, scale: float) -> np.ndarray:
    noise = rng.standard_normal(shape)
    sm = _smooth(noise, scale)
    return sm / sm.std()


def make_texture(gold, cfg: SynthConfig, rng) -> RasterImage:
    """Fill object and background with smoothed noise around their levels.

    Draw order is fixed: object noise first, then background. Both fields
    are std-normalized after smoothing (population std), scaled by
    cfg.texture_amplitude, shifted by the region's mean level, rounded to
    whole gray levels, clipped to [0, 255], and stored as level / 255.
    """
    gold = np.asarray(gold)
    obj = _unit_texture(rng, gold.shape, cfg.object_scale)
    bck = _unit_texture(rng, gold.shape, cfg.background_scale)
    tex = np.where(
        gold == 1,
        cfg.object_level + cfg.texture_amplitude * obj,
        cfg.background_level + cfg.texture_amplitude * bck,
    )
    levels = np.clip(np.rint(tex), 0.0, 255.0)
    return RasterImage(levels / 255.0, "gray")


def pick_prototypes(gold, points, count, margin, rng) -> list[tuple[int, int]]:
    """Uniformly pick `count` of the given points, restricted to points
    whose whole radius-`margin` window lies inside the mask.

    Candidates must survive `margin` cross erosions of the mask and, on
    top of that, keep their circular window clear of background: the
    erosions control city-block distance while the window is Euclidean,
    and neither test implies the other at diagonals.
    """
    gold = np.asarray(gold)
    count = _as_int("count", count, 1)
    margin = _as_int("margin", margin, 0)
    eroded = gold.astype(np.uint8)
    for _ in range(margin):
        eroded = erode(eroded)
    offs = window_offsets(margin)
    h, w = gold.shape
    cands = []
    for r, c in points:
        r, c = int(r), int(c)
        if not eroded[r, c]:
            continue
        ok = all(
            0 <= r + dr < h and 0 <= c + dc < w and gold[r + dr, c + dc]
            for dr, dc in offs
        )
        if ok:
            cands.append((r, c))
    if len(cands) < count:
        raise GenerationError(
            f"only {len(cands)} of {len(list(points))} points can host a "
            f"radius-{margin} window inside the mask; need {count}"
        )
    idx = rng.choice(len(cands), size=count, replace=False)
    return [cands[int(i)] for i in idx]


def generate(cfg: SynthConfig) -> SynthSample:
    """Produce one sample from one seed. Deterministic: a given config
    always yields the identical sample, bit for bit."""
    rng = np.random.default_rng(cfg.seed)
    points = poisson_points(cfg.side, cfg.num_points, cfg.min_spacing, rng)
    gold = make_gold(points, cfg.side, cfg.blob_sigma, cfg.mask_threshold)
    image = make_texture(gold, cfg, rng)
    prototypes = pick_prototypes(
        gold, points, cfg.num_prototypes, cfg.prototype_margin, rng
    )
    return SynthSample(
        image=image,
        gold=gold,
        prototypes=tuple(prototypes),
        points=tuple(points),
        seed=cfg.seed,
        config=cfg,
    )


def redraw_prototypes(sample: SynthSample, rng, count=None, margin=None) -> SynthSample:
    """New uniformly drawn prototype set for an existing sample; image,
    mask, and points stay untouched."""
    cfg = sample.config
    count = cfg.num_prototypes if count is None else count
    margin = cfg.prototype_margin if margin is None else margin
    fresh = pick_prototypes(sample.gold, sample.points, count, margin, rng)
    return replace(sample, prototypes=tuple(fresh))


# ---------------------------------------------------------------------------
# directory persistence: image.png + gold.png + prototypes.json

def sample_to_manifest(sample: SynthSample) -> dict:
    return {
        "prototypes": [list(p) for p in sample.prototypes],
        "points": [list(p) for p in sample.points],
        "seed": sample.seed,
        "config": sample.config.to_dict(),
    }


def save_sample(dirpath, sample: SynthSample) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    write_image(d / "image.png", sample.image)
    write_mask(d / "gold.png", sample.gold)
    doc = json.dumps(sample_to_manifest(sample), indent=2) + "\n"
    (d / "prototypes.json").write_text(doc)


def load_sample(dirpath) -> SynthSample:
    d = Path(dirpath)
    doc = json.loads((d / "prototypes.json").read_text())
    cfg = SynthConfig.from_dict(doc["config"])
    return SynthSample(
        image=read_image(d / "image.png"),
        gold=read_mask(d / "gold.png"),
        prototypes=tuple((int(r), int(c)) for r, c in doc["prototypes"]),
        points=tuple((int(r), int(c)) for r, c in doc["points"]),
        seed=int(doc["seed"]),
        config=cfg,
    )
