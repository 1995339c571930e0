"""Prototype-neuron segmentation engine.

Training takes an image plus a handful of user-chosen prototype pixels and
stores, per prototype, the sorted intensities of the circular window around
it. Those sorted windows act as the weights of one neuron each. To segment,
every image pixel gets its own sorted window and each neuron scores it with

    score_k = (coincidence(features, weights_k, selectivity)
               + exp(-distance_k * decay)) / 2

where distance_k is the Euclidean pixel distance to neuron k's prototype.
The pixel keeps the best neuron score, and the output mask marks pixels
whose score reaches the threshold. Thresholding the max is the same as
OR-ing the per-neuron decisions.

Geometry and encoding conventions:

* window = all integer offsets (drow, dcol) with drow^2 + dcol^2 <= radius^2,
  enumerated row-major; radius 2 gives 13 offsets.
* window samples are sorted per channel, channels concatenated in image
  order, so a 3-channel radius-2 vector has 39 components. Sorting buys
  invariance to spatial shuffling inside the window.
* windows reaching past the image edge replicate the nearest edge pixel.
* the score comparison is inclusive (score >= threshold).

The vectorized scorer and any straightforward per-pixel reimplementation
agree bit for bit as long as powers go through np.power (see similarity).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import similarity

__all__ = [
    "SegmenterConfig",
    "PrototypeNeuron",
    "NeuronBank",
    "window_offsets",
    "extract_features",
    "train",
    "distance_relevance",
    "pixel_score",
    "score_map",
    "segment",
    "bank_to_json",
    "bank_from_json",
    "save_bank",
    "load_bank",
]


def _as_radius(value) -> int:
    r = value
    if isinstance(r, float):
        if not r.is_integer():
            raise ValueError(f"radius must be an integer, got {value!r}")
        r = int(r)
    if not isinstance(r, (int, np.integer)) or isinstance(r, bool):
        raise ValueError(f"radius must be an integer, got {value!r}")
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {value!r}")
    return int(r)


@dataclass(frozen=True)
class SegmenterConfig:
    """The four knobs of the engine.

    selectivity: exponent sharpening the similarity comparison, >= 0
    threshold:   acceptance level for pixel scores, in [0, 1]
    radius:      feature window radius in pixels, integer >= 0
    decay:       distance penalty rate per pixel, >= 0 (0 disables it)

    Defaults are the documented working point for gray real-world images.
    """

    selectivity: float = 2.0
    threshold: float = 0.55
    radius: int = 3
    decay: float = 1.0 / 5000.0

    def __post_init__(self):
        object.__setattr__(self, "selectivity", float(self.selectivity))
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "radius", _as_radius(self.radius))
        object.__setattr__(self, "decay", float(self.decay))
        if not math.isfinite(self.selectivity) or self.selectivity < 0:
            raise ValueError(f"selectivity must be >= 0, got {self.selectivity}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if not math.isfinite(self.decay) or self.decay < 0:
            raise ValueError(f"decay must be >= 0, got {self.decay}")

    def to_dict(self) -> dict:
        return {
            "selectivity": self.selectivity,
            "threshold": self.threshold,
            "radius": self.radius,
            "decay": self.decay,
        }

    @classmethod
    def from_dict(cls, doc: dict, base: "SegmenterConfig | None" = None):
        """Build a config from a JSON-style dict, optionally over a base.

        Unknown keys are rejected so typos do not silently fall back to
        defaults.
        """
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
        known = {"selectivity", "threshold", "radius", "decay"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        if base is None:
            base = cls()
        return replace(base, **doc)


@dataclass(frozen=True)
class PrototypeNeuron:
    """One trained unit: its prototype pixel and the sorted window weights."""

    position: tuple[int, int]
    weights: np.ndarray

    def __post_init__(self):
        pos = (int(self.position[0]), int(self.position[1]))
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D vector")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ValueError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class NeuronBank:
    """Immutable bundle of trained neurons plus the config they were built with."""

    neurons: tuple
    config: SegmenterConfig
    channels: int = 1

    def __post_init__(self):
        neurons = tuple(self.neurons)
        if not neurons:
            raise ValueError("a neuron bank needs at least one neuron")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        per_channel = len(window_offsets(self.config.radius))
        expect = self.channels * per_channel
        for n in neurons:
            if n.weights.size != expect:
                raise ValueError(
                    f"neuron at {n.position} has {n.weights.size} weights, "
                    f"expected {expect} for radius {self.config.radius} and "
                    f"{self.channels} channel(s)"
                )
            blocks = n.weights.reshape(self.channels, per_channel)
            if (np.diff(blocks, axis=1) < 0).any():
                raise ValueError(
                    f"neuron at {n.position}: weights must be sorted per channel"
                )
        object.__setattr__(self, "neurons", neurons)


def window_offsets(radius) -> list[tuple[int, int]]:
    """Integer offsets (drow, dcol) with drow^2 + dcol^2 <= radius^2.

    Row-major order, so the center appears in the middle of the list.
    Radius 0 gives [(0, 0)], radius 1 the cross, radius 2 the familiar
    13-pixel disc.
    """
    r = _as_radius(radius)
    rr = r * r
    return [
        (dr, dc)
        for dr in range(-r, r + 1)
        for dc in range(-r, r + 1)
        if dr * dr + dc * dc <= rr
    ]


def _planes(img) -> np.ndarray:
    s = img.samples
    return s[:, :, None] if s.ndim == 2 else s


def extract_features(img, position, radius) -> np.ndarray:
    """Sorted window around one pixel, per channel, channels concatenated.

    Window coordinates falling outside the image clamp to the nearest
    valid pixel. Returns a float64 vector of length
    channels * len(window_offsets(radius)).
    """
    r = _as_radius(radius)
    row, col = int(position[0]), int(position[1])
    h, w = img.height, img.width
    if not (0 <= row < h and 0 <= col < w):
        raise IndexError(f"position {position} outside {h}x{w} image")
    offs = window_offsets(r)
    rows = np.clip([row + dr for dr, _ in offs], 0, h - 1)
    cols = np.clip([col + dc for _, dc in offs], 0, w - 1)
    planes = _planes(img)
    parts = [np.sort(planes[rows, cols, c]) for c in range(planes.shape[2])]
    return np.concatenate(parts)


def train(img, prototypes, config: SegmenterConfig) -> NeuronBank:
    """Turn prototype pixels into a neuron bank.

    One neuron per prototype; weights are that prototype's feature vector
    on the given image at config.radius.
    """
    protos = list(prototypes)
    if not protos:
        raise ValueError("need at least one prototype position")
    neurons = []
    for pos in protos:
        row, col = int(pos[0]), int(pos[1])
        if not (0 <= row < img.height and 0 <= col < img.width):
            raise IndexError(
                f"prototype {tuple(pos)} outside {img.height}x{img.width} image"
            )
        weights = extract_features(img, (row, col), config.radius)
        neurons.append(PrototypeNeuron((row, col), weights))
    return NeuronBank(tuple(neurons), config, img.channels)


def distance_relevance(dist: float, decay: float) -> float:
    """exp(-dist * decay): 1 at the prototype, sliding toward 0 with distance."""
    d = float(dist)
    a = float(decay)
    if d < 0 or a < 0:
        raise ValueError("distance and decay must be >= 0")
    return float(np.exp(-(np.float64(d) * np.float64(a))))


def _check_channels(bank: NeuronBank, img) -> None:
    if img.channels != bank.channels:
        raise TypeError(
            f"bank was trained on {bank.channels} channel(s), "
            f"image has {img.channels}"
        )


def _row_sums(a: np.ndarray) -> np.ndarray:
    """Per-row sums with the same left-to-right association as chain_sum.

    ``a.sum(axis=1)`` would group terms differently from a 1-D sum of the
    same row, and the per-pixel scalar path must match this bit for bit.
    """
    acc = a[:, 0].copy()
    for j in range(1, a.shape[1]):
        acc += a[:, j]
    return acc


def _feature_grid(img, radius: int) -> np.ndarray:
    """Sorted window vectors for every pixel, shape (height*width, length)."""
    planes = _planes(img)
    h, w, nch = planes.shape
    r = radius
    k = 2 * r + 1
    offs = window_offsets(r)
    flat = [(dr + r) * k + (dc + r) for dr, dc in offs]
    parts = []
    for c in range(nch):
        pad = np.pad(planes[:, :, c], r, mode="edge")
        win = sliding_window_view(pad, (k, k)).reshape(h, w, k * k)
        parts.append(np.sort(win[:, :, flat], axis=-1))
    grid = parts[0] if nch == 1 else np.concatenate(parts, axis=-1)
    return grid.reshape(h * w, len(offs) * nch)


def score_map(bank: NeuronBank, img) -> np.ndarray:
    """Best neuron score per pixel as a (height, width) float64 array."""
    _check_channels(bank, img)
    cfg = bank.config
    feats = _feature_grid(img, cfg.radius)
    sums = _row_sums(feats)
    h, w = img.height, img.width
    rows, cols = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    rows = rows.ravel()
    cols = cols.ravel()
    best = None
    for neuron in bank.neurons:
        wt = neuron.weights
        mins = _row_sums(np.minimum(feats, wt))
        maxs = _row_sums(np.maximum(feats, wt))
        # both-all-zero pairs compare as identical; other zero denominators
        # mean no overlap at all
        jac = np.ones_like(mins)
        np.divide(mins, maxs, out=jac, where=maxs > 0.0)
        denom = np.minimum(sums, similarity.chain_sum(wt))
        inter = np.where(maxs > 0.0, 0.0, 1.0)
        np.divide(mins, denom, out=inter, where=denom > 0.0)
        sim = np.power(jac, cfg.selectivity) * inter
        dr = rows - neuron.position[0]
        dc = cols - neuron.position[1]
        dist = np.sqrt(dr * dr + dc * dc)
        score = (sim + np.exp(-(dist * cfg.decay))) / 2.0
        best = score if best is None else np.maximum(best, score)
    return best.reshape(h, w)


def pixel_score(bank: NeuronBank, img, pixel) -> float:
    """Score of a single pixel, same semantics as one cell of score_map."""
    _check_channels(bank, img)
    cfg = bank.config
    row, col = int(pixel[0]), int(pixel[1])
    feats = extract_features(img, (row, col), cfg.radius)
    best = 0.0
    for neuron in bank.neurons:
        sim = similarity.coincidence(feats, neuron.weights, cfg.selectivity)
        dr = np.float64(row - neuron.position[0])
        dc = np.float64(col - neuron.position[1])
        dist = np.sqrt(dr * dr + dc * dc)
        score = (sim + float(np.exp(-(dist * np.float64(cfg.decay))))) / 2.0
        best = max(best, score)
    return float(best)


def segment(bank: NeuronBank, img) -> np.ndarray:
    """Binary mask of pixels whose best score reaches the threshold."""
    return (score_map(bank, img) >= bank.config.threshold).astype(np.uint8)


# ---------------------------------------------------------------------------
# bank (de)serialization

def bank_to_json(bank: NeuronBank) -> dict:
    """JSON-ready dict; float weights survive a dump/load round trip exactly."""
    return {
        "config": bank.config.to_dict(),
        "channels": bank.channels,
        "neurons": [
            {"position": list(n.position), "weights": n.weights.tolist()}
            for n in bank.neurons
        ],
    }


def bank_from_json(doc: dict) -> NeuronBank:
    try:
        config = SegmenterConfig.from_dict(doc["config"])
        channels = int(doc["channels"])
        neurons = tuple(
            PrototypeNeuron((n["position"][0], n["position"][1]), n["weights"])
            for n in doc["neurons"]
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed neuron bank document: {exc!r}") from None
    return NeuronBank(neurons, config, channels)


def save_bank(path, bank: NeuronBank) -> None:
    Path(path).write_text(json.dumps(bank_to_json(bank), indent=2) + "\n")


def load_bank(path) -> NeuronBank:
    return bank_from_json(json.loads(Path(path).read_text()))
