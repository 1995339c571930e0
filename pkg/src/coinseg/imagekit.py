"""Raster images, binary masks, color conversion, and cross morphology.

Images are height x width (x3) float64 arrays with samples in [0, 1],
wrapped in :class:`RasterImage` so the color space travels with the data.
Masks are bare 2-D uint8 arrays over {0, 1}; 1 is object, 0 is background.

Morphology uses the 3x3 cross (a pixel plus its 4-neighbors). Pixels
outside the image count as background for every operation here, so object
pixels touching the image frame erode away and count as border pixels.

File I/O accepts 8-bit PNG and binary PGM/PPM; samples map to [0, 1] as
v / 255. Masks are written as PNG with values {0, 255}.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "RasterImage",
    "rgb_to_hsv",
    "rgb_to_gray",
    "dilate",
    "erode",
    "borders",
    "read_image",
    "write_image",
    "decode_image",
    "read_mask",
    "write_mask",
    "encode_mask_png",
    "decode_mask",
]

_COLORSPACES = ("gray", "rgb", "hsv")


@dataclass(frozen=True)
class RasterImage:
    """An immutable raster image.

    samples: (height, width) for gray, (height, width, 3) for rgb/hsv,
    float64 in [0, 1]. The array is copied on construction and marked
    read-only, so instances are safe to share across threads.
    """

    samples: np.ndarray
    colorspace: str = "gray"

    def __post_init__(self):
        if self.colorspace not in _COLORSPACES:
            raise ValueError(f"unknown colorspace {self.colorspace!r}")
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if self.colorspace == "gray":
            if arr.ndim != 2:
                raise ValueError("gray image needs a (height, width) array")
        else:
            if arr.ndim != 3 or arr.shape[2] != 3:
                raise ValueError(
                    f"{self.colorspace} image needs a (height, width, 3) array"
                )
        if arr.size == 0:
            raise ValueError("image must contain at least one pixel")
        if not np.isfinite(arr).all():
            raise ValueError("image samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image samples must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 2 else 3


def rgb_to_hsv(img: RasterImage) -> RasterImage:
    """Hexcone RGB to HSV conversion; hue stored as degrees / 360.

    All three output channels lie in [0, 1]. Achromatic pixels get
    hue 0 and saturation 0. Hue is stored linearly; 0.01 and 0.99 are
    numerically far apart even though the colors are close.
    """
    if img.colorspace != "rgb":
        raise TypeError(f"expected an rgb image, got {img.colorspace}")
    rgb = img.samples
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    chromatic = delta > 0.0

    sat = np.zeros_like(maxc)
    np.divide(delta, maxc, out=sat, where=maxc > 0.0)

    # per-channel distances from the max, defined only where chromatic
    safe = np.where(chromatic, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    hue6 = np.select([r == maxc, g == maxc], [bc - gc, 2.0 + rc - bc], 4.0 + gc - rc)
    hue = np.where(chromatic, (hue6 / 6.0) % 1.0, 0.0)

    out = np.stack([hue, sat, maxc], axis=-1)
    return RasterImage(np.clip(out, 0.0, 1.0), "hsv")


def rgb_to_gray(img: RasterImage, weights=(0.299, 0.587, 0.114)) -> RasterImage:
    """Luminance conversion with BT.601 weights by default."""
    if img.colorspace != "rgb":
        raise TypeError(f"expected an rgb image, got {img.colorspace}")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,) or (w < 0).any():
        raise ValueError("weights must be three nonnegative numbers")
    gray = img.samples @ w
    return RasterImage(np.clip(gray, 0.0, 1.0), "gray")


def _as_mask(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("mask must be a nonempty 2-D array")
    if arr.dtype != np.bool_ and not np.isin(arr, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    return arr.astype(np.uint8, copy=False)


def _shifted(m: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """m translated by (dr, dc), vacated cells filled with background."""
    out = np.zeros_like(m)
    h, w = m.shape
    rs_dst = slice(max(dr, 0), h + min(dr, 0))
    cs_dst = slice(max(dc, 0), w + min(dc, 0))
    rs_src = slice(max(-dr, 0), h + min(-dr, 0))
    cs_src = slice(max(-dc, 0), w + min(-dc, 0))
    out[rs_dst, cs_dst] = m[rs_src, cs_src]
    return out


_CROSS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def dilate(mask) -> np.ndarray:
    """Cross dilation: a pixel turns 1 if it or any 4-neighbor is 1."""
    m = _as_mask(mask)
    out = m.copy()
    for dr, dc in _CROSS:
        out |= _shifted(m, dr, dc)
    return out


def erode(mask) -> np.ndarray:
    """Cross erosion: a pixel survives only if it and all 4-neighbors are 1.

    Out-of-image neighbors are background, so object pixels on the image
    frame never survive. On any canvas whose frame is background this
    equals the complement of the dilated complement.
    """
    m = _as_mask(mask)
    out = m.copy()
    for dr, dc in _CROSS:
        out &= _shifted(m, dr, dc)
    return out


def borders(mask) -> np.ndarray:
    """Object pixels with at least one background 4-neighbor.

    The image frame counts as adjacent to background. Equivalent to
    mask minus erode(mask) for the cross element.
    """
    m = _as_mask(mask)
    return m & (1 - erode(m))


# ---------------------------------------------------------------------------
# file I/O


def _from_pil(im: Image.Image) -> RasterImage:
    if im.mode == "1":
        im = im.convert("L")
    if im.mode == "L":
        space = "gray"
    elif im.mode == "RGB":
        space = "rgb"
    else:
        raise ValueError(
            f"unsupported image mode {im.mode!r}; need 8-bit gray or RGB"
        )
    arr = np.asarray(im, dtype=np.float64) / 255.0
    return RasterImage(arr, space)


def read_image(path) -> RasterImage:
    """Read an 8-bit PNG / PGM / PPM file into a RasterImage."""
    with Image.open(path) as im:
        im.load()
        return _from_pil(im)


def decode_image(data: bytes) -> RasterImage:
    """Decode in-memory PNG / PGM / PPM bytes. Raises ValueError on junk."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            return _from_pil(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"could not decode image payload: {exc}") from None


def _to_pil(img: RasterImage) -> Image.Image:
    if img.colorspace == "hsv":
        raise ValueError("refusing to write an hsv image; convert first")
    data = np.rint(img.samples * 255.0).astype(np.uint8)
    return Image.fromarray(data, "L" if img.colorspace == "gray" else "RGB")


def _save(im: Image.Image, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        im.save(path, format="PNG")
    elif suffix in (".pgm", ".ppm"):
        im.save(path, format="PPM")
    else:
        raise ValueError(f"unsupported output format {suffix!r}")


def write_image(path, img: RasterImage) -> None:
    """Write gray or rgb samples as 8-bit PNG / PGM / PPM (by suffix).

    Samples are quantized with round-half-even to the nearest of the 256
    levels; values already on the k/255 grid round-trip exactly.
    """
    _save(_to_pil(img), path)


def read_mask(path) -> np.ndarray:
    """Read a {0, 255} 8-bit image file as a {0, 1} mask."""
    with Image.open(path) as im:
        im.load()
        return decode_mask_pil(im)


def decode_mask_pil(im: Image.Image) -> np.ndarray:
    if im.mode == "1":
        im = im.convert("L")
    if im.mode != "L":
        raise ValueError(f"mask file must be single channel, got mode {im.mode!r}")
    arr = np.asarray(im, dtype=np.uint8)
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        raise ValueError(
            f"mask file holds {int(bad.sum())} pixels outside {{0, 255}}"
        )
    return (arr == 255).astype(np.uint8)


def decode_mask(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            return decode_mask_pil(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"could not decode mask payload: {exc}") from None


def write_mask(path, mask) -> None:
    """Write a {0, 1} mask as an 8-bit {0, 255} PNG (or PGM)."""
    m = _as_mask(mask)
    _save(Image.fromarray(m * np.uint8(255), "L"), path)


def encode_mask_png(mask) -> bytes:
    """PNG bytes for a {0, 1} mask; identical to what write_mask puts on disk."""
    m = _as_mask(mask)
    buf = io.BytesIO()
    Image.fromarray(m * np.uint8(255), "L").save(buf, format="PNG")
    return buf.getvalue()
