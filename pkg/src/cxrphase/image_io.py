"""Loading, saving, resizing and normalization of grayscale images and manifests.

Images are plain 2-D float64 arrays with intensities in [0, 1] ("gray
images"); three-channel images are (H, W, 3) arrays whose channel order is
fixed as [lwpa, lpe, elea]. Supported on-disk formats are 8/16-bit PNG and
binary PGM (P5); RGB-encoded inputs are converted to luma with ITU-R BT.601
weights.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "LABELS",
    "ImageIOError",
    "ManifestError",
    "ManifestEntry",
    "Manifest",
    "load_image",
    "save_image",
    "resize_bilinear",
    "normalize_minmax",
    "read_manifest",
]

# Class vocabulary used by manifests throughout the toolchain.
LABELS = ("normal", "pneumonia", "covid19")

# BT.601 luma weights for RGB-encoded grayscale inputs.
_LUMA = np.array([0.299, 0.587, 0.114])

MIN_SIZE = 8  # pipeline minimum for ingested images


class ImageIOError(ValueError):
    """Raised for unreadable, unsupported or invalid image data."""


class ManifestError(ValueError):
    """Raised for malformed manifest files."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    subject: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def load_image(path: str | Path) -> np.ndarray:
    """Load an 8/16-bit PNG or PGM as a float64 image in [0, 1].

    Color inputs are reduced to luma (BT.601). Pixel values are mapped
    linearly from the source bit range, so full scale reads as 1.0.
    """
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in ("PNG", "PPM"):  # Pillow reports PGM as PPM
                raise ImageIOError(f"unsupported format {fmt!r}: {path}")
            arr = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise ImageIOError(f"unsupported or corrupt image file: {path}") from exc
    if arr.size == 0:
        raise ImageIOError(f"zero-sized image: {path}")

    if arr.ndim == 3:
        if arr.shape[2] not in (3, 4):
            raise ImageIOError(f"unsupported channel count {arr.shape[2]}: {path}")
        arr = arr[:, :, :3].astype(np.float64) @ _LUMA
        full_scale = 255.0
    elif arr.ndim == 2:
        if arr.dtype == np.uint8:
            full_scale = 255.0
        elif arr.dtype == np.uint16:
            full_scale = 65535.0
        elif np.issubdtype(arr.dtype, np.integer) and fmt == "PPM":
            # Pillow widens high-maxval PGM to int32 and drops the maxval.
            full_scale = float(_pgm_maxval(path))
        else:
            raise ImageIOError(f"unsupported pixel type {arr.dtype}: {path}")
        arr = arr.astype(np.float64)
    else:
        raise ImageIOError(f"unsupported image rank {arr.ndim}: {path}")

    if arr.shape[0] < MIN_SIZE or arr.shape[1] < MIN_SIZE:
        raise ImageIOError(
            f"image {arr.shape[1]}x{arr.shape[0]} below {MIN_SIZE}x{MIN_SIZE} minimum: {path}"
        )
    return arr / full_scale


def _pgm_maxval(path: Path) -> int:
    """Read the maxval token of a binary PGM header."""
    with open(path, "rb") as fh:
        data = fh.read(64)
    tokens = data.split()
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise ImageIOError(f"malformed PGM header: {path}")
    return int(tokens[3])


def save_image(img: np.ndarray, path: str | Path, bit_depth: int = 8) -> None:
    """Write a gray (H, W) or 3-channel (H, W, 3) image in [0, 1] as PNG/PGM.

    A load of the written file reproduces the pixels within one quantization
    step of the chosen depth. 16-bit output is limited to single-channel
    images (PNG has no widely supported 16-bit interleaved RGB encoder here).
    """
    path = Path(path)
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
        raise ImageIOError(f"expected (H, W) or (H, W, 3) array, got {img.shape}")
    if not np.isfinite(img).all():
        raise ImageIOError(f"non-finite pixel value, refusing to write {path}")
    if bit_depth not in (8, 16):
        raise ImageIOError(f"bit depth must be 8 or 16, got {bit_depth}")
    if not path.parent.is_dir():
        raise ImageIOError(f"parent directory does not exist: {path.parent}")

    scale = 255.0 if bit_depth == 8 else 65535.0
    quant = np.rint(np.clip(img, 0.0, 1.0) * scale)
    if img.ndim == 3:
        if bit_depth != 8:
            raise ImageIOError("3-channel output supports 8-bit depth only")
        pil = Image.fromarray(quant.astype(np.uint8), mode="RGB")
    else:
        pil = Image.fromarray(quant.astype(np.uint8 if bit_depth == 8 else np.uint16))
    pil.save(path)


def resize_bilinear(img: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Corner-aligned bilinear resampling of a gray image.

    Output corners sample the input corners exactly; resizing to the input
    shape is the identity. Output stays within the input value range.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ImageIOError(f"expected 2-D image, got shape {img.shape}")
    if new_width < 1 or new_height < 1:
        raise ImageIOError(f"target size {new_width}x{new_height} below minimum")
    h, w = img.shape
    if (new_height, new_width) == (h, w):
        return img.copy()

    ys = _corner_aligned_coords(h, new_height)
    xs = _corner_aligned_coords(w, new_width)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.minimum(y0, h - 2) if h > 1 else np.zeros_like(y0)
    x0 = np.minimum(x0, w - 2) if w > 1 else np.zeros_like(x0)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)

    top = img[np.ix_(y0, x0)] * (1.0 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1.0 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bot * fy


def _corner_aligned_coords(src: int, dst: int) -> np.ndarray:
    if dst == 1 or src == 1:
        return np.zeros(dst)
    return np.arange(dst) * ((src - 1) / (dst - 1))


def normalize_minmax(img: np.ndarray) -> np.ndarray:
    """Affinely map an image onto [0, 1]; a constant image maps to zeros."""
    img = np.asarray(img, dtype=np.float64)
    if not np.isfinite(img).all():
        raise ImageIOError("non-finite pixel value in normalize_minmax input")
    lo = img.min()
    hi = img.max()
    if hi <= lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def read_manifest(path: str | Path) -> Manifest:
    """Parse a `path,label,subject` CSV manifest.

    Labels must come from the 3-class vocabulary, paths must be unique and
    subjects non-empty; violations name the offending 1-based row.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["path", "label", "subject"]:
            raise ManifestError(f"expected header 'path,label,subject', got {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ManifestError(f"row {row_no}: expected 3 fields, got {len(row)}")
            img_path, label, subject = (c.strip() for c in row)
            if label not in LABELS:
                raise ManifestError(
                    f"row {row_no}: unknown label {label!r} (expected one of {', '.join(LABELS)})"
                )
            if not img_path:
                raise ManifestError(f"row {row_no}: empty path")
            if img_path in seen:
                raise ManifestError(f"row {row_no}: duplicate path {img_path!r}")
            if not subject:
                raise ManifestError(f"row {row_no}: empty subject identifier")
            seen.add(img_path)
            entries.append(ManifestEntry(img_path, label, subject))
    return Manifest(tuple(entries))
