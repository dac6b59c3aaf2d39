"""File formats: PNG images and masks, the TNSR tensor container,
dataset manifests, and prompt CSV files.

TNSR layout (all integers little-endian):

    bytes 0..3   magic "TNSR"
    byte  4      version, currently 1
    byte  5      dtype code, 1 = float32
    bytes 6..7   u16 channel count (>= 1)
    bytes 8..11  u32 height
    bytes 12..15 u32 width
    then         channels * height * width float32 values,
                 channel-major, each channel row-major

The same container is used on disk and as the remote-inference wire body.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import BinaryMask, FloatMap, Prompt, PromptSet, RasterImage
from .encoding import derive_prompts
from .errors import ConfigError, FormatError, ManifestError

TNSR_MAGIC = b"TNSR"
TNSR_VERSION = 1
TNSR_DTYPE_F32 = 1
_TNSR_HEADER = struct.Struct("<4sBBHII")

PROMPT_CSV_HEADER = ("image_id", "x", "y", "kind")


# ---------------------------------------------------------------------------
# PNG images and masks
# ---------------------------------------------------------------------------

def _read_gray(path) -> tuple[np.ndarray, int]:
    """Read a PNG as a 2-D integer array plus its bit-depth maximum."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I"):
                return np.asarray(im, dtype=np.uint16).astype(np.int64), 65535
            if mode == "L":
                return np.asarray(im, dtype=np.uint8).astype(np.int64), 255
            if mode in ("1", "P", "LA", "RGB", "RGBA"):
                return np.asarray(im.convert("L"), dtype=np.uint8).astype(np.int64), 255
            raise FormatError(f"unsupported image mode {mode!r} in {path}")
    except UnidentifiedImageError as e:
        raise OSError(f"cannot read image {path}: {e}") from e


def load_image(path) -> RasterImage:
    """Load an 8- or 16-bit grayscale PNG normalized to [0, 1].

    Multi-channel files are reduced to luminance first.
    """
    arr, maxval = _read_gray(path)
    return RasterImage(arr.astype(np.float64) / maxval)


def save_image(image: RasterImage, path) -> None:
    """Write an intensity image as 8-bit grayscale PNG (values scaled by 255)."""
    data = np.rint(image.data * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def load_mask(path) -> BinaryMask:
    """Load a binary mask PNG; any value above half the bit-depth maximum
    counts as foreground (the >127 rule for 8-bit files)."""
    arr, maxval = _read_gray(path)
    return BinaryMask((arr > maxval // 2).astype(np.uint8))


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as 8-bit grayscale PNG, foreground 255 and background 0."""
    data = (mask.data * 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def mask_png_bytes(mask: BinaryMask) -> bytes:
    """PNG encoding of a mask, identical to what save_mask writes."""
    import io as _io

    buf = _io.BytesIO()
    data = (mask.data * 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def image_png_bytes(image: RasterImage) -> bytes:
    """PNG encoding of an intensity image, identical to save_image output."""
    import io as _io

    buf = _io.BytesIO()
    data = np.rint(image.data * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def image_from_png_bytes(data: bytes) -> RasterImage:
    """Decode an in-memory PNG with the same rules as load_image."""
    import io as _io

    arr, maxval = _read_gray(_io.BytesIO(data))
    return RasterImage(arr.astype(np.float64) / maxval)


# ---------------------------------------------------------------------------
# Run-length encoded masks (JSON wire format)
# ---------------------------------------------------------------------------

def mask_to_rle(mask: BinaryMask) -> dict:
    """Run-length encode a mask over row-major order.

    The counts list alternates runs of 0s and 1s and always starts with the
    zero run (possibly of length 0). Masks here are overwhelmingly
    background, so this keeps interactive payloads small.
    """
    flat = mask.data.ravel()
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    runs = np.diff(edges).tolist()
    counts = [0] + runs if flat[0] == 1 else runs
    return {"width": mask.width, "height": mask.height, "counts": counts}


def mask_from_rle(doc: dict) -> BinaryMask:
    """Decode the run-length format produced by mask_to_rle."""
    try:
        width, height = int(doc["width"]), int(doc["height"])
        counts = [int(c) for c in doc["counts"]]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed RLE document: {e}") from e
    if width < 1 or height < 1:
        raise FormatError(f"RLE dimensions must be positive, got {width}x{height}")
    if any(c < 0 for c in counts):
        raise FormatError("RLE counts must be non-negative")
    if sum(counts) != width * height:
        raise FormatError(
            f"RLE counts sum to {sum(counts)}, expected {width * height} pixels"
        )
    flat = np.zeros(width * height, dtype=np.uint8)
    pos = 0
    value = 0
    for run in counts:
        if value:
            flat[pos : pos + run] = 1
        pos += run
        value ^= 1
    return BinaryMask(flat.reshape(height, width))


# ---------------------------------------------------------------------------
# TNSR tensor container
# ---------------------------------------------------------------------------

def tnsr_to_bytes(tensor: np.ndarray) -> bytes:
    """Serialize a (channels, H, W) array as a TNSR byte string (float32)."""
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ValueError(f"expected a (channels, H, W) array, got shape {arr.shape}")
    c, h, w = arr.shape
    if c < 1 or h < 1 or w < 1:
        raise ValueError(f"tensor dimensions must all be >= 1, got {arr.shape}")
    if c > 0xFFFF:
        raise ValueError(f"channel count {c} exceeds the u16 header field")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite values")
    header = _TNSR_HEADER.pack(TNSR_MAGIC, TNSR_VERSION, TNSR_DTYPE_F32, c, h, w)
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return header + payload


def tnsr_from_bytes(buf: bytes) -> np.ndarray:
    """Parse a TNSR byte string into a (channels, H, W) float32 array."""
    if len(buf) < _TNSR_HEADER.size:
        raise OSError(f"TNSR data truncated: {len(buf)} bytes is shorter than the header")
    magic, version, dtype, c, h, w = _TNSR_HEADER.unpack_from(buf, 0)
    if magic != TNSR_MAGIC:
        raise FormatError(f"bad TNSR magic {magic!r}")
    if version != TNSR_VERSION:
        raise FormatError(f"unsupported TNSR version {version}")
    if dtype != TNSR_DTYPE_F32:
        raise FormatError(f"unsupported TNSR dtype code {dtype}")
    if c < 1:
        raise FormatError("TNSR channel count must be >= 1")
    expected = _TNSR_HEADER.size + 4 * c * h * w
    if len(buf) != expected:
        raise OSError(
            f"TNSR payload truncated or padded: expected {expected} bytes, got {len(buf)}"
        )
    flat = np.frombuffer(buf, dtype="<f4", offset=_TNSR_HEADER.size)
    return flat.reshape(c, h, w).copy()


def save_tensor(tensor: np.ndarray, path) -> None:
    Path(path).write_bytes(tnsr_to_bytes(tensor))


def load_tensor(path) -> np.ndarray:
    return tnsr_from_bytes(Path(path).read_bytes())


def save_floatmap(fmap: FloatMap, path) -> None:
    """Write a single float map as a one-channel TNSR file."""
    save_tensor(fmap.data[None, :, :], path)


def load_floatmap(path) -> FloatMap:
    """Read a one-channel TNSR file back into a FloatMap."""
    tensor = load_tensor(path)
    if tensor.shape[0] != 1:
        raise FormatError(f"expected a 1-channel TNSR at {path}, found {tensor.shape[0]}")
    return FloatMap(tensor[0].astype(np.float64))


# ---------------------------------------------------------------------------
# Prompt CSV files
# ---------------------------------------------------------------------------

def read_prompt_csv(path) -> dict[str, PromptSet]:
    """Parse image_id,x,y,kind rows into per-image prompt sets.

    A header row matching the column names is skipped when present. Row
    order within an image is preserved (matchers are order-sensitive).
    """
    rows: dict[str, list[Prompt]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and tuple(row) == PROMPT_CSV_HEADER):
                continue
            if len(row) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            image_id, xs, ys, kind = (v.strip() for v in row)
            try:
                x, y = int(xs), int(ys)
            except ValueError as e:
                raise FormatError(f"{path}:{lineno}: non-integer coordinate") from e
            if kind not in ("centroid", "coarse"):
                raise FormatError(f"{path}:{lineno}: unknown prompt kind {kind!r}")
            rows.setdefault(image_id, []).append(Prompt(x=x, y=y, kind=kind))
    return {
        image_id: PromptSet(image_id=image_id, prompts=tuple(prompts))
        for image_id, prompts in rows.items()
    }


def write_prompt_csv(prompt_sets, path, append: bool = False) -> None:
    """Write prompt sets as image_id,x,y,kind rows (header on fresh files)."""
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    mode = "a" if append else "w"
    with open(path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(PROMPT_CSV_HEADER)
        for ps in prompt_sets:
            for p in ps:
                writer.writerow([ps.image_id, p.x, p.y, p.kind])


# ---------------------------------------------------------------------------
# Dataset manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PromptSource:
    """Where an image's prompts come from.

    kind "file" reads them from a CSV; "derive_centroid" and "derive_coarse"
    compute them from the ground-truth mask (coarse mode draws a seeded
    random in-component pixel).
    """

    kind: str
    path: str | None = None
    seed: int = 0


@dataclass(frozen=True)
class ManifestImage:
    image_id: str
    image_path: str
    gt_path: str | None
    prompt_source: PromptSource


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    images: tuple[ManifestImage, ...]
    root: str = "."

    def ids(self) -> list[str]:
        return [im.image_id for im in self.images]

    def image(self, image_id: str) -> ManifestImage:
        for im in self.images:
            if im.image_id == image_id:
                return im
        raise KeyError(f"image_id {image_id!r} not in manifest")


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ManifestError(f"{path}: {message}")


def _parse_prompt_source(obj, jpath: str) -> PromptSource:
    _require(isinstance(obj, dict), jpath, "must be an object")
    kind = obj.get("type")
    _require(
        kind in ("file", "derive_centroid", "derive_coarse"),
        f"{jpath}.type",
        f"must be 'file', 'derive_centroid' or 'derive_coarse', got {kind!r}",
    )
    if kind == "file":
        p = obj.get("path")
        _require(isinstance(p, str) and p != "", f"{jpath}.path", "must be a non-empty string")
        return PromptSource(kind="file", path=p)
    if kind == "derive_coarse":
        seed = obj.get("seed", 0)
        _require(isinstance(seed, int), f"{jpath}.seed", "must be an integer")
        return PromptSource(kind="derive_coarse", seed=seed)
    return PromptSource(kind="derive_centroid")


def load_manifest(path) -> DatasetManifest:
    """Load and validate a dataset manifest.

    Relative paths in the manifest resolve against the manifest's own
    directory. Every referenced file must exist at load time.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestError(f"$: not valid JSON ({e})") from e

    root = path.parent
    _require(isinstance(doc, dict), "$", "manifest must be a JSON object")
    version = doc.get("version")
    _require(isinstance(version, int), "$.version", f"must be an integer, got {version!r}")
    images_doc = doc.get("images")
    _require(isinstance(images_doc, list), "$.images", "must be an array")

    images = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(images_doc):
        jpath = f"$.images[{i}]"
        _require(isinstance(entry, dict), jpath, "must be an object")
        image_id = entry.get("image_id")
        _require(
            isinstance(image_id, str) and image_id != "",
            f"{jpath}.image_id",
            "must be a non-empty string",
        )
        _require(image_id not in seen_ids, f"{jpath}.image_id", f"duplicate id {image_id!r}")
        seen_ids.add(image_id)

        image_path = entry.get("image_path")
        _require(
            isinstance(image_path, str) and image_path != "",
            f"{jpath}.image_path",
            "must be a non-empty string",
        )
        resolved_image = str((root / image_path).resolve())
        _require(Path(resolved_image).is_file(), f"{jpath}.image_path", f"file not found: {resolved_image}")

        gt_path = entry.get("gt_path")
        resolved_gt = None
        if gt_path is not None:
            _require(isinstance(gt_path, str) and gt_path != "", f"{jpath}.gt_path", "must be a non-empty string")
            resolved_gt = str((root / gt_path).resolve())
            _require(Path(resolved_gt).is_file(), f"{jpath}.gt_path", f"file not found: {resolved_gt}")

        source = _parse_prompt_source(entry.get("prompt_source"), f"{jpath}.prompt_source")
        if source.kind == "file":
            resolved_csv = str((root / source.path).resolve())
            _require(
                Path(resolved_csv).is_file(),
                f"{jpath}.prompt_source.path",
                f"file not found: {resolved_csv}",
            )
            source = PromptSource(kind="file", path=resolved_csv)

        images.append(
            ManifestImage(
                image_id=image_id,
                image_path=resolved_image,
                gt_path=resolved_gt,
                prompt_source=source,
            )
        )
    return DatasetManifest(version=version, images=tuple(images), root=str(root))


def resolve_prompts(manifest: DatasetManifest, image_id: str) -> PromptSet:
    """Produce the prompt set for one manifest image.

    File sources are read from CSV; derive sources need a ground-truth mask
    and are deterministic given the recorded seed.
    """
    entry = manifest.image(image_id)
    source = entry.prompt_source
    if source.kind == "file":
        table = read_prompt_csv(source.path)
        return table.get(image_id, PromptSet(image_id=image_id))
    if entry.gt_path is None:
        raise ConfigError(
            f"image {image_id!r} uses prompt_source {source.kind!r} but has no gt_path"
        )
    gt = load_mask(entry.gt_path)
    mode = "centroid" if source.kind == "derive_centroid" else "coarse"
    return derive_prompts(gt, mode=mode, rng_seed=source.seed, image_id=image_id)
