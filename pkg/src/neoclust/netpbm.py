"""Netpbm image I/O: PPM (P3/P6) input, PGM (P5) segmentation output.

Only maxval-255 images are supported; anything else is upstream conversion
work. All writers are byte-deterministic so outputs can be compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PpmParseError",
    "ImageRGB",
    "LabelImage",
    "read_ppm",
    "write_ppm",
    "write_label_pgm",
    "write_cluster_mask",
]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class PpmParseError(ValueError):
    """Malformed netpbm input. ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(eq=False)
class ImageRGB:
    """8-bit RGB raster, pixels shaped (height, width, 3), dtype uint8."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"(height={self.height}, width={self.width}, 3)"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageRGB):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(eq=False)
class LabelImage:
    """Per-pixel cluster indices in [0, clusters)."""

    width: int
    height: int
    labels: np.ndarray
    clusters: int

    def __post_init__(self):
        if self.clusters < 1:
            raise ValueError(f"clusters must be >= 1, got {self.clusters}")
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(self.height, self.width)
        if self.labels.min() < 0 or self.labels.max() >= self.clusters:
            raise ValueError(
                f"labels must lie in [0, {self.clusters}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.clusters == other.clusters
            and np.array_equal(self.labels, other.labels)
        )


class _Cursor:
    """Tracks a byte position while tokenizing a netpbm header.

    Whitespace and '#'-to-newline comments separate tokens.
    """

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_separators(self) -> None:
        data = self.data
        n = len(data)
        while self.pos < n:
            byte = data[self.pos : self.pos + 1]
            if byte in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c"):
                self.pos += 1
            elif byte == b"#":
                while self.pos < n and data[self.pos : self.pos + 1] != b"\n":
                    self.pos += 1
            else:
                return

    def next_token(self, what: str) -> tuple[bytes, int]:
        self._skip_separators()
        if self.pos >= len(self.data):
            raise PpmParseError(f"unexpected end of data while reading {what}", len(self.data))
        start = self.pos
        data = self.data
        n = len(data)
        while self.pos < n:
            byte = data[self.pos : self.pos + 1]
            if byte in (b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c", b"#"):
                break
            self.pos += 1
        return data[start : self.pos], start

    def next_int(self, what: str) -> tuple[int, int]:
        token, offset = self.next_token(what)
        if not token.isdigit():
            raise PpmParseError(f"expected integer {what}, got {token!r}", offset)
        return int(token), offset


def read_ppm(data: bytes) -> ImageRGB:
    """Decode a P3 (ASCII) or P6 (binary) PPM with maxval 255.

    P3 and P6 encodings of the same pixels decode to equal images. Raises
    :class:`PpmParseError` naming the byte offset on any malformation.
    """
    cursor = _Cursor(data)
    magic, magic_off = cursor.next_token("magic number")
    if magic not in (b"P3", b"P6"):
        raise PpmParseError(f"unsupported magic {magic!r}, expected P3 or P6", magic_off)
    width, width_off = cursor.next_int("width")
    height, height_off = cursor.next_int("height")
    if width < 1:
        raise PpmParseError(f"width must be >= 1, got {width}", width_off)
    if height < 1:
        raise PpmParseError(f"height must be >= 1, got {height}", height_off)
    maxval, maxval_off = cursor.next_int("maxval")
    if maxval != 255:
        raise PpmParseError(f"unsupported maxval {maxval}, only 255 is accepted", maxval_off)

    n_samples = width * height * 3
    if magic == b"P6":
        # Binary raster starts after exactly one whitespace byte.
        if cursor.pos >= len(data) or data[cursor.pos : cursor.pos + 1] not in (
            b" ", b"\t", b"\n", b"\r", b"\x0b", b"\x0c",
        ):
            raise PpmParseError("expected single whitespace byte after maxval", cursor.pos)
        raster_start = cursor.pos + 1
        raster = data[raster_start : raster_start + n_samples]
        if len(raster) < n_samples:
            raise PpmParseError(
                f"truncated pixel data: expected {n_samples} bytes, got {len(raster)}",
                len(data),
            )
        pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
        return ImageRGB(width, height, pixels.copy())

    values = np.empty(n_samples, dtype=np.uint8)
    for i in range(n_samples):
        try:
            value, offset = cursor.next_int("pixel sample")
        except PpmParseError:
            raise PpmParseError(
                f"truncated pixel data: expected {n_samples} samples, got {i}", len(data)
            ) from None
        if value > maxval:
            raise PpmParseError(f"sample value {value} exceeds maxval {maxval}", offset)
        values[i] = value
    return ImageRGB(width, height, values.reshape(height, width, 3))


def write_ppm(image: ImageRGB, binary: bool = True) -> bytes:
    """Encode an image as P6 (binary, default) or P3 (ASCII)."""
    header = f"{'P6' if binary else 'P3'}\n{image.width} {image.height}\n255\n".encode("ascii")
    if binary:
        return header + image.pixels.tobytes()
    body = "\n".join(
        " ".join(str(v) for v in px) for px in image.pixels.reshape(-1, 3)
    )
    return header + body.encode("ascii") + b"\n"


def _pgm_bytes(width: int, height: int, gray: np.ndarray) -> bytes:
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + gray.astype(np.uint8).tobytes()


def write_label_pgm(label_image: LabelImage) -> bytes:
    """Render a label map as P5 gray values floor(label * 255 / max(c-1, 1)).

    Distinct labels map to distinct grays for any cluster count up to 256,
    so the rendering is reversible.
    """
    c = label_image.clusters
    gray = (label_image.labels * 255) // max(c - 1, 1)
    if gray.max() > 255:
        raise ValueError("label exceeds cluster count")  # guarded by LabelImage already
    return _pgm_bytes(label_image.width, label_image.height, gray)


def write_cluster_mask(label_image: LabelImage, cluster: int) -> bytes:
    """Render a binary P5 mask: 255 where the pixel belongs to ``cluster``, else 0."""
    if not 0 <= cluster < label_image.clusters:
        raise ValueError(
            f"cluster {cluster} out of range [0, {label_image.clusters})"
        )
    gray = np.where(label_image.labels == cluster, 255, 0)
    return _pgm_bytes(label_image.width, label_image.height, gray)
