"""Deterministic rasterization of a Rips complex into an 8-bit grayscale grid.

Everything here is integer or fixed float arithmetic so that identical inputs
produce byte-identical pixel buffers on any platform: midpoint line
discretization for edges, precomputed disc stamps for vertices, and
darkest-wins compositing. PNG encoding is done locally (filter 0, fixed zlib
level) so the files themselves are reproducible too.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cgr import CgrTrajectory
from .rips import RipsComplex

FIXED_UNIT_BOX = "fixed_unit_box"
PER_SEQUENCE_BBOX = "per_sequence_bbox"


@dataclass
class RenderConfig:
    image_size: int = 224
    margin_frac: float = 0.05
    vertex_radius: int = 2
    background: int = 255
    ink: int = 0
    triangle_intensity: int = 128
    coordinate_frame: str = FIXED_UNIT_BOX

    def __post_init__(self):
        if self.image_size < 32:
            raise ValueError(f"image_size must be >= 32, got {self.image_size}")
        if not 0.0 <= self.margin_frac < 0.5:
            raise ValueError(f"margin_frac must be in [0, 0.5), got {self.margin_frac}")
        if self.vertex_radius < 1:
            raise ValueError(f"vertex_radius must be >= 1, got {self.vertex_radius}")
        for name in ("background", "ink", "triangle_intensity"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"{name} must be an 8-bit intensity, got {v}")
        if self.coordinate_frame not in (FIXED_UNIT_BOX, PER_SEQUENCE_BBOX):
            raise ValueError(f"unknown coordinate_frame {self.coordinate_frame!r}")


@dataclass
class ImageGrid:
    """Square 8-bit grayscale raster, row 0 at the top."""

    size: int
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.size, self.size):
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} != ({self.size}, {self.size})"
            )


def content_hash(img: ImageGrid) -> str:
    """sha256 of the raw pixel buffer; the regression fingerprint of a render."""
    return hashlib.sha256(img.pixels.tobytes()).hexdigest()


def ink_count(img: ImageGrid, background: int = 255) -> int:
    """Number of pixels touched by any stroke."""
    return int(np.count_nonzero(img.pixels != background))


def world_to_pixels(points: np.ndarray, cfg: RenderConfig) -> np.ndarray:
    """Map world coordinates to integer pixel centers (x_px, y_px).

    fixed_unit_box maps [-1, 1]^2 onto [margin, size - margin]^2 with world +y
    pointing up (row index grows downward). per_sequence_bbox stretches the
    point bounding box instead; a degenerate axis collapses to the canvas
    center. Rounding is floor(v + 0.5).
    """
    size = cfg.image_size
    m = cfg.margin_frac * size
    span = size - 2.0 * m
    x = points[:, 0]
    y = points[:, 1]
    if cfg.coordinate_frame == FIXED_UNIT_BOX:
        fx = m + (x + 1.0) / 2.0 * span
        fy = m + (1.0 - y) / 2.0 * span
    else:
        fx = _axis_map(x, m, span, size, flip=False)
        fy = _axis_map(y, m, span, size, flip=True)
    return np.column_stack(
        (np.floor(fx + 0.5).astype(np.int64), np.floor(fy + 0.5).astype(np.int64))
    )


def _axis_map(v, m, span, size, flip):
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:  # degenerate bounds: center this axis
        return np.full(len(v), size / 2.0)
    t = (v - lo) / (hi - lo)
    if flip:
        t = 1.0 - t
    return m + t * span


@lru_cache(maxsize=None)
def _disc_offsets(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(r, r, indexing="ij")
    keep = dx**2 + dy**2 <= radius**2
    return np.column_stack((dx[keep], dy[keep]))


def _line_pixels(x0: int, y0: int, x1: int, y1: int):
    """Integer midpoint line, endpoint-inclusive and direction-insensitive.

    Endpoints are first put in lexicographic order so that drawing A->B and
    B->A touch the same pixels.
    """
    if (x0, y0) > (x1, y1):
        x0, y0, x1, y1 = x1, y1, x0, y0
    dx = x1 - x0
    dy = y1 - y0
    adx, ady = abs(dx), abs(dy)
    if adx == 0 and ady == 0:
        return np.array([x0]), np.array([y0])
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    if adx >= ady:
        t = np.arange(adx + 1)
        xs = x0 + sx * t
        ys = y0 + sy * ((2 * t * ady + adx) // (2 * adx))
    else:
        t = np.arange(ady + 1)
        ys = y0 + sy * t
        xs = x0 + sx * ((2 * t * adx + ady) // (2 * ady))
    return xs, ys


def _stamp_min(canvas, xs, ys, value):
    size = canvas.shape[0]
    keep = (xs >= 0) & (xs < size) & (ys >= 0) & (ys < size)
    xs, ys = xs[keep], ys[keep]
    canvas[ys, xs] = np.minimum(canvas[ys, xs], value)


def _fill_triangle(canvas, p0, p1, p2, value):
    size = canvas.shape[0]
    xmin = max(0, min(p0[0], p1[0], p2[0]))
    xmax = min(size - 1, max(p0[0], p1[0], p2[0]))
    ymin = max(0, min(p0[1], p1[1], p2[1]))
    ymax = min(size - 1, max(p0[1], p1[1], p2[1]))
    if xmin > xmax or ymin > ymax:
        return
    ys, xs = np.mgrid[ymin : ymax + 1, xmin : xmax + 1]

    def cross(a, b):
        return (b[0] - a[0]) * (ys - a[1]) - (b[1] - a[1]) * (xs - a[0])

    d0, d1, d2 = cross(p0, p1), cross(p1, p2), cross(p2, p0)
    inside = ((d0 >= 0) & (d1 >= 0) & (d2 >= 0)) | ((d0 <= 0) & (d1 <= 0) & (d2 <= 0))
    region = canvas[ymin : ymax + 1, xmin : xmax + 1]
    region[inside] = np.minimum(region[inside], value)


def render_complex(
    cx: RipsComplex, traj: CgrTrajectory, cfg: RenderConfig | None = None
) -> ImageGrid:
    """Rasterize a complex: triangles first, then edges, then vertex discs."""
    cfg = cfg or RenderConfig()
    if len(traj.points) != cx.n_vertices:
        raise ValueError(
            f"trajectory has {len(traj.points)} points but the complex has "
            f"{cx.n_vertices} vertices"
        )
    canvas = np.full((cfg.image_size, cfg.image_size), cfg.background, dtype=np.uint8)
    pix = world_to_pixels(traj.points, cfg)

    if cx.triangles is not None:
        for i, j, k in cx.triangles:
            _fill_triangle(canvas, pix[i], pix[j], pix[k], cfg.triangle_intensity)
    for i, j in cx.edges:
        xs, ys = _line_pixels(*pix[i], *pix[j])
        _stamp_min(canvas, xs, ys, cfg.ink)
    offs = _disc_offsets(cfg.vertex_radius)
    for x, y in pix:
        _stamp_min(canvas, x + offs[:, 0], y + offs[:, 1], cfg.ink)
    return ImageGrid(cfg.image_size, canvas)


# ---------------------------------------------------------------------------
# PNG encode/decode (grayscale 8-bit, non-interlaced)
# ---------------------------------------------------------------------------

_PNG_SIG = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6  # fixed so identical grids give identical files


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload))
    )


def write_image(img: ImageGrid, path) -> None:
    """Write an 8-bit grayscale PNG, byte-identical for identical grids."""
    size = img.size
    ihdr = struct.pack(">IIBBBBB", size, size, 8, 0, 0, 0, 0)
    raw = b"".join(b"\x00" + img.pixels[r].tobytes() for r in range(size))
    body = (
        _PNG_SIG
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw, _ZLIB_LEVEL))
        + _chunk(b"IEND", b"")
    )
    with open(path, "wb") as f:
        f.write(body)


def read_image(path) -> ImageGrid:
    """Read a grayscale 8-bit non-interlaced PNG back into an ImageGrid."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != _PNG_SIG:
        raise ValueError(f"{path}: not a PNG file")
    pos = 8
    width = height = None
    idat = b""
    while pos < len(blob):
        (length,) = struct.unpack(">I", blob[pos : pos + 4])
        tag = blob[pos + 4 : pos + 8]
        payload = blob[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            width, height, depth, color, _, _, interlace = struct.unpack(
                ">IIBBBBB", payload
            )
            if depth != 8 or color != 0 or interlace != 0:
                raise ValueError(f"{path}: only 8-bit gray non-interlaced PNG supported")
        elif tag == b"IDAT":
            idat += payload
        elif tag == b"IEND":
            break
    if width is None or width != height:
        raise ValueError(f"{path}: missing IHDR or non-square image")
    raw = zlib.decompress(idat)
    stride = width + 1
    out = np.empty((height, width), dtype=np.uint8)
    prev = np.zeros(width, dtype=np.uint8)
    for r in range(height):
        row = raw[r * stride : (r + 1) * stride]
        out[r] = _unfilter_row(row[0], np.frombuffer(row[1:], dtype=np.uint8), prev)
        prev = out[r]
    return ImageGrid(width, out)


def _unfilter_row(ftype, data, prev):
    if ftype == 0:
        return data.copy()
    if ftype == 2:  # Up
        return (data.astype(np.int32) + prev).astype(np.uint8)
    out = np.empty_like(data)
    left = 0
    for i in range(len(data)):
        up = int(prev[i])
        if ftype == 1:  # Sub
            val = int(data[i]) + left
        elif ftype == 3:  # Average
            val = int(data[i]) + (left + up) // 2
        elif ftype == 4:  # Paeth
            ul = int(prev[i - 1]) if i > 0 else 0
            val = int(data[i]) + _paeth(left, up, ul)
        else:
            raise ValueError(f"unsupported PNG filter type {ftype}")
        out[i] = val & 0xFF
        left = int(out[i])
    return out


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c
