"""Escape-time pictures of the filled Julia set.

Pixel ``(x, y)`` of a ``W x H`` viewport, with ``y`` growing downward, sits at

    re = center.re + half_width * ((2x + 1) / W - 1)
    im = center.im - half_width * (H / W) * ((2y + 1) / H - 1)

so pixels are square and ``half_width`` spans the horizontal extent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from ._accel import njit
from .errors import ValidationError
from .polynomial import PolynomialSpec, escape_radius

MIN_PIXELS = 16


@dataclass(frozen=True)
class Viewport:
    center: complex = 0j
    half_width: float = 2.0
    pixels_x: int = 256
    pixels_y: int = 256

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValidationError("half_width must be positive")
        if self.pixels_x < MIN_PIXELS or self.pixels_y < MIN_PIXELS:
            raise ValidationError(f"viewport needs at least {MIN_PIXELS} pixels per side")
        object.__setattr__(self, "center", complex(self.center))

    def grid(self) -> np.ndarray:
        W, H = self.pixels_x, self.pixels_y
        x = np.arange(W)
        y = np.arange(H)
        re = self.center.real + self.half_width * ((2 * x + 1) / W - 1)
        im = self.center.imag - self.half_width * (H / W) * ((2 * y + 1) / H - 1)
        return re[None, :] + 1j * im[:, None]


def pixel_coordinate(viewport: Viewport, x: int, y: int) -> complex:
    return complex(viewport.grid()[y, x])


@dataclass(frozen=True)
class RasterImage:
    """Escape counts indexed ``counts[y, x]``; 0 means "never escaped"."""

    counts: np.ndarray
    max_iter: int

    @property
    def width(self) -> int:
        return self.counts.shape[1]

    @property
    def height(self) -> int:
        return self.counts.shape[0]


@njit
def _escape_nb(full, c, radius, max_iter):
    H, W = c.shape
    d = full.shape[0] - 1
    out = np.zeros((H, W), dtype=np.int64)
    for y in range(H):
        for x in range(W):
            z = c[y, x]
            for n in range(1, max_iter + 1):
                acc = full[d]
                for k in range(d - 1, -1, -1):
                    acc = acc * z + full[k]
                z = acc
                if abs(z) > radius:
                    out[y, x] = n
                    break
    return out


def _escape_np(full, c, radius, max_iter):
    d = full.size - 1
    out = np.zeros(c.shape, dtype=np.int64)
    z = c.ravel().copy()
    idx = np.arange(z.size)
    flat = out.ravel()
    for n in range(1, max_iter + 1):
        acc = np.full(z.shape, full[d])
        for k in range(d - 1, -1, -1):
            acc = acc * z + full[k]
        z = acc
        gone = np.abs(z) > radius
        flat[idx[gone]] = n
        z = z[~gone]
        idx = idx[~gone]
        if idx.size == 0:
            break
    return flat.reshape(c.shape)


def render_julia(spec: PolynomialSpec, viewport: Viewport, max_iter: int = 100) -> RasterImage:
    """Iterate ``P`` from every pixel until ``|P^n| > escape_radius``."""
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    c = viewport.grid()
    full = spec.full_coeffs()
    radius = escape_radius(spec)
    if _accel.use_numba():
        counts = _escape_nb(full, c, radius, int(max_iter))
    else:
        counts = _escape_np(full, c, radius, int(max_iter))
    return RasterImage(counts, int(max_iter))


def gray_levels(counts: np.ndarray) -> np.ndarray:
    """0 stays black; escape after ``n`` steps is ``255 - 8 (n - 1)``, floored at 1."""
    c = np.asarray(counts, dtype=np.int64)
    v = 255 - np.minimum(254, 8 * (c - 1))
    return np.where(c == 0, 0, v).astype(np.uint8)


def write_image(image: RasterImage, path) -> None:
    """Binary PPM with identical R, G and B channels."""
    g = gray_levels(image.counts)
    rgb = np.repeat(g[:, :, None], 3, axis=2)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + rgb.tobytes())
