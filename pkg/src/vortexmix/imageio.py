"""Deterministic image output: binary PGM always, PNG on request."""

from __future__ import annotations

import numpy as np

from .field import GridSpec, IntensityImage, intensity_moments


def to_gray(image: IntensityImage) -> np.ndarray:
    """Max-normalized 8-bit gray levels (gamma 1.0, rows from -y to +y)."""
    v = image.values
    peak = float(v.max())
    if peak <= 0.0:
        return np.zeros(v.shape, np.uint8)
    return np.floor(v / peak * 255.0 + 0.5).astype(np.uint8)


def write_pgm(image: IntensityImage, path) -> None:
    """Write a binary (P5) PGM; byte-identical across runs."""
    gray = to_gray(image)
    ny, nx = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def write_png(image: IntensityImage, path) -> None:
    """Write an 8-bit grayscale PNG (requires Pillow)."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - optional dependency
        raise RuntimeError("PNG output requires Pillow (pip install Pillow)") from exc
    Image.fromarray(to_gray(image), mode="L").save(path)


def summarize_image(image: IntensityImage) -> dict:
    """Min/max/centroid summary embedded in reports so tests never parse images."""
    v = image.values
    m = intensity_moments(v, image.grid)
    return {
        "min": float(v.min()),
        "max": float(v.max()),
        "centroid_x_m": m["cx"],
        "centroid_y_m": m["cy"],
    }


def grid_summary(grid: GridSpec) -> dict:
    return {"nx": grid.nx, "ny": grid.ny, "dx_m": grid.dx, "dy_m": grid.dy}
