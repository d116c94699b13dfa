"""Deterministic writers: JSON with 17-significant-digit floats, CSV, PGM.

Identical inputs must produce byte-identical files across runs and worker
counts, so keys are sorted, floats are formatted explicitly, and no
timestamps or environment details leak into the output.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise ValueError("refusing to serialize a non-finite float")
    text = format(value, ".17g")
    return text


def _encode(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, complex):
        return _encode({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        )
        return f'"{escaped}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key in sorted(obj.keys(), key=str):
            parts.append(f'{inner}"{key}": {_encode(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            return "[]"
        parts = [f"{inner}{_encode(item, indent + 1)}" for item in items]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_dumps(obj) -> str:
    return _encode(obj, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(json_dumps(obj), encoding="utf-8")


def write_table_csv(path, header: list[str], rows: list[list]) -> None:
    """CSV with floats at 17 significant digits, ints and strings verbatim."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_residuals_csv(path, residuals: list[float]) -> None:
    write_table_csv(
        path, ["n", "residual"], [[i + 1, r] for i, r in enumerate(residuals)]
    )


def write_pgm_heatmap(path, domain, values: np.ndarray, resolution: int = 256):
    """Binary PGM of the real part, nearest-node shaded, affine 0..255 map.

    Returns the mapping record (vmin, vmax, scale) so callers can log it.
    """
    real = np.asarray(values, dtype=np.float64)
    coords = domain.coords
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = np.maximum(hi - lo, 1e-30)
    vmin = float(real.min())
    vmax = float(real.max())
    if vmax > vmin:
        scale = 255.0 / (vmax - vmin)
    else:
        scale = 0.0
    width = height = int(resolution)
    xs = lo[0] + (np.arange(width) + 0.5) / width * span[0]
    ys = lo[1] + (np.arange(height) + 0.5) / height * span[1]
    grid_x, grid_y = np.meshgrid(xs, ys[::-1])
    pixels = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    # Nearest node per pixel; pixels beyond one grid step of any node are 0.
    from scipy.spatial import cKDTree

    tree = cKDTree(coords)
    dist, nearest = tree.query(pixels)
    step = float(domain.descriptor.get("step", span.max() / 16.0))
    if scale == 0.0:
        shades = np.full(nearest.shape, 128, dtype=np.uint8)
    else:
        shades = np.rint((real[nearest] - vmin) * scale).astype(np.uint8)
    shades[dist > step] = 0
    image = shades.reshape(height, width)
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.tobytes())
    return {"vmin": vmin, "vmax": vmax, "scale": scale, "resolution": resolution}
