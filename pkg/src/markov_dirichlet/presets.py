"""Named boundary-data presets used by the CLI and the studies."""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .errors import PresetError
from .fields import read_field_csv, restrict_boundary
from .geometry import DiscreteDomain

PRESET_NAMES = (
    "constant",
    "cos-k-theta",
    "coordinate-x",
    "coordinate-y",
    "indicator",
    "from-file",
)


def _as_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def boundary_angles(domain: DiscreteDomain) -> np.ndarray:
    """Angle of each boundary node around the boundary centroid."""
    boundary = domain.boundary_ids
    center = domain.coords[boundary].mean(axis=0)
    rel = domain.coords[boundary] - center
    return np.arctan2(rel[:, 1], rel[:, 0])


def make_boundary_data(domain: DiscreteDomain, spec: Mapping[str, Any]) -> dict[int, complex]:
    """Build boundary data from a preset descriptor.

    ``spec`` carries ``preset`` plus preset-specific keys: ``c`` for
    ``constant``, ``k`` for ``cos-k-theta``, ``boundary_id`` for
    ``indicator`` and ``path`` for ``from-file``.
    """
    if "preset" not in spec:
        raise PresetError("data spec requires a 'preset' key")
    preset = spec["preset"]
    boundary = domain.boundary_ids
    if preset == "constant":
        c = _as_complex(spec.get("c", 1.0))
        return {int(b): c for b in boundary}
    if preset == "cos-k-theta":
        k = spec.get("k", 1)
        if not isinstance(k, int) or k < 1:
            raise PresetError("cos-k-theta requires an integer k >= 1")
        angles = boundary_angles(domain)
        return {int(b): complex(np.cos(k * a)) for b, a in zip(boundary, angles)}
    if preset == "coordinate-x":
        return {int(b): complex(domain.coords[b, 0]) for b in boundary}
    if preset == "coordinate-y":
        return {int(b): complex(domain.coords[b, 1]) for b in boundary}
    if preset == "indicator":
        if "boundary_id" not in spec:
            raise PresetError("indicator preset requires a 'boundary_id' key")
        target = int(spec["boundary_id"])
        if target not in set(int(b) for b in boundary):
            raise PresetError(f"indicator id {target} is not a boundary point")
        return {int(b): (1.0 + 0.0j if int(b) == target else 0.0 + 0.0j) for b in boundary}
    if preset == "from-file":
        if "path" not in spec:
            raise PresetError("from-file preset requires a 'path' key")
        field = read_field_csv(spec["path"], domain)
        return restrict_boundary(field)
    raise PresetError(
        f"unknown preset {preset!r}; expected one of {', '.join(PRESET_NAMES)}"
    )
