"""Bundled counterexample: two components glued into one domain file.

The domain is two 3-by-3 lattice squares far apart, each a valid
interior-plus-boundary patch, shipped as one point cloud. The companion
kernel walks one component normally but sends the other component's interior
mass to a single boundary node. The pair exercises every negative path:

* the support graph is disconnected, so the maximum-principle support check
  fails with a witness,
* the indicator probe of one component is a non-constant invariant field
  peaking inside the interior,
* the point-mass row has a degenerate hitting law, so the variance fields
  of coordinate generators vanish at an interior point and the common zero
  set strictly contains the boundary.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .geometry import DiscreteDomain, load_custom_domain
from .kernels import MarkovKernel, load_custom_kernel

_OFFSETS = (0.0, 2.5)


def _square_patch(origin_x: float, id_base: int):
    points = []
    boundary = []
    edges = []
    nid = lambda i, j: id_base + j * 3 + i
    for j in range(3):
        for i in range(3):
            points.append([nid(i, j), origin_x + 0.5 * i, 0.5 * j])
            if i in (0, 2) or j in (0, 2):
                boundary.append(nid(i, j))
    for j in range(3):
        for i in range(3):
            if i + 1 < 3:
                edges.append([nid(i, j), nid(i + 1, j)])
            if j + 1 < 3:
                edges.append([nid(i, j), nid(i, j + 1)])
    # Corner diagonals keep every boundary node attached to the interior.
    for ci, cj in ((0, 0), (2, 0), (0, 2), (2, 2)):
        edges.append([nid(ci, cj), id_base + 4])
    return points, boundary, edges


def disconnected_domain_payload() -> dict:
    points, boundary, edges = [], [], []
    for index, offset in enumerate(_OFFSETS):
        p, b, e = _square_patch(offset, 9 * index)
        points.extend(p)
        boundary.extend(b)
        edges.extend(e)
    return {"points": points, "boundary": boundary, "edges": edges}


def disconnected_kernel_payload() -> dict:
    rows = []
    for index in range(len(_OFFSETS)):
        base = 9 * index
        center = base + 4
        stencil = [base + 1, base + 3, base + 5, base + 7]
        if index == 0:
            rows.append([center, [[t, 0.25] for t in stencil]])
        else:
            # Point-mass absorption: the hitting law at this interior node
            # is degenerate, so its variance fields vanish.
            rows.append([center, [[base + 1, 1.0]]])
        for j in range(9):
            pid = base + j
            if pid != center:
                rows.append([pid, [[pid, 1.0]]])
    rows.sort(key=lambda r: r[0])
    return {"rows": rows}


def write_bundle(directory) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    domain_path = directory / "disconnected_domain.json"
    kernel_path = directory / "disconnected_kernel.json"
    domain_path.write_text(
        json.dumps(disconnected_domain_payload(), indent=1) + "\n", encoding="utf-8"
    )
    kernel_path.write_text(
        json.dumps(disconnected_kernel_payload(), indent=1) + "\n", encoding="utf-8"
    )
    return domain_path, kernel_path


def bundled_paths() -> tuple[Path, Path]:
    """Paths of the counterexample files shipped inside the package."""
    root = resources.files("markov_dirichlet").joinpath("data")
    return (
        Path(str(root.joinpath("disconnected_domain.json"))),
        Path(str(root.joinpath("disconnected_kernel.json"))),
    )


def load_bundled() -> tuple[DiscreteDomain, MarkovKernel]:
    domain_path, kernel_path = bundled_paths()
    domain = load_custom_domain(domain_path)
    kernel = load_custom_kernel(domain, kernel_path)
    return domain, kernel
