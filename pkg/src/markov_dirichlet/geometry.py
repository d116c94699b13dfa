r"""Finite discretizations of a compact planar domain with interior and boundary.

A :class:`DiscreteDomain` models a compact set as a finite point cloud split
into interior nodes (the open, dense part) and boundary nodes. Generated
shapes place interior nodes on a square lattice and boundary nodes exactly on
the true boundary curve, where grid lines cross it. Boundary nodes are
first-class: the clamped transition operator is the identity there, so they
must exist as degrees of freedom, not as outermost cells.

Shapes
------
``square``
    The n-by-n lattice on [0, 1]^2; the outermost lattice ring is boundary.
``disk``
    Lattice of step 2/n on the unit disk; interior nodes satisfy
    ``|x| < 1 - step/2`` and boundary nodes are the grid-line crossings of
    the unit circle, so ``|b| = 1`` up to rounding.
``annulus``
    Same construction between circles of radius ``inner_radius`` and 1.
``lshape``
    [0, 1]^2 with the open upper-right quadrant removed; the re-entrant
    corner at (1/2, 1/2) is kept deliberately as the hard case for barrier
    construction. Requires odd ``n`` so the notch corner is a lattice node.
``custom``
    Loaded from JSON (see :func:`load_custom_domain`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

_AXIS_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_GENERATED_SHAPES = ("square", "disk", "annulus", "lshape")


@dataclass(frozen=True, eq=False)
class DiscreteDomain:
    """Immutable point cloud with an interior/boundary split and adjacency.

    Attributes
    ----------
    coords : (N, 2) float array
        Embedding coordinates, dimensionless.
    is_boundary : (N,) bool array
        Boundary mask; interior and boundary partition the ids.
    adjacency : tuple of tuples of int
        Per-node neighbor lists used by kernel builders. Lists of interior
        nodes are the stencil targets; boundary lists record which interior
        nodes touch them (they carry no transition weight of their own).
    descriptor : mapping
        Generator tag and resolution parameters.
    metric_matrix : (N, N) float array, optional
        Custom metric; Euclidean distance on ``coords`` when absent.
    """

    coords: np.ndarray
    is_boundary: np.ndarray
    adjacency: tuple
    descriptor: Mapping[str, Any]
    metric_matrix: np.ndarray | None = None

    @property
    def n_points(self) -> int:
        return int(self.coords.shape[0])

    @cached_property
    def boundary_ids(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary)

    @cached_property
    def interior_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    @cached_property
    def interior_index(self) -> np.ndarray:
        """Map node id -> position among interior ids, -1 for boundary."""
        index = np.full(self.n_points, -1, dtype=np.int64)
        index[self.interior_ids] = np.arange(self.interior_ids.size)
        return index

    @cached_property
    def boundary_index(self) -> np.ndarray:
        index = np.full(self.n_points, -1, dtype=np.int64)
        index[self.boundary_ids] = np.arange(self.boundary_ids.size)
        return index

    def metric(self, i: int, j: int) -> float:
        if self.metric_matrix is not None:
            return float(self.metric_matrix[i, j])
        delta = self.coords[i] - self.coords[j]
        return float(np.hypot(delta[0], delta[1]))

    def distances_from(self, i: int) -> np.ndarray:
        """Distances from node ``i`` to every node."""
        if self.metric_matrix is not None:
            return np.asarray(self.metric_matrix[i], dtype=np.float64)
        delta = self.coords - self.coords[i]
        return np.hypot(delta[:, 0], delta[:, 1])

    @cached_property
    def boundary_distances(self) -> np.ndarray:
        """Per node, the distance to the nearest boundary node."""
        if self.metric_matrix is not None:
            block = self.metric_matrix[:, self.boundary_ids]
        else:
            delta = self.coords[:, None, :] - self.coords[None, self.boundary_ids, :]
            block = np.hypot(delta[..., 0], delta[..., 1])
        return block.min(axis=1)

    @cached_property
    def nearest_boundary(self) -> np.ndarray:
        """Per node, the id of the nearest boundary node; ties -> lowest id."""
        if self.metric_matrix is not None:
            block = self.metric_matrix[:, self.boundary_ids]
        else:
            delta = self.coords[:, None, :] - self.coords[None, self.boundary_ids, :]
            block = np.hypot(delta[..., 0], delta[..., 1])
        return self.boundary_ids[np.argmin(block, axis=1)]

    @cached_property
    def undirected_neighbors(self) -> tuple:
        """Adjacency symmetrized: i ~ j when either list mentions the other."""
        sets: list[set[int]] = [set(nbrs) for nbrs in self.adjacency]
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                sets[j].add(i)
        return tuple(tuple(sorted(s)) for s in sets)

    def max_nearest_neighbor_spacing(self) -> float:
        """Max over nodes of the distance to their closest graph neighbor."""
        worst = 0.0
        for i, nbrs in enumerate(self.undirected_neighbors):
            if not nbrs:
                raise DomainError(f"point {i} has no neighbors")
            nearest = min(self.metric(i, j) for j in nbrs)
            worst = max(worst, nearest)
        return worst


def build_domain(spec: Mapping[str, Any]) -> DiscreteDomain:
    """Build a validated domain from a shape descriptor.

    Parameters
    ----------
    spec : mapping
        ``{"shape": ..., "n": ...}`` plus shape-specific keys:
        ``inner_radius`` for ``annulus`` (default 0.5) and ``path`` for
        ``custom``.

    Raises
    ------
    DomainError
        Unknown shape, resolution too small, or a violated invariant
        (the message names the invariant).
    """
    if "shape" not in spec:
        raise DomainError("domain spec requires a 'shape' key")
    shape = spec["shape"]
    if shape == "custom":
        if "path" not in spec:
            raise DomainError("custom domain spec requires a 'path' key")
        return load_custom_domain(spec["path"])
    if shape not in _GENERATED_SHAPES:
        raise DomainError(
            f"unknown shape {shape!r}; expected one of "
            f"{', '.join(_GENERATED_SHAPES)} or custom"
        )
    n = spec.get("n")
    if not isinstance(n, int) or n < 3:
        raise DomainError("resolution n must be an integer >= 3")
    if shape == "square":
        domain = _build_square(n)
    elif shape == "disk":
        domain = _build_disk(n)
    elif shape == "annulus":
        inner = float(spec.get("inner_radius", 0.5))
        domain = _build_annulus(n, inner)
    else:
        domain = _build_lshape(n)
    validate_domain(domain)
    return domain


def boundary_distance(domain: DiscreteDomain, point_id: int) -> float:
    """Distance from ``point_id`` to the nearest boundary node (0 on the boundary)."""
    if not 0 <= point_id < domain.n_points:
        raise DomainError(f"invalid point id {point_id}")
    return float(domain.boundary_distances[point_id])


def _finalize(coords, is_boundary, adjacency, descriptor, metric=None) -> DiscreteDomain:
    coords = np.asarray(coords, dtype=np.float64)
    coords.setflags(write=False)
    is_boundary = np.asarray(is_boundary, dtype=bool)
    is_boundary.setflags(write=False)
    adjacency = tuple(tuple(int(j) for j in nbrs) for nbrs in adjacency)
    return DiscreteDomain(coords, is_boundary, adjacency, dict(descriptor), metric)


def _build_square(n: int) -> DiscreteDomain:
    ticks = np.linspace(0.0, 1.0, n)
    coords = []
    is_boundary = []
    for j in range(n):
        for i in range(n):
            coords.append((ticks[i], ticks[j]))
            is_boundary.append(i in (0, n - 1) or j in (0, n - 1))
    nid = lambda i, j: j * n + i
    adjacency: list[list[int]] = [[] for _ in range(n * n)]
    for j in range(n):
        for i in range(n):
            for di, dj in _AXIS_DIRECTIONS:
                ii, jj = i + di, j + dj
                if 0 <= ii < n and 0 <= jj < n:
                    adjacency[nid(i, j)].append(nid(ii, jj))
    # Corner nodes see no interior point through the lattice; link them to
    # their diagonal interior neighbor so the boundary stays attached to U.
    for ci, cj, di, dj in ((0, 0, 1, 1), (n - 1, 0, -1, 1), (0, n - 1, 1, -1), (n - 1, n - 1, -1, -1)):
        adjacency[nid(ci, cj)].append(nid(ci + di, cj + dj))
    return _finalize(coords, is_boundary, adjacency, {"shape": "square", "n": n, "step": 1.0 / (n - 1)})


def _circle_crossing(x: float, y: float, di: int, dj: int, radius: float, inward: bool):
    """Grid-line crossing of the circle ``|p| = radius`` from (x, y) along (di, dj).

    Returns crossing coordinates, or None when the ray misses the circle
    (only possible for inward rays aimed beside a hole).
    """
    if di != 0:
        rad2 = radius * radius - y * y
        if rad2 <= 0.0:
            return None
        root = math.sqrt(rad2)
        if inward:
            candidates = [c for c in (-root, root) if (c - x) * di > 0.0]
            if not candidates:
                return None
            cx = min(candidates, key=lambda c: abs(c - x))
        else:
            cx = root if di > 0 else -root
        return (cx, y)
    rad2 = radius * radius - x * x
    if rad2 <= 0.0:
        return None
    root = math.sqrt(rad2)
    if inward:
        candidates = [c for c in (-root, root) if (c - y) * dj > 0.0]
        if not candidates:
            return None
        cy = min(candidates, key=lambda c: abs(c - y))
    else:
        cy = root if dj > 0 else -root
    return (x, cy)


def _lattice_disk_like(n: int, descriptor: dict, inside, crossing) -> DiscreteDomain:
    """Shared scaffold for disk and annulus: lattice interior, crossing boundary.

    ``inside(x, y)`` decides interior membership; ``crossing(x, y, di, dj)``
    maps a frontier arm to a boundary point on the true boundary curve.
    """
    h = 2.0 / n
    span = int(math.ceil(1.0 / h)) + 1
    interior_map: dict[tuple[int, int], int] = {}
    coords: list[tuple[float, float]] = []
    for j in range(-span, span + 1):
        for i in range(-span, span + 1):
            x, y = i * h, j * h
            if inside(x, y):
                interior_map[(i, j)] = len(coords)
                coords.append((x, y))
    n_interior = len(coords)
    if n_interior == 0:
        raise DomainError("resolution too small to yield at least one interior point")
    boundary_map: dict[tuple[float, float], int] = {}
    boundary_coords: list[tuple[float, float]] = []
    adjacency: list[list[int]] = [[] for _ in range(n_interior)]
    boundary_adjacency: list[list[int]] = []
    for (i, j), pid in sorted(interior_map.items(), key=lambda kv: kv[1]):
        x, y = coords[pid]
        for di, dj in _AXIS_DIRECTIONS:
            neighbor = (i + di, j + dj)
            if neighbor in interior_map:
                adjacency[pid].append(interior_map[neighbor])
                continue
            bx, by = crossing(x, y, di, dj)
            key = (round(bx, 12), round(by, 12))
            bid = boundary_map.get(key)
            if bid is None:
                bid = n_interior + len(boundary_coords)
                boundary_map[key] = bid
                boundary_coords.append((bx, by))
                boundary_adjacency.append([])
            adjacency[pid].append(bid)
            boundary_adjacency[bid - n_interior].append(pid)
    all_coords = coords + boundary_coords
    is_boundary = [False] * n_interior + [True] * len(boundary_coords)
    adjacency.extend(boundary_adjacency)
    return _finalize(all_coords, is_boundary, adjacency, descriptor)


def _build_disk(n: int) -> DiscreteDomain:
    h = 2.0 / n
    cutoff = 1.0 - h / 2.0

    def inside(x, y):
        return math.hypot(x, y) < cutoff

    def crossing(x, y, di, dj):
        point = _circle_crossing(x, y, di, dj, 1.0, inward=False)
        assert point is not None
        return point

    return _lattice_disk_like(n, {"shape": "disk", "n": n, "step": h}, inside, crossing)


def _build_annulus(n: int, inner_radius: float) -> DiscreteDomain:
    h = 2.0 / n
    if not 0.0 < inner_radius < 1.0:
        raise DomainError("annulus inner_radius must lie strictly between 0 and 1")
    lo = inner_radius + h / 2.0
    hi = 1.0 - h / 2.0
    if lo >= hi:
        raise DomainError("resolution too small to yield at least one interior point")

    def inside(x, y):
        return lo < math.hypot(x, y) < hi

    def crossing(x, y, di, dj):
        qx, qy = x + di * h, y + dj * h
        qr = math.hypot(qx, qy)
        if qr >= hi:
            point = _circle_crossing(x, y, di, dj, 1.0, inward=False)
            assert point is not None
            return point
        point = _circle_crossing(x, y, di, dj, inner_radius, inward=True)
        if point is not None:
            return point
        # The arm points at the hole but the grid line misses it; project the
        # offending lattice point radially onto the inner circle instead.
        scale = inner_radius / qr
        return (qx * scale, qy * scale)

    descriptor = {"shape": "annulus", "n": n, "step": h, "inner_radius": inner_radius}
    return _lattice_disk_like(n, descriptor, inside, crossing)


def _build_lshape(n: int) -> DiscreteDomain:
    if n % 2 == 0:
        raise DomainError("lshape requires odd n so the notch corner lies on the grid")
    if n < 5:
        raise DomainError("resolution too small to yield at least one interior point")
    ic = (n - 1) // 2
    ticks = np.linspace(0.0, 1.0, n)
    kept: dict[tuple[int, int], int] = {}
    coords = []
    is_boundary = []
    for j in range(n):
        for i in range(n):
            if i > ic and j > ic:
                continue
            kept[(i, j)] = len(coords)
            coords.append((ticks[i], ticks[j]))
            on_outer = i in (0, n - 1) or j in (0, n - 1)
            on_cut = (i == ic and j >= ic) or (j == ic and i >= ic)
            is_boundary.append(on_outer or on_cut)
    adjacency: list[list[int]] = [[] for _ in range(len(coords))]
    for (i, j), pid in kept.items():
        for di, dj in _AXIS_DIRECTIONS:
            neighbor = (i + di, j + dj)
            if neighbor in kept:
                adjacency[pid].append(kept[neighbor])
    for nbrs in adjacency:
        nbrs.sort()
    # Convex corners are outside every lattice stencil; attach them to their
    # diagonal interior neighbor.
    for corner, diagonal in (
        ((0, 0), (1, 1)),
        ((n - 1, 0), (n - 2, 1)),
        ((0, n - 1), (1, n - 2)),
        ((n - 1, ic), (n - 2, ic - 1)),
        ((ic, n - 1), (ic - 1, n - 2)),
    ):
        adjacency[kept[corner]].append(kept[diagonal])
    descriptor = {"shape": "lshape", "n": n, "step": 1.0 / (n - 1), "notch": 0.5}
    return _finalize(coords, is_boundary, adjacency, descriptor)


def load_custom_domain(path) -> DiscreteDomain:
    """Load a domain from JSON with ``points``, ``boundary`` and ``edges`` arrays.

    Format: ``points`` is a list of ``[id, x, y]`` with ids dense 0..N-1,
    ``boundary`` lists boundary ids, ``edges`` lists undirected ``[i, j]``
    pairs, and an optional ``metric`` key holds a full N-by-N matrix.
    Every structural invariant is checked; violations raise
    :class:`DomainError` naming the invariant.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    for key in ("points", "boundary", "edges"):
        if key not in payload:
            raise DomainError(f"custom domain file is missing the '{key}' array")
    points = payload["points"]
    n = len(points)
    ids = sorted(int(row[0]) for row in points)
    if ids != list(range(n)):
        raise DomainError("point ids must be dense 0..N-1")
    coords = np.zeros((n, 2), dtype=np.float64)
    for row in points:
        pid = int(row[0])
        coords[pid] = (float(row[1]), float(row[2]))
    is_boundary = np.zeros(n, dtype=bool)
    for bid in payload["boundary"]:
        bid = int(bid)
        if not 0 <= bid < n:
            raise DomainError(f"boundary id {bid} is out of range")
        is_boundary[bid] = True
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for edge in payload["edges"]:
        i, j = int(edge[0]), int(edge[1])
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"edge ({i}, {j}) references an unknown point")
        if i == j:
            raise DomainError(f"edge ({i}, {j}) is a self loop")
        if j not in adjacency[i]:
            adjacency[i].append(j)
        if i not in adjacency[j]:
            adjacency[j].append(i)
    for nbrs in adjacency:
        nbrs.sort()
    metric = None
    if "metric" in payload:
        metric = np.asarray(payload["metric"], dtype=np.float64)
        if metric.shape != (n, n):
            raise DomainError("metric matrix must be N-by-N")
        metric.setflags(write=False)
    domain = _finalize(
        coords, is_boundary, adjacency, {"shape": "custom", "source": str(path)}, metric
    )
    validate_domain(domain)
    return domain


def validate_domain(domain: DiscreteDomain) -> None:
    """Check every structural invariant, raising DomainError with its name."""
    n = domain.n_points
    if not np.all(np.isfinite(domain.coords)):
        raise DomainError("coordinates must be finite")
    n_boundary = int(domain.is_boundary.sum())
    if n_boundary < 2:
        raise DomainError("boundary must contain at least two points")
    if n_boundary == n:
        raise DomainError("domain must contain at least one interior point")
    if domain.metric_matrix is not None:
        m = domain.metric_matrix
        if not np.all(np.isfinite(m)):
            raise DomainError("metric must be finite")
        if np.any(np.diag(m) != 0.0):
            raise DomainError("metric(i, i) must be 0")
        if not np.array_equal(m, m.T):
            raise DomainError("metric must be symmetric")
        off = m + np.eye(n)
        if np.any(off <= 0.0):
            raise DomainError("metric(i, j) must be positive for distinct points")
    else:
        scaled = np.round(domain.coords * 1e12).astype(np.int64)
        if np.unique(scaled, axis=0).shape[0] != n:
            raise DomainError(
                "metric(i, j) must be positive for distinct points "
                "(duplicate coordinates found)"
            )
    neighbors = domain.undirected_neighbors
    interior = set(int(i) for i in domain.interior_ids)
    for bid in domain.boundary_ids:
        if not any(j in interior for j in neighbors[bid]):
            raise DomainError(
                f"boundary point {int(bid)} is not adjacent to any interior point"
            )
    # Every interior component must touch a node that is adjacent to the
    # boundary; this is the discrete density of U in K.
    boundary_touching = {
        i for i in interior if any(domain.is_boundary[j] for j in neighbors[i])
    }
    seen: set[int] = set()
    for start in sorted(interior):
        if start in seen:
            continue
        component = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            for j in neighbors[node]:
                if j in interior and j not in component:
                    component.add(j)
                    stack.append(j)
        seen |= component
        if not component & boundary_touching:
            witness = min(component)
            raise DomainError(
                f"interior point {witness} cannot reach the boundary "
                "through interior adjacency"
            )


def interior_graph_connected(domain: DiscreteDomain) -> bool:
    """True when the interior nodes form one component under adjacency."""
    interior = set(int(i) for i in domain.interior_ids)
    if not interior:
        return False
    neighbors = domain.undirected_neighbors
    start = min(interior)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for j in neighbors[node]:
            if j in interior and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen == interior
