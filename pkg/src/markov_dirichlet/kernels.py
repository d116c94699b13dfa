r"""Row-stochastic transition kernels realizing the boundary-clamped operator.

A :class:`MarkovKernel` holds one probability row per node. Boundary rows are
exactly the identity (the operator leaves boundary values fixed); interior
rows average over nearby nodes and may deposit mass on the boundary. The
interior-to-interior block plays the role of the unclamped operator, and its
spectral radius drives the convergence rate of the fixed-point iteration.

Builders
--------
``grid-walk``
    Nearest-neighbor walk over the domain adjacency. On generated lattice
    shapes the weights are inverse-distance pair weights (the classical
    Shortley-Weller coefficients), which reduce to the uniform 1/4 stencil
    on equal arms and reproduce affine fields exactly even where boundary
    arms are shortened. ``lazy`` in [0, 1) adds a self-loop.
``ball-average``
    Uniform average over the nodes strictly inside a ball of radius
    ``radius_factor * boundary_distance(x)``, including x itself. The
    support is symmetrized (an offset is kept only when its mirror image is
    also an interior node in the ball) so rows stay exact on affine fields;
    rows whose ball holds no other node fall back to the grid-walk stencil.
``custom``
    Loaded from JSON ``{"rows": [[row_id, [[target, weight], ...]], ...]}``;
    weights are validated (positivity, stochasticity within 1e-12, absorbing
    boundary rows) and then renormalized exactly.

Every row is normalized so that a sequential sum in ascending target order
gives exactly 1.0; together with the fixed traversal order of sparse matvec
this makes :func:`apply` bit-reproducible regardless of worker count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import scipy.sparse as sp

from ._util import normalize_row_exact
from .errors import KernelError
from .fields import ScalarField, same_domain
from .geometry import DiscreteDomain

_ROW_SUM_TOL = 1e-12


@dataclass(eq=False)
class MarkovKernel:
    """Sparse row-stochastic operator bound to a domain.

    ``matrix`` is CSR with sorted indices; row ``i`` holds the measure the
    operator integrates against at node ``i``. Kernels are immutable after
    construction and safe to share across workers; ``_cache`` only memoizes
    derived read-only artifacts (interior blocks, check reports).
    """

    domain: DiscreteDomain
    matrix: sp.csr_matrix
    builder_tag: str
    params: Mapping[str, Any]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_points(self) -> int:
        return self.domain.n_points

    def row(self, i: int) -> list[tuple[int, float]]:
        start, stop = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return [
            (int(j), float(w))
            for j, w in zip(self.matrix.indices[start:stop], self.matrix.data[start:stop])
        ]

    def interior_blocks(self):
        """(P_II, P_IB) as CSR blocks in interior/boundary id order."""
        key = "interior_blocks"
        if key not in self._cache:
            interior = self.domain.interior_ids
            boundary = self.domain.boundary_ids
            sub = self.matrix[interior, :]
            self._cache[key] = (
                sub[:, interior].tocsr(),
                sub[:, boundary].tocsr(),
            )
        return self._cache[key]


def _rows_to_csr(domain: DiscreteDomain, rows: list[list[tuple[int, float]]]) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for row in rows:
        row = sorted(row, key=lambda tw: tw[0])
        indices.extend(t for t, _ in row)
        data.extend(w for _, w in row)
        indptr.append(len(indices))
    matrix = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(domain.n_points, domain.n_points),
    )
    matrix.sort_indices()
    return matrix


def _apply_lazy(targets: np.ndarray, weights: np.ndarray, self_id: int, lazy: float):
    if lazy <= 0.0:
        return targets, weights
    weights = weights * (1.0 - lazy)
    if self_id in targets:
        weights[np.searchsorted(targets, self_id)] += lazy
        return targets, weights
    pos = int(np.searchsorted(targets, self_id))
    targets = np.insert(targets, pos, self_id)
    weights = np.insert(weights, pos, lazy)
    return targets, weights


def _grid_walk_row(domain: DiscreteDomain, pid: int) -> tuple[np.ndarray, np.ndarray]:
    """Stencil targets and unnormalized weights for one interior node."""
    neighbors = sorted(set(domain.adjacency[pid]))
    if not neighbors:
        raise KernelError(f"interior point {pid} has no neighbors to walk to")
    shape = domain.descriptor.get("shape")
    use_pairs = shape in ("square", "disk", "annulus", "lshape")
    targets = np.asarray(neighbors, dtype=np.int64)
    if not use_pairs:
        return targets, np.ones(len(neighbors), dtype=np.float64)
    # Group arms by dominant axis; inverse-distance pair coefficients
    # 2 / (s * (s + s_opposite)) annihilate affine fields exactly.
    p = domain.coords[pid]
    arms: dict[tuple[int, int], float] = {}
    for t in neighbors:
        delta = domain.coords[t] - p
        axis = 0 if abs(delta[0]) >= abs(delta[1]) else 1
        side = 1 if delta[axis] > 0 else -1
        key = (axis, side)
        if key in arms:
            # Irregular stencil (only possible for hand-built domains): give
            # up on pair weights and average uniformly.
            return targets, np.ones(len(neighbors), dtype=np.float64)
        arms[key] = float(np.hypot(delta[0], delta[1]))
    weights = np.empty(len(neighbors), dtype=np.float64)
    for k, t in enumerate(neighbors):
        delta = domain.coords[t] - p
        axis = 0 if abs(delta[0]) >= abs(delta[1]) else 1
        side = 1 if delta[axis] > 0 else -1
        s = arms[(axis, side)]
        s_opp = arms.get((axis, -side), s)
        weights[k] = 2.0 / (s * (s + s_opp))
    return targets, weights


def build_kernel(domain: DiscreteDomain, spec: Mapping[str, Any]) -> MarkovKernel:
    """Build a kernel from a descriptor.

    ``spec``: ``{"type": "grid-walk", "lazy": 0.0}``,
    ``{"type": "ball-average", "radius_factor": 0.5}`` or
    ``{"type": "custom", "path": ...}``.
    """
    if "type" not in spec:
        raise KernelError("kernel spec requires a 'type' key")
    kind = spec["type"]
    if kind == "grid-walk":
        lazy = float(spec.get("lazy", 0.0))
        if not 0.0 <= lazy < 1.0:
            raise KernelError("grid-walk lazy parameter must lie in [0, 1)")
        return _build_grid_walk(domain, lazy)
    if kind == "ball-average":
        lam = float(spec.get("radius_factor", 0.5))
        if not 0.0 < lam <= 1.0:
            raise KernelError("ball-average radius_factor must lie in (0, 1]")
        return _build_ball_average(domain, lam)
    if kind == "custom":
        if "path" not in spec:
            raise KernelError("custom kernel spec requires a 'path' key")
        return load_custom_kernel(domain, spec["path"])
    raise KernelError(f"unknown kernel type {kind!r}")


def _build_grid_walk(domain: DiscreteDomain, lazy: float) -> MarkovKernel:
    rows: list[list[tuple[int, float]]] = []
    for pid in range(domain.n_points):
        if domain.is_boundary[pid]:
            rows.append([(pid, 1.0)])
            continue
        targets, weights = _grid_walk_row(domain, pid)
        targets, weights = _apply_lazy(targets, weights / weights.sum(), pid, lazy)
        weights = normalize_row_exact(weights)
        rows.append(list(zip(targets.tolist(), weights.tolist())))
    kernel = MarkovKernel(domain, _rows_to_csr(domain, rows), "grid-walk", {"lazy": lazy})
    validate_kernel(kernel)
    return kernel


def _build_ball_average(domain: DiscreteDomain, lam: float) -> MarkovKernel:
    euclidean = domain.metric_matrix is None
    node_at: dict[tuple[float, float], int] = {}
    if euclidean:
        for i in range(domain.n_points):
            node_at[(round(float(domain.coords[i, 0]), 9), round(float(domain.coords[i, 1]), 9))] = i
    rows: list[list[tuple[int, float]]] = []
    for pid in range(domain.n_points):
        if domain.is_boundary[pid]:
            rows.append([(pid, 1.0)])
            continue
        radius = lam * float(domain.boundary_distances[pid])
        dists = domain.distances_from(pid)
        members = [
            int(j)
            for j in np.flatnonzero(dists < radius)
            if j != pid and not domain.is_boundary[j]
        ]
        if euclidean and members:
            mirrored = []
            p = domain.coords[pid]
            for j in members:
                mirror = 2.0 * p - domain.coords[j]
                mid = node_at.get((round(float(mirror[0]), 9), round(float(mirror[1]), 9)))
                if mid is not None and not domain.is_boundary[mid]:
                    mirrored.append(j)
            members = mirrored
        if not members:
            targets, weights = _grid_walk_row(domain, pid)
            weights = normalize_row_exact(weights)
            rows.append(list(zip(targets.tolist(), weights.tolist())))
            continue
        targets = np.asarray(sorted(members + [pid]), dtype=np.int64)
        weights = normalize_row_exact(np.ones(targets.size, dtype=np.float64))
        rows.append(list(zip(targets.tolist(), weights.tolist())))
    kernel = MarkovKernel(
        domain, _rows_to_csr(domain, rows), "ball-average", {"radius_factor": lam}
    )
    validate_kernel(kernel)
    return kernel


def load_custom_kernel(domain: DiscreteDomain, path) -> MarkovKernel:
    """Load and validate a kernel from its JSON row format."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if "rows" not in payload:
        raise KernelError("custom kernel file is missing the 'rows' array")
    n = domain.n_points
    seen: dict[int, list[tuple[int, float]]] = {}
    for entry in payload["rows"]:
        rid = int(entry[0])
        if not 0 <= rid < n:
            raise KernelError(f"row id {rid} is out of range")
        if rid in seen:
            raise KernelError(f"row {rid} is defined more than once")
        row = [(int(t), float(w)) for t, w in entry[1]]
        seen[rid] = row
    missing = [i for i in range(n) if i not in seen]
    if missing:
        raise KernelError(f"kernel file is missing rows for ids {missing[:8]}")
    rows: list[list[tuple[int, float]]] = []
    for rid in range(n):
        row = seen[rid]
        total = 0.0
        for t, w in sorted(row, key=lambda tw: tw[0]):
            if not 0 <= t < n:
                raise KernelError(f"row {rid} targets unknown point {t}")
            if w <= 0.0:
                raise KernelError(f"row {rid} has a nonpositive weight on target {t}")
            total += w
        if abs(total - 1.0) > _ROW_SUM_TOL:
            raise KernelError(
                f"row {rid} weights sum to {total:.17g}, expected 1 within {_ROW_SUM_TOL:g}"
            )
        if domain.is_boundary[rid] and row != [(rid, 1.0)]:
            raise KernelError(f"boundary row {rid} must be absorbing: [[{rid}, 1.0]]")
        targets = np.asarray([t for t, _ in sorted(row, key=lambda tw: tw[0])], dtype=np.int64)
        weights = normalize_row_exact(
            np.asarray([w for _, w in sorted(row, key=lambda tw: tw[0])], dtype=np.float64)
        )
        rows.append(list(zip(targets.tolist(), weights.tolist())))
    kernel = MarkovKernel(
        domain, _rows_to_csr(domain, rows), "custom", {"source": str(path)}
    )
    validate_kernel(kernel)
    return kernel


def validate_kernel(kernel: MarkovKernel) -> None:
    """Check stochasticity and boundary absorption; raise KernelError on failure."""
    matrix = kernel.matrix
    domain = kernel.domain
    if matrix.shape != (domain.n_points, domain.n_points):
        raise KernelError("kernel matrix shape does not match the domain")
    if np.any(matrix.data <= 0.0):
        raise KernelError("kernel weights must be positive")
    sums = np.asarray(matrix.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(sums - 1.0) > _ROW_SUM_TOL)
    if bad.size:
        rid = int(bad[0])
        raise KernelError(
            f"row {rid} weights sum to {sums[rid]:.17g}, expected 1 within {_ROW_SUM_TOL:g}"
        )
    for b in domain.boundary_ids:
        start, stop = matrix.indptr[b], matrix.indptr[b + 1]
        if stop - start != 1 or matrix.indices[start] != b or matrix.data[start] != 1.0:
            raise KernelError(f"boundary row {int(b)} must be absorbing: [[{int(b)}, 1.0]]")


def apply_kernel(kernel: MarkovKernel, f: ScalarField) -> ScalarField:
    """One application of the clamped operator.

    Interior values become the row-weighted average of their targets;
    boundary values are returned unchanged (bit-for-bit, the rows are exact
    identities). Per-row summation runs in ascending target order, so the
    result does not depend on how rows are scheduled.
    """
    if not same_domain(kernel.domain, f.domain):
        raise KernelError("field and kernel live on different domains")
    return ScalarField(f.domain, kernel.matrix @ f.values)


def interior_spectral_bound(kernel: MarkovKernel, iters: int = 200) -> float:
    """Power-iteration estimate of the interior block's spectral radius.

    The block is entrywise nonnegative, so iterating the all-ones vector and
    tracking sup-norm growth converges to the dominant eigenvalue. Lattice
    walks without laziness are bipartite (their spectrum is symmetric), so
    the estimate is the geometric mean of two consecutive growth factors,
    which is insensitive to the period-2 sign flip. Returns a value in
    [0, 1]; kernels whose mass always reaches the boundary stay below 1.
    """
    if iters < 10:
        raise KernelError("spectral bound estimation needs iters >= 10")
    p_ii, _ = kernel.interior_blocks()
    if p_ii.shape[0] == 0:
        return 0.0
    v = np.ones(p_ii.shape[0], dtype=np.float64)
    previous = 1.0
    ratio = 0.0
    for _ in range(iters):
        w = p_ii @ v
        top = float(w.max(initial=0.0))
        if top == 0.0:
            return 0.0
        ratio = math.sqrt(top * previous)
        previous = top
        v = w / top
    return float(min(max(ratio, 0.0), 1.0))
