r"""Checkers for the two hypotheses behind the fixed-point theorem.

Condition A (barriers)
    At each boundary anchor x there must be a continuous h with h(x) = 0,
    h < 0 everywhere else, and h subinvariant under the clamped operator
    (applying the kernel never decreases h on the interior). The catalog
    constructs witnesses:

    * ``supporting-hyperplane``: h(y) = -<n, y - x> for the outward normal
      n, minus eps * dist(y, x)^2 when the tangent line touches the boundary
      in more than one point (straight edges). eps is searched downward in
      powers of ten until the sign pattern holds and the kernel check still
      passes; any witness suffices.
    * ``wedge-power``: h(y) = -min(r^beta cos(beta * theta), cap) in polar
      coordinates around the anchor with theta measured from the inward
      bisector. beta = 1/2 on straight edges and smooth arcs, beta = 1/3 at
      re-entrant corners and on inner circles, where the domain subtends
      more than a half turn. The level cap is searched downward; the uncapped
      profile can dip below its stencil average within a few grid steps of
      the anchor (the fourth derivative blows up like r^(beta-4)), and
      capping restores subinvariance without touching the sign pattern.

Condition B (maximum principle)
    A real field that is subinvariant and attains its global maximum at an
    interior point must be constant. Quantifying over all fields is
    impossible, so two complementary checks are reported side by side: a
    graph-theoretic sufficient condition on the kernel support, and an
    empirical check on sampled near-invariant fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ._util import thread_map
from .errors import BarrierError, KernelError
from .fields import ScalarField, extend_boundary
from .geometry import DiscreteDomain
from .kernels import MarkovKernel, apply_kernel

DEFAULT_CONDITION_TOL = 1e-10
#: Barriers are accepted only when their kernel check clears this stricter
#: floor, so monotone runs started from them keep increments above -1e-12.
BARRIER_BUILD_TOL = 1e-13

_EPS_CANDIDATES = (0.0,) + tuple(10.0 ** (-k) for k in range(0, 15))


@dataclass(frozen=True, eq=False)
class Barrier:
    """A verified-shape candidate barrier anchored at one boundary node."""

    field: ScalarField
    anchor: int
    catalog_tag: str
    details: Mapping[str, Any]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a hypothesis check; failure is a report, not an exception."""

    condition: str
    passed: bool
    worst_violation: float
    witness: int | None
    tolerance: float
    details: str
    parameters: Mapping[str, Any]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "witness_id": self.witness,
            "tolerance": self.tolerance,
            "details": self.details,
            "parameters": dict(self.parameters),
        }


def _edge_signature(coord: float, lo: float, hi: float, tol: float = 1e-9) -> int:
    if abs(coord - lo) <= tol:
        return -1
    if abs(coord - hi) <= tol:
        return 1
    return 0


def _outward_normal(domain: DiscreteDomain, anchor: int) -> np.ndarray:
    """Outward unit normal where the boundary is convex; BarrierError otherwise."""
    shape = domain.descriptor.get("shape")
    a = domain.coords[anchor]
    if shape == "disk":
        return a / np.hypot(a[0], a[1])
    if shape == "annulus":
        radius = float(np.hypot(a[0], a[1]))
        if abs(radius - 1.0) <= 1e-9:
            return a / radius
        raise BarrierError(
            "supporting-hyperplane precondition failed: inner-circle anchors "
            "have no supporting line (boundary is concave there)"
        )
    if shape == "square":
        nx = _edge_signature(a[0], 0.0, 1.0)
        ny = _edge_signature(a[1], 0.0, 1.0)
        normal = np.array([float(nx), float(ny)])
        return normal / np.hypot(normal[0], normal[1])
    if shape == "lshape":
        notch = float(domain.descriptor.get("notch", 0.5))
        on_cut_x = abs(a[0] - notch) <= 1e-9 and a[1] >= notch - 1e-9
        on_cut_y = abs(a[1] - notch) <= 1e-9 and a[0] >= notch - 1e-9
        nx = _edge_signature(a[0], 0.0, 1.0)
        ny = _edge_signature(a[1], 0.0, 1.0)
        if (on_cut_x or on_cut_y) and nx == 0 and ny == 0:
            raise BarrierError(
                "supporting-hyperplane precondition failed: the domain lies on "
                "both sides of any line through a notch-edge anchor"
            )
        if nx == 0 and ny == 0:
            raise BarrierError(
                "supporting-hyperplane precondition failed: anchor is not on a "
                "convex boundary segment"
            )
        normal = np.array([float(nx), float(ny)])
        return normal / np.hypot(normal[0], normal[1])
    raise BarrierError(
        "supporting-hyperplane precondition failed: no outward normal is "
        f"available for shape {shape!r}"
    )


def _wedge_frame(domain: DiscreteDomain, anchor: int) -> tuple[float, float]:
    """Inward bisector angle and power for the wedge barrier at ``anchor``."""
    shape = domain.descriptor.get("shape")
    a = domain.coords[anchor]
    if shape == "disk":
        return math.atan2(-a[1], -a[0]), 0.5
    if shape == "annulus":
        radius = float(np.hypot(a[0], a[1]))
        if abs(radius - 1.0) <= 1e-9:
            return math.atan2(-a[1], -a[0]), 0.5
        # Inner circle: the domain wraps a full turn around the hole, so the
        # angular spread reaches pi; beta = 1/3 keeps the profile positive.
        return math.atan2(a[1], a[0]), 1.0 / 3.0
    if shape in ("square", "lshape"):
        notch = float(domain.descriptor.get("notch", 0.5)) if shape == "lshape" else None
        nx = _edge_signature(a[0], 0.0, 1.0)
        ny = _edge_signature(a[1], 0.0, 1.0)
        if shape == "lshape":
            on_cut_x = abs(a[0] - notch) <= 1e-9 and a[1] >= notch - 1e-9
            on_cut_y = abs(a[1] - notch) <= 1e-9 and a[0] >= notch - 1e-9
            at_notch = on_cut_x and on_cut_y
            if at_notch:
                return math.atan2(-1.0, -1.0), 1.0 / 3.0
            if on_cut_x and nx == 0 and ny == 0:
                return math.pi, 0.5
            if on_cut_y and nx == 0 and ny == 0:
                return -math.pi / 2.0, 0.5
        if nx == 0 and ny == 0:
            raise BarrierError(
                "wedge-power precondition failed: anchor is not on a known "
                "boundary segment"
            )
        return math.atan2(float(-ny), float(-nx)), 0.5
    raise BarrierError(
        f"wedge-power precondition failed: no wedge frame for shape {shape!r}"
    )


def _sign_pattern_ok(values: np.ndarray, anchor: int) -> bool:
    if values[anchor] != 0.0:
        return False
    off = np.delete(values, anchor)
    return bool(np.all(off < 0.0))


def make_barrier(
    domain: DiscreteDomain,
    anchor: int,
    tag: str,
    kernel: MarkovKernel | None = None,
    custom_values: np.ndarray | None = None,
    build_tol: float = BARRIER_BUILD_TOL,
) -> Barrier:
    """Construct a catalog barrier at a boundary anchor.

    When ``kernel`` is given, free parameters (the hyperplane perturbation
    eps, the wedge level cap) are searched until the kernel subinvariance
    check passes at ``build_tol``; without a kernel only the sign pattern is
    enforced. Raises BarrierError when no catalog entry covers the anchor's
    local geometry, naming the failed precondition.
    """
    if not 0 <= anchor < domain.n_points or not domain.is_boundary[anchor]:
        raise BarrierError(f"anchor {anchor} is not a boundary point")
    if tag == "supporting-hyperplane":
        return _make_hyperplane(domain, anchor, kernel, build_tol)
    if tag == "wedge-power":
        return _make_wedge(domain, anchor, kernel, build_tol)
    if tag == "custom":
        if custom_values is None:
            raise BarrierError("custom barriers need explicit values")
        values = np.asarray(custom_values, dtype=np.float64)
        if not _sign_pattern_ok(values, anchor):
            raise BarrierError(
                "custom barrier must vanish at the anchor and be strictly "
                "negative everywhere else"
            )
        barrier_field = ScalarField(domain, values.astype(np.complex128))
        return Barrier(barrier_field, anchor, "custom", {})
    raise BarrierError(f"unknown catalog tag {tag!r}")


def _kernel_margin(kernel: MarkovKernel, values: np.ndarray) -> float:
    test = ScalarField(kernel.domain, values.astype(np.complex128))
    diff = (apply_kernel(kernel, test).values - test.values).real
    interior = kernel.domain.interior_ids
    if interior.size == 0:
        return 0.0
    return float(diff[interior].min())


def _make_hyperplane(domain, anchor, kernel, build_tol) -> Barrier:
    normal = _outward_normal(domain, anchor)
    offsets = domain.coords - domain.coords[anchor]
    # The domain sits behind the supporting line, so <n, y - a> <= 0 there,
    # with equality exactly on the contact set the perturbation removes.
    base = offsets @ normal
    dist2 = np.sum(offsets * offsets, axis=1)
    for eps in _EPS_CANDIDATES:
        values = base - eps * dist2
        values[anchor] = 0.0
        if not _sign_pattern_ok(values, anchor):
            continue
        if kernel is not None and _kernel_margin(kernel, values) < -build_tol:
            continue
        details = {"epsilon": eps, "normal": [float(normal[0]), float(normal[1])]}
        barrier_field = ScalarField(domain, values.astype(np.complex128))
        return Barrier(barrier_field, anchor, "supporting-hyperplane", details)
    raise BarrierError(
        "supporting-hyperplane search exhausted: no perturbation in "
        "{1, 1e-1, ..., 1e-14, 0} gives a strictly negative, subinvariant "
        f"barrier at anchor {anchor}"
    )


def _make_wedge(domain, anchor, kernel, build_tol) -> Barrier:
    bisector, beta = _wedge_frame(domain, anchor)
    offsets = domain.coords - domain.coords[anchor]
    r = np.hypot(offsets[:, 0], offsets[:, 1])
    phi = np.arctan2(offsets[:, 1], offsets[:, 0])
    theta = np.mod(phi - bisector + math.pi, 2.0 * math.pi) - math.pi
    profile = np.power(r, beta) * np.cos(beta * theta)
    profile[anchor] = 0.0
    off = np.delete(profile, anchor)
    if np.any(off <= 0.0):
        worst = int(np.argmin(np.where(np.arange(domain.n_points) == anchor, np.inf, profile)))
        raise BarrierError(
            "wedge-power precondition failed: the domain leaves the wedge "
            f"(profile is not positive at point {worst})"
        )
    caps: list[float] = []
    if kernel is None:
        caps.append(float(np.inf))
    else:
        vmax = float(profile.max())
        caps.extend(vmax * 0.5**j for j in range(0, 40))
        interior_min = float(profile[domain.interior_ids].min())
        caps.append(0.99 * interior_min)
    for cap in caps:
        values = -np.minimum(profile, cap)
        values[anchor] = 0.0
        if not _sign_pattern_ok(values, anchor):
            continue
        if kernel is not None and _kernel_margin(kernel, values) < -build_tol:
            continue
        details = {"beta": beta, "bisector": bisector, "cap": float(cap)}
        barrier_field = ScalarField(domain, values.astype(np.complex128))
        return Barrier(barrier_field, anchor, "wedge-power", details)
    raise BarrierError(
        f"wedge-power cap search exhausted at anchor {anchor}; no level cap "
        "makes the profile subinvariant for this kernel"
    )


def verify_condition_A(
    kernel: MarkovKernel, barrier: Barrier, tol: float = DEFAULT_CONDITION_TOL
) -> ConditionReport:
    """Check barrier shape invariants, then kernel subinvariance.

    Passes when the minimum of (applied - original) over interior nodes is
    at least ``-tol`` and the sign pattern holds. Shape failures are
    reported before the kernel check with ``worst_violation <= -2 tol``.
    """
    if tol <= 0.0:
        raise KernelError("condition tolerance must be positive")
    h = barrier.field.values.real
    anchor = barrier.anchor
    parameters = {
        "anchor": int(anchor),
        "catalog_tag": barrier.catalog_tag,
        "tol": tol,
        **{k: v for k, v in barrier.details.items() if not isinstance(v, (list, tuple))},
    }
    if h[anchor] != 0.0:
        return ConditionReport(
            "A", False, -max(abs(float(h[anchor])), 2.0 * tol), int(anchor), tol,
            "barrier invariant failed: value at the anchor must be exactly 0",
            parameters,
        )
    off_mask = np.ones(h.size, dtype=bool)
    off_mask[anchor] = False
    worst_off = float(h[off_mask].max())
    if worst_off >= 0.0:
        candidates = np.where(off_mask & (h >= 0.0))[0]
        return ConditionReport(
            "A", False, -max(worst_off, 2.0 * tol), int(candidates[0]), tol,
            "barrier invariant failed: values off the anchor must be strictly negative",
            parameters,
        )
    diff = (apply_kernel(kernel, barrier.field).values - barrier.field.values).real
    interior = kernel.domain.interior_ids
    if interior.size == 0:
        worst = 0.0
        witness = None
    else:
        idx = int(np.argmin(diff[interior]))
        worst = float(diff[interior][idx])
        witness = int(interior[idx])
    passed = worst >= -tol
    return ConditionReport(
        "A", passed, worst, None if passed else witness, tol,
        "min over interior of (applied - barrier); subinvariance requires it >= -tol",
        parameters,
    )


def _support_structure(kernel: MarkovKernel):
    """Interior-interior digraph, depositor set and directly hit boundary ids."""
    domain = kernel.domain
    matrix = kernel.matrix
    interior = [int(i) for i in domain.interior_ids]
    interior_set = set(interior)
    out_edges: dict[int, list[int]] = {i: [] for i in interior}
    depositors: set[int] = set()
    hit_boundary: set[int] = set()
    for i in interior:
        start, stop = matrix.indptr[i], matrix.indptr[i + 1]
        for j in matrix.indices[start:stop]:
            j = int(j)
            if j == i:
                continue
            if j in interior_set:
                out_edges[i].append(j)
            else:
                depositors.add(i)
                hit_boundary.add(j)
    return interior, out_edges, depositors, hit_boundary


def verify_condition_B(kernel: MarkovKernel) -> ConditionReport:
    """Graph-theoretic sufficient check for the discrete maximum principle.

    Passes when (i) the interior support graph is connected, (ii) every
    interior point reaches the boundary through positive-weight edges, and
    (iii) every boundary point is attached to the interior, through direct
    kernel support or, for nodes outside every stencil (lattice corners),
    through domain adjacency. Under (i) and (ii) a subinvariant real field
    with an interior maximum is constant on the support closure, which is
    the discrete mirror of the maximum principle; the result depends only on
    the support pattern, not on the weights.
    """
    cached = kernel._cache.get("condition_b")
    if cached is not None:
        return cached
    domain = kernel.domain
    interior, out_edges, depositors, hit_boundary = _support_structure(kernel)
    parameters = {"builder": kernel.builder_tag}
    report = None
    # (i) connectivity of the undirected interior support graph
    if interior:
        undirected: dict[int, set[int]] = {i: set() for i in interior}
        for i, targets in out_edges.items():
            for j in targets:
                undirected[i].add(j)
                undirected[j].add(i)
        seen = {interior[0]}
        stack = [interior[0]]
        while stack:
            node = stack.pop()
            for j in undirected[node]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        unreachable = sorted(set(interior) - seen)
        if unreachable:
            report = ConditionReport(
                "B", False, -1.0, unreachable[0], 0.0,
                "interior support graph is disconnected; a subinvariant field "
                "can peak inside one component without being constant",
                parameters,
            )
    # (ii) every interior point reaches the boundary
    if report is None:
        reaches = set(depositors)
        reverse: dict[int, list[int]] = {i: [] for i in interior}
        for i, targets in out_edges.items():
            for j in targets:
                reverse[j].append(i)
        stack = list(depositors)
        while stack:
            node = stack.pop()
            for i in reverse[node]:
                if i not in reaches:
                    reaches.add(i)
                    stack.append(i)
        trapped = sorted(set(interior) - reaches)
        if trapped:
            report = ConditionReport(
                "B", False, -1.0, trapped[0], 0.0,
                "interior mass never reaches the boundary from some points; "
                "the interior system is singular there",
                parameters,
            )
    # (iii) every boundary point is attached to the interior
    adjacency_only: list[int] = []
    if report is None:
        neighbors = domain.undirected_neighbors
        for b in domain.boundary_ids:
            b = int(b)
            if b in hit_boundary:
                continue
            if any(not domain.is_boundary[j] for j in neighbors[b]):
                adjacency_only.append(b)
                continue
            report = ConditionReport(
                "B", False, -1.0, b, 0.0,
                "boundary point receives no interior mass and has no interior "
                "adjacency; it is detached from the open set",
                parameters,
            )
            break
    if report is None:
        detail = (
            "support graph connected, boundary reachable from every interior "
            "point, every boundary point attached"
        )
        if adjacency_only:
            detail += (
                "; nodes outside every stencil, certified through adjacency: "
                f"{adjacency_only}"
            )
        report = ConditionReport("B", True, 0.0, None, 0.0, detail, parameters)
    kernel._cache["condition_b"] = report
    return report


def _component_partition(kernel: MarkovKernel) -> list[list[int]]:
    """Connected components of support plus adjacency, over all nodes."""
    domain = kernel.domain
    n = domain.n_points
    neighbors: list[set[int]] = [set(nbrs) for nbrs in domain.undirected_neighbors]
    matrix = kernel.matrix
    for i in range(n):
        start, stop = matrix.indptr[i], matrix.indptr[i + 1]
        for j in matrix.indices[start:stop]:
            j = int(j)
            if j != i:
                neighbors[i].add(j)
                neighbors[j].add(i)
    seen: set[int] = set()
    components: list[list[int]] = []
    for start_node in range(n):
        if start_node in seen:
            continue
        component = {start_node}
        stack = [start_node]
        while stack:
            node = stack.pop()
            for j in neighbors[node]:
                if j not in component:
                    component.add(j)
                    stack.append(j)
        seen |= component
        components.append(sorted(component))
    return components


def _near_fixed_point(kernel: MarkovKernel, values: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    limit = min(200 * max(kernel.domain.interior_ids.size, 1) + 200, 10**6)
    current = values.astype(np.complex128)
    for _ in range(limit):
        new = kernel.matrix @ current
        resid = float(np.max(np.abs(new - current)))
        current = new
        if resid <= tol:
            break
    return current


def empirical_max_principle(
    kernel: MarkovKernel,
    trials: int = 20,
    rng_seed: int = 0,
    tol: float = 1e-9,
) -> ConditionReport:
    """Sample near-invariant fields and test the maximum principle on them.

    Each trial iterates a random real field to a near fixed point (so it is
    subinvariant up to solver tolerance), locates the global maximum, and
    when the maximum is attained at an interior node requires the field to
    be constant within ``tol``. On top of the random trials, one indicator
    probe per connected component is always run: the fixed point of data
    equal to 1 on that component's boundary and 0 elsewhere. On a connected
    kernel the probe is the constant 1; on a split kernel it peaks inside
    one component and witnesses the violation.
    """
    if trials < 1:
        raise KernelError("empirical check needs at least one trial")
    domain = kernel.domain
    interior = domain.interior_ids
    violations: list[tuple[float, int, str]] = []

    def check(values: np.ndarray, label: str) -> None:
        g = values.real
        global_max = float(g.max())
        if interior.size == 0:
            return
        interior_max = float(g[interior].max())
        if interior_max >= global_max - 1e-12:
            spread = global_max - float(g.min())
            if spread > tol:
                witness = int(interior[np.argmax(g[interior])])
                violations.append((spread, witness, label))

    components = _component_partition(kernel)
    for index, component in enumerate(components):
        members = set(component)
        data = {
            int(b): (1.0 + 0.0j if int(b) in members else 0.0 + 0.0j)
            for b in domain.boundary_ids
        }
        seed_field = extend_boundary(data, domain, "zero-fill")
        values = _near_fixed_point(kernel, seed_field.values)
        check(values, f"component-indicator-{index}")

    def run_trial(t: int) -> np.ndarray:
        rng = np.random.default_rng(rng_seed + t)
        start = rng.uniform(-1.0, 1.0, domain.n_points).astype(np.complex128)
        return _near_fixed_point(kernel, start)

    for t, values in enumerate(thread_map(run_trial, range(trials))):
        check(values, f"trial-{t}")

    parameters = {
        "trials": trials,
        "rng_seed": rng_seed,
        "components": len(components),
    }
    if violations:
        violations.sort(key=lambda v: -v[0])
        spread, witness, label = violations[0]
        return ConditionReport(
            "B-empirical", False, -spread, witness, tol,
            f"{len(violations)} sampled fields peak inside the interior without "
            f"being constant; worst case from {label}",
            parameters,
        )
    return ConditionReport(
        "B-empirical", True, 0.0, None, tol,
        f"no violation over {trials} random fixed-point trials and "
        f"{len(components)} component indicator probes",
        parameters,
    )
