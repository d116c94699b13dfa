r"""Fixed-point iteration of the clamped operator, with diagnostics.

Iterating the kernel on any extension of boundary data contracts toward the
unique invariant field with that data. The stopping rule watches the
successive-difference sup norm; the contraction estimate (median ratio of
late residuals) converts it into the error surrogate residual / (1 - rho),
reported but not enforced, since the underlying theorem is rate-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median
from typing import Mapping

import numpy as np

from .conditions import verify_condition_B
from .errors import KernelError, MonotonicityError, SolverError
from .fields import (
    ScalarField,
    boundary_array,
    extend_boundary,
    restrict_boundary,
    same_domain,
)
from .kernels import MarkovKernel

DEFAULT_TOL = 1e-10
MAX_ITER_CAP = 10**6
#: Pointwise slack treated as numerically monotone.
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one fixed-point run."""

    fixed_point: ScalarField
    iterations: int
    residuals: list[float]
    contraction_estimate: float
    converged: bool
    monotone: bool
    tol: float
    max_iters: int
    check_status: str

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "monotone": self.monotone,
            "contraction_estimate": self.contraction_estimate,
            "final_residual": self.residuals[-1] if self.residuals else 0.0,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "check_status": self.check_status,
        }


def default_max_iters(kernel: MarkovKernel) -> int:
    interior = max(int(kernel.domain.interior_ids.size), 1)
    return min(100 * interior, MAX_ITER_CAP)


def _contraction_estimate(residuals: list[float]) -> float:
    tail = residuals[-11:]
    ratios = [
        nxt / prev
        for prev, nxt in zip(tail, tail[1:])
        if prev > 0.0
    ]
    if not ratios:
        return 0.0
    return float(median(ratios))


def _enforce_condition_b(kernel: MarkovKernel, force: bool) -> str:
    report = verify_condition_B(kernel)
    if report.passed:
        return "passed"
    if force:
        return "forced"
    raise SolverError(
        "kernel fails the maximum-principle support check "
        f"(witness point {report.witness}); pass force=True to iterate anyway"
    )


def iterate(
    kernel: MarkovKernel,
    start: ScalarField,
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
    force: bool = False,
) -> SolveReport:
    """Apply the clamped operator until successive differences fall below tol.

    The returned fixed point is the last iterate, so its own residual is at
    most the final recorded one (each application contracts sup norms).
    Boundary values are carried through unchanged, bit for bit. A run that
    exhausts ``max_iters`` comes back with ``converged=False``; it is never
    reported as a success.
    """
    if tol <= 0.0:
        raise SolverError("tolerance must be positive")
    if max_iters is None:
        max_iters = default_max_iters(kernel)
    if max_iters < 1:
        raise SolverError("max_iters must be at least 1")
    if not same_domain(kernel.domain, start.domain):
        raise KernelError("field and kernel live on different domains")
    check_status = _enforce_condition_b(kernel, force)
    matrix = kernel.matrix
    current = start.values
    residuals: list[float] = []
    monotone = True
    converged = False
    iterations = 0
    for _ in range(max_iters):
        new = matrix @ current
        diff = new - current
        residual = float(np.max(np.abs(diff)))
        residuals.append(residual)
        if monotone and diff.real.size and float(diff.real.min()) < -MONOTONE_SLACK:
            monotone = False
        current = new
        iterations += 1
        if residual <= tol:
            converged = True
            break
    return SolveReport(
        fixed_point=ScalarField(kernel.domain, current),
        iterations=iterations,
        residuals=residuals,
        contraction_estimate=_contraction_estimate(residuals),
        converged=converged,
        monotone=monotone,
        tol=tol,
        max_iters=max_iters,
        check_status=check_status,
    )


def theta_projection(
    kernel: MarkovKernel,
    data: Mapping[int, complex],
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
    force: bool = False,
) -> ScalarField:
    """The invariant field with the given boundary data.

    Computed by iterating the zero-fill extension; by uniqueness the limit
    is the same for every continuous extension of the data.
    """
    seed = extend_boundary(data, kernel.domain, "zero-fill")
    report = iterate(kernel, seed, tol=tol, max_iters=max_iters, force=force)
    if not report.converged:
        raise SolverError(
            f"projection did not converge within {report.max_iters} iterations "
            f"(final residual {report.residuals[-1]:.3g})"
        )
    return report.fixed_point


def uniqueness_test(
    kernel: MarkovKernel,
    data: Mapping[int, complex],
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
    force: bool = False,
) -> float:
    """Largest pairwise sup distance between limits from three crude extensions.

    The extensions are zero-fill, nearest-boundary copy, and the constant
    equal to max |data|. Uniqueness of the invariant field predicts the
    returned distance shrinks with the stopping tolerance.
    """
    domain = kernel.domain
    magnitude = float(np.max(np.abs(boundary_array(data, domain)))) if len(data) else 0.0
    seeds = [
        extend_boundary(data, domain, "zero-fill"),
        extend_boundary(data, domain, "nearest-boundary"),
        extend_boundary(data, domain, "constant", constant=magnitude),
    ]
    limits = []
    for seed in seeds:
        report = iterate(kernel, seed, tol=tol, max_iters=max_iters, force=force)
        if not report.converged:
            raise SolverError("uniqueness run did not converge; raise max_iters")
        limits.append(report.fixed_point)
    worst = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            worst = max(
                worst,
                float(np.max(np.abs(limits[i].values - limits[j].values))),
            )
    return worst


def monotone_run(
    kernel: MarkovKernel,
    start: ScalarField,
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
    force: bool = False,
) -> SolveReport:
    """Iterate a subinvariant real field, asserting monotone increments.

    Requires applying the kernel once to not decrease the field anywhere
    (within 1e-12); each subsequent step must keep every pointwise increment
    above -1e-12, otherwise a MonotonicityError reports the step and witness
    point, which means the precondition was not actually met.
    """
    if not start.is_real():
        raise SolverError("monotone runs are defined for real fields only")
    if tol <= 0.0:
        raise SolverError("tolerance must be positive")
    if max_iters is None:
        max_iters = default_max_iters(kernel)
    check_status = _enforce_condition_b(kernel, force)
    matrix = kernel.matrix
    first = (matrix @ start.values) - start.values
    if float(first.real.min()) < -MONOTONE_SLACK:
        witness = int(np.argmin(first.real))
        raise MonotonicityError(
            "field is not subinvariant: applying the kernel decreases it at "
            f"point {witness} by {-float(first.real.min()):.3g}",
            step=0,
            witness=witness,
        )
    current = start.values
    residuals: list[float] = []
    converged = False
    iterations = 0
    for step in range(max_iters):
        new = matrix @ current
        diff = new - current
        worst = float(diff.real.min())
        if worst < -MONOTONE_SLACK:
            witness = int(np.argmin(diff.real))
            raise MonotonicityError(
                f"monotonicity violated at step {step + 1}, point {witness} "
                f"(increment {worst:.3g})",
                step=step + 1,
                witness=witness,
            )
        residual = float(np.max(np.abs(diff)))
        residuals.append(residual)
        current = new
        iterations += 1
        if residual <= tol:
            converged = True
            break
    return SolveReport(
        fixed_point=ScalarField(kernel.domain, current),
        iterations=iterations,
        residuals=residuals,
        contraction_estimate=_contraction_estimate(residuals),
        converged=converged,
        monotone=True,
        tol=tol,
        max_iters=max_iters,
        check_status=check_status,
    )


def boundary_equicontinuity_profile(
    kernel: MarkovKernel,
    start: ScalarField,
    anchor: int,
    max_n: int = 200,
) -> list[tuple[float, float]]:
    """Worst deviation from the anchor value over all iterates, per interior node.

    For each interior y this records sup over n <= max_n of
    ``|(applied^n start)(y) - start(anchor)|`` paired with the distance from
    y to the anchor, sorted by distance. At a fixed resolution the profile
    does not vanish; refining the grid shrinks its lower envelope near
    distance zero.
    """
    domain = kernel.domain
    if not 0 <= anchor < domain.n_points or not domain.is_boundary[anchor]:
        raise SolverError(f"anchor {anchor} is not a boundary point")
    if max_n < 1:
        raise SolverError("max_n must be at least 1")
    interior = domain.interior_ids
    reference = start.values[anchor]
    current = start.values
    worst = np.zeros(interior.size, dtype=np.float64)
    matrix = kernel.matrix
    for _ in range(max_n):
        current = matrix @ current
        deviation = np.abs(current[interior] - reference)
        np.maximum(worst, deviation, out=worst)
    distances = np.array([domain.metric(int(y), anchor) for y in interior])
    order = np.lexsort((interior, distances))
    return [(float(distances[i]), float(worst[i])) for i in order]


def limit_boundary_match(report: SolveReport, start: ScalarField) -> bool:
    """True when the run preserved the boundary data exactly."""
    boundary = report.fixed_point.domain.boundary_ids
    return bool(
        np.array_equal(
            report.fixed_point.values[boundary], start.values[boundary]
        )
    )


def restriction_distance(a: ScalarField, b: ScalarField) -> float:
    """Sup distance of boundary restrictions; helper for uniqueness studies."""
    ra = restrict_boundary(a)
    rb = restrict_boundary(b)
    return max(abs(ra[k] - rb[k]) for k in ra) if ra else 0.0


def error_bound(report: SolveReport) -> float:
    """Residual-based error surrogate residual / (1 - rho hat)."""
    rho = min(report.contraction_estimate, 0.999999)
    final = report.residuals[-1] if report.residuals else 0.0
    return final / (1.0 - rho)
