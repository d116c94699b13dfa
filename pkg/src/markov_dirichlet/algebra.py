r"""Algebraic consequences of the fixed-point structure, checked numerically.

For an invariant field h, the projection of |h|^2 dominates |h|^2 and their
difference g vanishes exactly on the boundary, is nonnegative, and is
superinvariant. Probabilistically g(x) is the variance of h under the chain's
boundary hitting law at x, so the common zero set of these variance fields
over point-separating generators recovers the boundary exactly; an interior
zero would force a degenerate hitting law.

The product of two invariant fields decomposes through the polarization
identity

    h1 * h2 = (1/4) * sum_{m=0..3} i^m |h1 + i^m conj(h2)|^2,

which the checks here verify against direct pointwise multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import AlgebraError
from .fields import ScalarField, restrict_boundary, same_domain, sup_norm
from .kernels import MarkovKernel, apply_kernel
from .solver import SolveReport, iterate, theta_projection

#: Slack for variance-field nonnegativity and superinvariance checks.
VARIANCE_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class VarianceField:
    """Projection excess of a squared invariant field: nonnegative, boundary-zero."""

    field: ScalarField
    source: str


@dataclass(frozen=True)
class VanishingIdealReport:
    zero_set: list[int]
    equals_boundary: bool
    zero_tolerance: float
    interior_zeros: list[int]
    generator_count: int

    def to_dict(self) -> dict:
        return {
            "zero_set": self.zero_set,
            "equals_boundary": self.equals_boundary,
            "zero_tolerance": self.zero_tolerance,
            "interior_zeros": self.interior_zeros,
            "generator_count": self.generator_count,
        }


def _require_invariant(kernel: MarkovKernel, h: ScalarField, tol: float, name: str) -> None:
    residual = sup_norm(
        ScalarField(h.domain, apply_kernel(kernel, h).values - h.values)
    )
    if residual > 10.0 * tol:
        raise AlgebraError(
            f"{name} is not invariant: residual {residual:.3g} exceeds {10.0 * tol:.3g}"
        )


def variance_function(
    kernel: MarkovKernel,
    h: ScalarField,
    tol: float = 1e-10,
    force: bool = False,
) -> VarianceField:
    """Project |h|^2 onto the invariant fields and subtract |h|^2.

    Requires h to be invariant within 10 tol. The result must be nonnegative
    (within 1e-10), vanish exactly on the boundary, and be superinvariant;
    each failure raises AlgebraError naming the violated property.
    """
    _require_invariant(kernel, h, tol, "h")
    squared = np.abs(h.values) ** 2
    squared_field = ScalarField(h.domain, squared.astype(np.complex128))
    projection = theta_projection(
        kernel, restrict_boundary(squared_field), tol=tol, force=force
    )
    g_values = (projection.values - squared_field.values).real
    interior_min = float(g_values.min())
    if interior_min < -VARIANCE_SLACK:
        raise AlgebraError(
            f"variance field dips to {interior_min:.3g}; it must be >= -{VARIANCE_SLACK:g}"
        )
    boundary = h.domain.boundary_ids
    if np.any(g_values[boundary] != 0.0):
        raise AlgebraError("variance field must vanish exactly on the boundary")
    g_field = ScalarField(h.domain, g_values.astype(np.complex128))
    excess = (apply_kernel(kernel, g_field).values - g_field.values).real
    worst = float(excess.max())
    if worst > VARIANCE_SLACK:
        raise AlgebraError(
            f"variance field is not superinvariant: applying the kernel raises "
            f"it by {worst:.3g}"
        )
    return VarianceField(g_field, source=f"variance of {kernel.builder_tag} projection")


def polarization_check(h1: ScalarField, h2: ScalarField) -> float:
    """Sup residual of the four-term polarization identity; rounding-level."""
    if not same_domain(h1.domain, h2.domain):
        raise AlgebraError("fields live on different domains")
    product = h1.values * h2.values
    total = np.zeros_like(product)
    for m in range(4):
        power = 1j**m
        g_m = h1.values + power * np.conj(h2.values)
        total = total + power * (np.abs(g_m) ** 2)
    return float(np.max(np.abs(product - 0.25 * total)))


def product_projection_test(
    kernel: MarkovKernel,
    h1: ScalarField,
    h2: ScalarField,
    tol: float = 1e-10,
    force: bool = False,
) -> float:
    """Sup distance between the projected product of invariants and the product.

    Zero exactly when the product of the two fixed points is again a fixed
    point; generically positive inside, where the gap is a combination of
    variance fields. For a real invariant h the gap of (h, h) equals its
    variance field.
    """
    _require_invariant(kernel, h1, tol, "h1")
    _require_invariant(kernel, h2, tol, "h2")
    product = ScalarField(h1.domain, h1.values * h2.values)
    projection = theta_projection(
        kernel, restrict_boundary(product), tol=tol, force=force
    )
    return float(np.max(np.abs(projection.values - product.values)))


def vanishing_ideal_check(
    kernel: MarkovKernel,
    generators: Sequence[Mapping[int, complex]],
    tol: float = 1e-10,
    force: bool = False,
) -> VanishingIdealReport:
    """Common zero set of the generators' variance fields versus the boundary.

    Each generator's projection produces a variance field; the zero set
    collects the points where every variance field stays below ten times the
    solver tolerance. With a connected kernel and generators separating
    boundary points, the zero set is exactly the boundary: an interior zero
    would mean every generator's hitting variance degenerates there.
    """
    if not generators:
        raise AlgebraError("at least one generator is required")
    domain = kernel.domain
    zero_tol = 10.0 * tol
    variance_stack = []
    for index, data in enumerate(generators):
        values = np.array([data[int(b)] for b in domain.boundary_ids])
        spread = float(np.max(np.abs(values - values[0]))) if values.size else 0.0
        if spread <= 1e-14:
            raise AlgebraError(
                f"generator {index} is constant on the boundary and carries no "
                "information; rejected"
            )
        h = theta_projection(kernel, data, tol=tol, force=force)
        vf = variance_function(kernel, h, tol=tol, force=force)
        variance_stack.append(vf.field.values.real)
    stacked = np.vstack(variance_stack)
    zero_mask = np.all(stacked <= zero_tol, axis=0)
    zero_set = [int(i) for i in np.flatnonzero(zero_mask)]
    boundary = set(int(b) for b in domain.boundary_ids)
    equals = set(zero_set) == boundary
    interior_zeros = sorted(set(zero_set) - boundary)
    return VanishingIdealReport(
        zero_set=zero_set,
        equals_boundary=bool(equals),
        zero_tolerance=zero_tol,
        interior_zeros=interior_zeros,
        generator_count=len(generators),
    )


def residual_to_zero_test(
    kernel: MarkovKernel,
    f: ScalarField,
    tol: float = 1e-10,
    max_iters: int | None = None,
    force: bool = False,
) -> SolveReport:
    """Iterate f minus its projection and require the limit to vanish.

    The difference field carries zero boundary data by construction, so its
    iterates must die out uniformly; the final sup norm has to come in at or
    below ten times the stopping tolerance, else AlgebraError.
    """
    projection = theta_projection(
        kernel, restrict_boundary(f), tol=tol, max_iters=max_iters, force=force
    )
    g = ScalarField(f.domain, f.values - projection.values)
    report = iterate(kernel, g, tol=tol, max_iters=max_iters, force=force)
    final = sup_norm(report.fixed_point)
    if not report.converged:
        raise AlgebraError("difference iteration did not converge; raise max_iters")
    if final > 10.0 * tol:
        raise AlgebraError(
            f"difference field settles at sup norm {final:.3g}, above {10.0 * tol:.3g}"
        )
    return report
