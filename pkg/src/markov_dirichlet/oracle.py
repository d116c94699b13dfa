r"""Independent ground truth: direct solves, hitting laws, Poisson integrals.

These are the cross-checks for the iterative solver, computed by different
methods on purpose. The fixed point with boundary data f solves the absorbed
linear system

    u_I = P_II u_I + P_IB f,

so a dense factorization of (I - P_II) gives it in one shot. The columns of
(I - P_II)^{-1} P_IB are the boundary hitting probabilities of the absorbed
chain, which is the probabilistic form of the solution operator. On the unit
disk the continuum reference is the Poisson integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import OracleError
from .fields import ScalarField, boundary_array
from .kernels import MarkovKernel

DEFAULT_MAX_DENSE = 5000


@dataclass(frozen=True, eq=False)
class HittingDistribution:
    """Boundary hitting masses per interior node.

    ``matrix[i, b]`` is the probability that the chain started at
    ``interior_ids[i]`` is absorbed at ``boundary_ids[b]``. Rows sum to 1
    whenever every interior point can reach the boundary.
    """

    interior_ids: np.ndarray
    boundary_ids: np.ndarray
    matrix: np.ndarray

    def row(self, point_id: int) -> dict[int, float]:
        where = np.flatnonzero(self.interior_ids == point_id)
        if where.size == 0:
            raise OracleError(f"point {point_id} is not an interior point")
        masses = self.matrix[int(where[0])]
        return {int(b): float(m) for b, m in zip(self.boundary_ids, masses)}


def _dense_interior_system(kernel: MarkovKernel, max_dense: int):
    p_ii, p_ib = kernel.interior_blocks()
    n_int = p_ii.shape[0]
    if n_int > max_dense:
        raise OracleError(
            f"interior has {n_int} points, above the dense-solve cap {max_dense}"
        )
    a = np.eye(n_int) - p_ii.toarray()
    return a, p_ib


def direct_solve(
    kernel: MarkovKernel,
    data: Mapping[int, complex],
    max_dense: int = DEFAULT_MAX_DENSE,
) -> ScalarField:
    """Exact fixed point for the given boundary data, by dense factorization.

    Raises OracleError when the interior system is singular, which can only
    happen when some interior mass never reaches the boundary.
    """
    domain = kernel.domain
    f_b = boundary_array(data, domain)
    a, p_ib = _dense_interior_system(kernel, max_dense)
    rhs = p_ib @ f_b
    try:
        u = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        deficiency = a.shape[0] - np.linalg.matrix_rank(a)
        raise OracleError(
            f"interior system is singular (rank deficiency {deficiency}); "
            "some interior mass never reaches the boundary"
        ) from exc
    values = np.zeros(domain.n_points, dtype=np.complex128)
    values[domain.interior_ids] = u
    values[domain.boundary_ids] = f_b
    return ScalarField(domain, values)


def hitting_distribution(
    kernel: MarkovKernel,
    interior: int | None = None,
    max_dense: int = DEFAULT_MAX_DENSE,
):
    """Boundary hitting law of the absorbed chain.

    With ``interior`` given, returns that node's row as a dict; otherwise
    returns the full :class:`HittingDistribution`.
    """
    a, p_ib = _dense_interior_system(kernel, max_dense)
    try:
        matrix = np.linalg.solve(a, p_ib.toarray())
    except np.linalg.LinAlgError as exc:
        raise OracleError("interior system is singular") from exc
    if np.any(matrix < -1e-10):
        raise OracleError("hitting masses must be nonnegative")
    dist = HittingDistribution(
        kernel.domain.interior_ids.copy(), kernel.domain.boundary_ids.copy(), matrix
    )
    if interior is None:
        return dist
    return dist.row(interior)


def poisson_disk(angles, values, r: float, theta: float) -> complex:
    """Poisson integral on the unit disk from samples at boundary angles.

    Evaluates (1/2pi) * integral of (1 - r^2) / (1 - 2 r cos(theta - t) + r^2)
    times the data over the circle by the trapezoid rule on the sampled
    angles, normalized by the quadrature mass of the kernel so constants are
    reproduced exactly.
    """
    if not 0.0 <= r < 1.0:
        raise OracleError("poisson_disk needs a radius in [0, 1)")
    angles = np.asarray(angles, dtype=np.float64)
    values = np.asarray(values, dtype=np.complex128)
    if angles.shape != values.shape or angles.ndim != 1 or angles.size < 2:
        raise OracleError("angles and values must be matching 1-d samples")
    order = np.argsort(angles)
    t = angles[order]
    f = values[order]
    gaps_next = np.diff(t, append=t[0] + 2.0 * np.pi)
    gaps_prev = np.roll(gaps_next, 1)
    weights = 0.5 * (gaps_next + gaps_prev)
    kernel = (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(theta - t) + r * r)
    mass = float(np.sum(weights * kernel))
    return complex(np.sum(weights * kernel * f) / mass)


def dense_spectral_radius(kernel: MarkovKernel, max_dense: int = DEFAULT_MAX_DENSE) -> float:
    """Spectral radius of the interior block via a dense eigenvalue solve."""
    p_ii, _ = kernel.interior_blocks()
    n_int = p_ii.shape[0]
    if n_int == 0:
        return 0.0
    if n_int > max_dense:
        raise OracleError(
            f"interior has {n_int} points, above the dense-solve cap {max_dense}"
        )
    eigenvalues = np.linalg.eigvals(p_ii.toarray())
    return float(np.max(np.abs(eigenvalues)))
