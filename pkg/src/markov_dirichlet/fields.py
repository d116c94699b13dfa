"""Complex-valued functions sampled on domain nodes, with norms and restrictions.

Fields are value-semantic wrappers around a complex vector indexed by node id.
Real inputs are embedded with zero imaginary part; the algebra checks need
complex scalars and conjugation.

The CSV interchange format is ``id,x,y,is_boundary,re,im`` with ids ascending.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import FieldError
from .geometry import DiscreteDomain

EXTENSION_MODES = ("zero-fill", "nearest-boundary", "constant")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A complex value per node of a fixed domain."""

    domain: DiscreteDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.domain.n_points,):
            raise FieldError(
                f"field has {values.shape[0] if values.ndim == 1 else 'wrong-shaped'}"
                f" values for a domain of {self.domain.n_points} points"
            )
        if not np.all(np.isfinite(values.real)) or not np.all(np.isfinite(values.imag)):
            raise FieldError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))


def same_domain(a: DiscreteDomain, b: DiscreteDomain) -> bool:
    if a is b:
        return True
    return (
        a.n_points == b.n_points
        and np.array_equal(a.coords, b.coords)
        and np.array_equal(a.is_boundary, b.is_boundary)
    )


def constant_field(domain: DiscreteDomain, value: complex) -> ScalarField:
    return ScalarField(domain, np.full(domain.n_points, value, dtype=np.complex128))


def sup_norm(field: ScalarField) -> float:
    """Largest modulus over all nodes; the norm of uniform convergence."""
    return float(np.max(np.abs(field.values)))


def restrict_boundary(field: ScalarField) -> dict[int, complex]:
    """Boundary values keyed by boundary id, ids ascending."""
    return {
        int(b): complex(field.values[b]) for b in field.domain.boundary_ids
    }


def extend_boundary(
    data: Mapping[int, complex],
    domain: DiscreteDomain,
    mode: str = "zero-fill",
    constant: complex = 0.0,
) -> ScalarField:
    """Extend boundary data to a field on all of the domain.

    ``mode`` selects the interior fill: ``zero-fill`` writes zeros,
    ``nearest-boundary`` copies the value of the nearest boundary node
    (ties broken toward the lowest id), and ``constant`` writes ``constant``.
    The extensions are deliberately crude; the clamped iteration forgets
    them, and crude seeds make that property observable.
    """
    if mode not in EXTENSION_MODES:
        raise FieldError(f"unknown extension mode {mode!r}")
    missing = [int(b) for b in domain.boundary_ids if int(b) not in data]
    if missing:
        raise FieldError(f"boundary data is missing ids {missing[:8]}")
    values = np.zeros(domain.n_points, dtype=np.complex128)
    if mode == "constant":
        values[:] = constant
    elif mode == "nearest-boundary":
        nearest = domain.nearest_boundary
        for i in domain.interior_ids:
            values[i] = data[int(nearest[i])]
    for b in domain.boundary_ids:
        values[b] = data[int(b)]
    return ScalarField(domain, values)


def boundary_array(data: Mapping[int, complex], domain: DiscreteDomain) -> np.ndarray:
    """Boundary data as a vector in boundary-id order."""
    missing = [int(b) for b in domain.boundary_ids if int(b) not in data]
    if missing:
        raise FieldError(f"boundary data is missing ids {missing[:8]}")
    return np.array([data[int(b)] for b in domain.boundary_ids], dtype=np.complex128)


def write_field_csv(field: ScalarField, path) -> None:
    domain = field.domain
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "x", "y", "is_boundary", "re", "im"])
        for i in range(domain.n_points):
            writer.writerow(
                [
                    i,
                    format(domain.coords[i, 0], ".17g"),
                    format(domain.coords[i, 1], ".17g"),
                    int(domain.is_boundary[i]),
                    format(field.values[i].real, ".17g"),
                    format(field.values[i].imag, ".17g"),
                ]
            )


def read_field_csv(path, domain: DiscreteDomain) -> ScalarField:
    """Read a field CSV and attach it to ``domain`` after consistency checks."""
    path = Path(path)
    values = np.zeros(domain.n_points, dtype=np.complex128)
    seen = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            i = int(row["id"])
            if not 0 <= i < domain.n_points:
                raise FieldError(f"field file id {i} is out of range")
            x, y = float(row["x"]), float(row["y"])
            if abs(x - domain.coords[i, 0]) > 1e-9 or abs(y - domain.coords[i, 1]) > 1e-9:
                raise FieldError(f"field file coordinates for id {i} do not match the domain")
            if bool(int(row["is_boundary"])) != bool(domain.is_boundary[i]):
                raise FieldError(f"field file boundary flag for id {i} does not match the domain")
            values[i] = complex(float(row["re"]), float(row["im"]))
            seen += 1
    if seen != domain.n_points:
        raise FieldError(f"field file has {seen} rows for a domain of {domain.n_points} points")
    return ScalarField(domain, values)
