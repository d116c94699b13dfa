import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_dirichlet.errors import FieldError
from markov_dirichlet.fields import (
    ScalarField,
    constant_field,
    extend_boundary,
    read_field_csv,
    restrict_boundary,
    sup_norm,
    write_field_csv,
)


def test_sup_norm_constant(square3):
    assert sup_norm(constant_field(square3, 3 + 4j)) == 5.0
    assert sup_norm(constant_field(square3, 0.0)) == 0.0


def test_sup_norm_max_modulus(square3):
    values = np.zeros(9, dtype=complex)
    values[:3] = [1.0, -2.0, 0.5]
    assert sup_norm(ScalarField(square3, values)) == 2.0


def test_restrict_constant(square3):
    data = restrict_boundary(constant_field(square3, 2.5))
    assert set(data) == set(int(b) for b in square3.boundary_ids)
    assert all(v == 2.5 for v in data.values())


def test_restrict_id_field(square3):
    field = ScalarField(square3, np.arange(9, dtype=complex))
    data = restrict_boundary(field)
    assert all(data[b] == b for b in data)


def test_restrict_coordinate_on_disk(disk17):
    field = ScalarField(disk17, disk17.coords[:, 0].astype(complex))
    data = restrict_boundary(field)
    for b, value in data.items():
        angle = np.arctan2(disk17.coords[b, 1], disk17.coords[b, 0])
        assert value == pytest.approx(np.cos(angle), abs=1e-12)


def test_extension_modes(square3):
    data = {int(b): 2.0 + 0j for b in square3.boundary_ids}
    zero = extend_boundary(data, square3, "zero-fill")
    assert zero.values[4] == 0.0
    near = extend_boundary(data, square3, "nearest-boundary")
    assert np.all(near.values == 2.0)
    const = extend_boundary(data, square3, "constant", constant=7.0)
    assert const.values[4] == 7.0


def test_nearest_extension_matches_brute_force(disk17):
    rng = np.random.default_rng(7)
    data = {int(b): complex(rng.normal(), rng.normal()) for b in disk17.boundary_ids}
    field = extend_boundary(data, disk17, "nearest-boundary")
    for i in disk17.interior_ids:
        best = min(
            (disk17.metric(int(i), int(b)), int(b)) for b in disk17.boundary_ids
        )
        assert field.values[i] == data[best[1]]


@pytest.mark.parametrize("mode", ["zero-fill", "nearest-boundary", "constant"])
def test_restrict_extend_roundtrip_exact(disk17, mode):
    rng = np.random.default_rng(11)
    data = {int(b): complex(rng.normal(), rng.normal()) for b in disk17.boundary_ids}
    field = extend_boundary(data, disk17, mode, constant=1.25)
    assert restrict_boundary(field) == data


def test_missing_boundary_ids_rejected(square3):
    data = {int(b): 1.0 + 0j for b in square3.boundary_ids[:-1]}
    with pytest.raises(FieldError, match="missing ids"):
        extend_boundary(data, square3, "zero-fill")


def test_nonfinite_rejected(square3):
    values = np.zeros(9, dtype=complex)
    values[0] = np.nan
    with pytest.raises(FieldError, match="finite"):
        ScalarField(square3, values)
    with pytest.raises(FieldError):
        ScalarField(square3, np.zeros(5, dtype=complex))


@settings(max_examples=40, deadline=None)
@given(
    scale=st.floats(min_value=-8.0, max_value=8.0, allow_nan=False),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_sup_norm_is_a_norm(scale, seed):
    from markov_dirichlet.geometry import build_domain

    domain = build_domain({"shape": "square", "n": 3})
    rng = np.random.default_rng(seed)
    a = rng.normal(size=9) + 1j * rng.normal(size=9)
    b = rng.normal(size=9) + 1j * rng.normal(size=9)
    fa, fb = ScalarField(domain, a), ScalarField(domain, b)
    fs = ScalarField(domain, a + b)
    fscaled = ScalarField(domain, scale * a)
    assert sup_norm(fscaled) == pytest.approx(abs(scale) * sup_norm(fa), abs=1e-12)
    assert sup_norm(fs) <= sup_norm(fa) + sup_norm(fb) + 1e-12


def test_csv_roundtrip_exact(disk17, tmp_path):
    rng = np.random.default_rng(3)
    field = ScalarField(
        disk17, rng.normal(size=disk17.n_points) + 1j * rng.normal(size=disk17.n_points)
    )
    path = tmp_path / "field.csv"
    write_field_csv(field, path)
    back = read_field_csv(path, disk17)
    assert np.array_equal(back.values, field.values)
