import json

import numpy as np
import pytest

from markov_dirichlet.errors import DomainError
from markov_dirichlet.geometry import (
    boundary_distance,
    build_domain,
    interior_graph_connected,
    load_custom_domain,
)


def test_square3_counts(square3):
    assert square3.n_points == 9
    assert square3.interior_ids.tolist() == [4]
    assert np.allclose(square3.coords[4], [0.5, 0.5])
    assert len(square3.boundary_ids) == 8


def test_disk33_boundary_on_circle(disk33):
    b = disk33.boundary_ids
    radii = np.hypot(disk33.coords[b, 0], disk33.coords[b, 1])
    assert np.max(np.abs(radii - 1.0)) <= 1e-12


def test_custom_without_boundary_rejected(tmp_path):
    payload = {
        "points": [[0, 0.0, 0.0], [1, 1.0, 0.0], [2, 0.0, 1.0]],
        "boundary": [],
        "edges": [[0, 1], [1, 2], [0, 2]],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(DomainError, match="boundary must contain at least two points"):
        load_custom_domain(path)


def test_boundary_distance_square_center(square3):
    assert boundary_distance(square3, 4) == 0.5
    for b in square3.boundary_ids:
        assert boundary_distance(square3, int(b)) == 0.0


def test_boundary_distance_disk_interior_point():
    domain = build_domain({"shape": "disk", "n": 8})
    target = None
    for i in domain.interior_ids:
        if np.allclose(domain.coords[i], [0.25, 0.0]):
            target = int(i)
    assert target is not None
    # independent oracle: scan every boundary node
    brute = min(domain.metric(target, int(b)) for b in domain.boundary_ids)
    assert boundary_distance(domain, target) == brute
    assert abs(brute - 0.75) < 0.02


def test_invalid_point_id(square3):
    with pytest.raises(DomainError):
        boundary_distance(square3, 99)


@pytest.mark.parametrize(
    "spec",
    [
        {"shape": "square", "n": 5},
        {"shape": "disk", "n": 9},
        {"shape": "annulus", "n": 13, "inner_radius": 0.5},
        {"shape": "lshape", "n": 9},
    ],
)
def test_generated_domain_invariants(spec):
    domain = build_domain(spec)
    assert len(domain.boundary_ids) >= 2
    assert len(domain.interior_ids) >= 1
    for i in domain.interior_ids:
        assert boundary_distance(domain, int(i)) > 0.0
    assert interior_graph_connected(domain)


@pytest.mark.parametrize(
    "spec,spec2",
    [
        ({"shape": "square", "n": 5}, {"shape": "square", "n": 10}),
        ({"shape": "disk", "n": 9}, {"shape": "disk", "n": 18}),
        ({"shape": "lshape", "n": 9}, {"shape": "lshape", "n": 17}),
    ],
)
def test_refinement_monotonicity(spec, spec2):
    coarse = build_domain(spec)
    fine = build_domain(spec2)
    assert len(fine.interior_ids) >= len(coarse.interior_ids)
    assert (
        fine.max_nearest_neighbor_spacing()
        <= coarse.max_nearest_neighbor_spacing()
    )


def test_resolution_too_small():
    with pytest.raises(DomainError):
        build_domain({"shape": "square", "n": 2})
    with pytest.raises(DomainError, match="interior"):
        build_domain({"shape": "annulus", "n": 3, "inner_radius": 0.9})


def test_lshape_needs_odd_n():
    with pytest.raises(DomainError, match="odd"):
        build_domain({"shape": "lshape", "n": 8})


def test_lshape_notch_is_boundary():
    domain = build_domain({"shape": "lshape", "n": 9})
    notch = [
        int(i)
        for i in range(domain.n_points)
        if np.allclose(domain.coords[i], [0.5, 0.5])
    ]
    assert len(notch) == 1
    assert domain.is_boundary[notch[0]]


def test_custom_roundtrip_and_errors(tmp_path):
    payload = {
        "points": [[0, 0.0, 0.0], [1, 1.0, 0.0], [2, 0.5, 0.5], [3, 0.0, 1.0]],
        "boundary": [0, 1, 3],
        "edges": [[0, 2], [1, 2], [3, 2]],
    }
    path = tmp_path / "domain.json"
    path.write_text(json.dumps(payload))
    domain = load_custom_domain(path)
    assert domain.interior_ids.tolist() == [2]

    bad = dict(payload)
    bad["points"] = [[0, 0.0, 0.0], [5, 1.0, 0.0], [2, 0.5, 0.5], [3, 0.0, 1.0]]
    path.write_text(json.dumps(bad))
    with pytest.raises(DomainError, match="dense"):
        load_custom_domain(path)

    bad = dict(payload)
    bad["edges"] = [[0, 0], [1, 2], [3, 2]]
    path.write_text(json.dumps(bad))
    with pytest.raises(DomainError, match="self loop"):
        load_custom_domain(path)

    bad = dict(payload)
    bad["points"] = [[0, 0.0, 0.0], [1, 0.0, 0.0], [2, 0.5, 0.5], [3, 0.0, 1.0]]
    path.write_text(json.dumps(bad))
    with pytest.raises(DomainError, match="positive for distinct points"):
        load_custom_domain(path)

    bad = dict(payload)
    bad["edges"] = [[0, 2], [1, 2], [3, 1]]
    path.write_text(json.dumps(bad))
    with pytest.raises(DomainError, match="not adjacent to any interior"):
        load_custom_domain(path)


def test_custom_metric_validated(tmp_path):
    base = {
        "points": [[0, 0.0, 0.0], [1, 1.0, 0.0], [2, 0.5, 0.5], [3, 0.0, 1.0]],
        "boundary": [0, 1, 3],
        "edges": [[0, 2], [1, 2], [3, 2]],
    }
    metric = [
        [0.0, 1.0, 0.7, 1.0],
        [1.0, 0.0, 0.7, 1.4],
        [0.7, 0.7, 0.0, 0.7],
        [1.0, 1.4, 0.7, 0.0],
    ]
    path = tmp_path / "domain.json"
    payload = dict(base, metric=metric)
    path.write_text(json.dumps(payload))
    domain = load_custom_domain(path)
    assert domain.metric(0, 2) == 0.7

    asym = [row[:] for row in metric]
    asym[0][1] = 0.9
    path.write_text(json.dumps(dict(base, metric=asym)))
    with pytest.raises(DomainError, match="symmetric"):
        load_custom_domain(path)

    negdiag = [row[:] for row in metric]
    negdiag[1][1] = 0.1
    path.write_text(json.dumps(dict(base, metric=negdiag)))
    with pytest.raises(DomainError, match="metric\\(i, i\\)"):
        load_custom_domain(path)


def test_nearest_boundary_tie_breaks_low_id(square3):
    # the center is equidistant from all four edge midpoints
    assert int(square3.nearest_boundary[4]) == min(
        int(b)
        for b in square3.boundary_ids
        if square3.metric(4, int(b)) == 0.5
    )


def test_unknown_shape():
    with pytest.raises(DomainError, match="unknown shape"):
        build_domain({"shape": "triangle", "n": 5})
