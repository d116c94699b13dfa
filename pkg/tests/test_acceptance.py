"""Acceptance gate: one test per shipped criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion. Resolutions are desk scale; where a criterion leaves the grid
free, the chosen resolution is recorded here as a constant.
"""

import json
import os
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from markov_dirichlet.algebra import (
    polarization_check,
    residual_to_zero_test,
    vanishing_ideal_check,
    variance_function,
)
from markov_dirichlet.conditions import (
    make_barrier,
    verify_condition_A,
    verify_condition_B,
)
from markov_dirichlet.counterexamples import load_bundled
from markov_dirichlet.fields import ScalarField, extend_boundary, sup_norm
from markov_dirichlet.geometry import build_domain
from markov_dirichlet.kernels import build_kernel, interior_spectral_bound
from markov_dirichlet.oracle import (
    dense_spectral_radius,
    direct_solve,
    hitting_distribution,
    poisson_disk,
)
from markov_dirichlet.presets import boundary_angles, make_boundary_data
from markov_dirichlet.solver import iterate, monotone_run, theta_projection, uniqueness_test

SHIPPED_DOMAINS = (
    {"shape": "disk", "n": 17},
    {"shape": "square", "n": 17},
    {"shape": "annulus", "n": 17, "inner_radius": 0.5},
    {"shape": "lshape", "n": 17},
)
SHIPPED_KERNELS = (
    {"type": "grid-walk", "lazy": 0.0},
    {"type": "ball-average", "radius_factor": 0.5},
)
PRESETS = (
    {"preset": "constant", "c": 2.0},
    {"preset": "cos-k-theta", "k": 1},
    {"preset": "cos-k-theta", "k": 2},
    {"preset": "coordinate-x"},
    {"preset": "coordinate-y"},
    {"preset": "indicator"},
)
UNIQUENESS_N = 9
DECAY_N = 7


def _announce(number: int, message: str) -> None:
    print(f"\nACCEPTANCE criterion {number:2d}: PASS  {message}")


def _cos_data(domain, k=1):
    angles = boundary_angles(domain)
    return {
        int(b): complex(np.cos(k * a))
        for b, a in zip(domain.boundary_ids, angles)
    }


def _preset_data(domain, spec):
    spec = dict(spec)
    if spec["preset"] == "indicator":
        spec["boundary_id"] = int(domain.boundary_ids[0])
    return make_boundary_data(domain, spec)


def _poisson_error(domain, kernel, tol=1e-10):
    data = _cos_data(domain)
    report = iterate(kernel, extend_boundary(data, domain, "zero-fill"), tol=tol)
    assert report.converged
    angles = boundary_angles(domain)
    values = np.array([data[int(b)] for b in domain.boundary_ids])
    interior = domain.interior_ids
    rr = np.hypot(domain.coords[interior, 0], domain.coords[interior, 1])
    tt = np.arctan2(domain.coords[interior, 1], domain.coords[interior, 0])
    reference = np.array(
        [poisson_disk(angles, values, r_i, t_i) for r_i, t_i in zip(rr, tt)]
    )
    return float(np.max(np.abs(report.fixed_point.values[interior] - reference)))


@pytest.fixture(scope="module")
def criterion4_barriers():
    """Verified barriers per (domain kind, kernel spec): built once, reused."""
    bundles = []
    disk = build_domain({"shape": "disk", "n": 33})
    square = build_domain({"shape": "square", "n": 33})
    corners = {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}
    edge_nodes = [
        int(b)
        for b in square.boundary_ids
        if (float(square.coords[b, 0]), float(square.coords[b, 1])) not in corners
    ]
    disk_anchors = [
        int(disk.boundary_ids[i])
        for i in np.linspace(0, disk.boundary_ids.size - 1, 8, dtype=int)
    ]
    square_anchors = [
        edge_nodes[i] for i in np.linspace(0, len(edge_nodes) - 1, 8, dtype=int)
    ]
    for kernel_spec in SHIPPED_KERNELS:
        disk_kernel = build_kernel(disk, kernel_spec)
        square_kernel = build_kernel(square, kernel_spec)
        for anchor in disk_anchors:
            barrier = make_barrier(
                disk, anchor, "supporting-hyperplane", kernel=disk_kernel
            )
            bundles.append((disk_kernel, barrier))
        for anchor in square_anchors:
            barrier = make_barrier(square, anchor, "wedge-power", kernel=square_kernel)
            assert barrier.details["beta"] == 0.5
            bundles.append((square_kernel, barrier))
    return bundles


def test_criterion_01_disk_error_and_refinement():
    start = time.perf_counter()
    disk33 = build_domain({"shape": "disk", "n": 33})
    error33 = _poisson_error(disk33, build_kernel(disk33, {"type": "grid-walk"}))
    disk66 = build_domain({"shape": "disk", "n": 66})
    error66 = _poisson_error(disk66, build_kernel(disk66, {"type": "grid-walk"}))
    elapsed = time.perf_counter() - start
    assert error33 <= 0.05
    assert error66 <= error33 / 1.5
    assert elapsed < 10.0
    _announce(
        1,
        f"disk n=33 error {error33:.4f} <= 0.05; half step error {error66:.4f} "
        f"(factor {error33 / error66:.2f} >= 1.5); runtime {elapsed:.1f}s < 10s",
    )


def test_criterion_02_uniqueness():
    worst = 0.0
    for shape in ("disk", "square"):
        domain = build_domain({"shape": shape, "n": UNIQUENESS_N})
        kernel = build_kernel(domain, {"type": "grid-walk"})
        for data in (
            _cos_data(domain),
            {int(b): complex(domain.coords[b, 0]) for b in domain.boundary_ids},
        ):
            worst = max(worst, uniqueness_test(kernel, data, tol=1e-12))
    assert worst <= 1e-10
    _announce(2, f"extension independence {worst:.3g} <= 1e-10 at tol 1e-12")


def test_criterion_03_oracle_equivalence():
    worst = 0.0
    runs = 0
    for domain_spec in SHIPPED_DOMAINS:
        domain = build_domain(domain_spec)
        assert domain.interior_ids.size <= 2000
        for kernel_spec in SHIPPED_KERNELS:
            kernel = build_kernel(domain, kernel_spec)
            for preset in PRESETS:
                data = _preset_data(domain, preset)
                report = iterate(
                    kernel, extend_boundary(data, domain, "zero-fill"), tol=1e-12
                )
                assert report.converged
                reference = direct_solve(kernel, data)
                gap = float(
                    np.max(np.abs(report.fixed_point.values - reference.values))
                )
                worst = max(worst, gap)
                runs += 1
    assert worst <= 1e-8
    _announce(3, f"iterate vs direct solve: {runs} runs, worst gap {worst:.3g} <= 1e-8")


def test_criterion_04_condition_A(criterion4_barriers):
    worst = 0.0
    for kernel, barrier in criterion4_barriers:
        report = verify_condition_A(kernel, barrier, tol=1e-10)
        assert report.passed, (barrier.anchor, report.worst_violation)
        worst = min(worst, report.worst_violation)
    _announce(
        4,
        f"{len(criterion4_barriers)} barriers verified, worst violation "
        f"{worst:.3g} >= -1e-10",
    )


def test_criterion_05_condition_B():
    for domain_spec in SHIPPED_DOMAINS:
        domain = build_domain(domain_spec)
        for kernel_spec in SHIPPED_KERNELS:
            kernel = build_kernel(domain, kernel_spec)
            report = verify_condition_B(kernel)
            assert report.passed, (domain_spec, kernel_spec, report.details)
    _, counterexample = load_bundled()
    failing = verify_condition_B(counterexample)
    assert not failing.passed
    assert failing.witness is not None
    _announce(
        5,
        "support check passes on all shipped kernels; counterexample fails "
        f"with witness {failing.witness}",
    )


def test_criterion_06_monotone_runs(criterion4_barriers):
    for kernel, barrier in criterion4_barriers:
        report = monotone_run(kernel, barrier.field, tol=1e-10)
        assert report.monotone
        assert report.converged
    _announce(
        6,
        f"{len(criterion4_barriers)} monotone runs, every increment >= -1e-12",
    )


def test_criterion_07_variance_fields():
    domain = build_domain({"shape": "disk", "n": 17})
    kernel = build_kernel(domain, {"type": "grid-walk"})
    data_x = {int(b): complex(domain.coords[b, 0]) for b in domain.boundary_ids}
    data_y = {int(b): complex(domain.coords[b, 1]) for b in domain.boundary_ids}
    h = theta_projection(kernel, data_x, tol=1e-12)
    vf = variance_function(kernel, h, tol=1e-12)
    g = vf.field.values.real
    boundary = domain.boundary_ids
    interior = domain.interior_ids
    assert g.min() >= -1e-10
    assert np.all(g[boundary] == 0.0)
    dist = hitting_distribution(kernel)
    xb = domain.coords[boundary, 0]
    oracle = dist.matrix @ (xb**2) - (dist.matrix @ xb) ** 2
    assert g[interior].min() >= 0.9 * float(oracle.min())
    ideal = vanishing_ideal_check(kernel, [data_x, data_y], tol=1e-10)
    assert ideal.equals_boundary
    _announce(
        7,
        f"variance >= {g.min():.3g}, exact boundary zeros, min interior "
        f"{g[interior].min():.3g} >= 0.9 oracle {float(oracle.min()):.3g}; "
        "zero set equals the boundary",
    )


def test_criterion_08_polarization():
    domain = build_domain({"shape": "disk", "n": 17})
    rng = np.random.default_rng(2026)
    worst = 0.0
    for _ in range(100):
        f1 = ScalarField(
            domain,
            rng.normal(size=domain.n_points) + 1j * rng.normal(size=domain.n_points),
        )
        f2 = ScalarField(
            domain,
            rng.normal(size=domain.n_points) + 1j * rng.normal(size=domain.n_points),
        )
        worst = max(worst, polarization_check(f1, f2))
    assert worst <= 1e-12
    _announce(8, f"polarization residual {worst:.3g} <= 1e-12 over 100 seeded pairs")


def test_criterion_09_residual_to_zero_and_rates():
    worst_final = 0.0
    for shape in ("disk", "square"):
        domain = build_domain({"shape": shape, "n": DECAY_N})
        kernel = build_kernel(domain, {"type": "grid-walk"})
        for preset in PRESETS:
            data = _preset_data(domain, preset)
            seed = extend_boundary(data, domain, "zero-fill")
            report = residual_to_zero_test(kernel, seed, tol=1e-10)
            worst_final = max(worst_final, sup_norm(report.fixed_point))
    assert worst_final <= 1e-9

    # rate correspondence on data whose error excites the dominant mode
    domain = build_domain({"shape": "disk", "n": 17})
    kernel = build_kernel(domain, {"type": "grid-walk"})
    data = _preset_data(domain, {"preset": "constant", "c": 2.0})
    seed = extend_boundary(data, domain, "zero-fill")
    report = iterate(kernel, seed, tol=1e-10)
    bound = interior_spectral_bound(kernel, 500)
    assert abs(report.contraction_estimate - bound) <= 0.05
    dense = dense_spectral_radius(kernel)
    assert abs(bound - dense) <= 1e-3
    _announce(
        9,
        f"difference fields settle at {worst_final:.3g} <= 1e-9; decay rate "
        f"{report.contraction_estimate:.4f} within 0.05 of bound {bound:.4f}, "
        f"bound within {abs(bound - dense):.1e} of the dense eigenvalue",
    )


def test_criterion_10_determinism(tmp_path):
    out_dir = tmp_path / "det_out"
    config = {
        "domain": {"shape": "disk", "n": 17},
        "kernel": {"type": "grid-walk", "lazy": 0.0},
        "data": {"preset": "cos-k-theta", "k": 1},
        "tol": 1e-10,
        "rng_seed": 0,
        "out_dir": str(out_dir),
        "figures": True,
        "pgm": True,
    }
    config_path = tmp_path / "solve.json"
    config_path.write_text(json.dumps(config))

    def run(threads: str) -> dict[str, bytes]:
        if out_dir.exists():
            shutil.rmtree(out_dir)
        env = dict(os.environ, MD_THREADS=threads)
        proc = subprocess.run(
            [sys.executable, "-m", "markov_dirichlet.cli", "solve", "--config", str(config_path)],
            capture_output=True,
            env=env,
            cwd=str(Path(__file__).resolve().parent.parent),
        )
        assert proc.returncode == 0, proc.stderr.decode()
        return {
            str(p.relative_to(out_dir)): p.read_bytes()
            for p in sorted(out_dir.rglob("*"))
            if p.is_file()
        }

    single = run("1")
    parallel = run("8")
    assert single.keys() == parallel.keys()
    different = [name for name in single if single[name] != parallel[name]]
    assert not different, different
    _announce(
        10,
        f"{len(single)} output files byte-identical between MD_THREADS=1 and 8",
    )
