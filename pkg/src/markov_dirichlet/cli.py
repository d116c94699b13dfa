"""Command-line entry point: check, solve, study, algebra.

Runs are driven by a JSON config so studies stay archivable; command-line
flags override config fields and the override is recorded in the emitted
JSON. Exit codes: 0 success, 1 property or convergence failure, 2 usage or
config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import figures, outputs
from ._util import thread_map
from .algebra import (
    polarization_check,
    residual_to_zero_test,
    vanishing_ideal_check,
    variance_function,
)
from .conditions import (
    empirical_max_principle,
    make_barrier,
    verify_condition_A,
    verify_condition_B,
)
from .errors import (
    AlgebraError,
    BarrierError,
    ConfigError,
    DomainError,
    FieldError,
    KernelError,
    MarkovDirichletError,
    OracleError,
    PresetError,
    SolverError,
)
from .fields import extend_boundary, sup_norm, write_field_csv
from .geometry import build_domain
from .kernels import build_kernel, interior_spectral_bound
from .oracle import direct_solve, poisson_disk
from .presets import boundary_angles, make_boundary_data
from .solver import (
    boundary_equicontinuity_profile,
    error_bound,
    iterate,
    theta_projection,
)

_SETUP_ERRORS = (
    ConfigError,
    DomainError,
    KernelError,
    FieldError,
    PresetError,
    BarrierError,
)

_EXTENSION_MODES = ("zero-fill", "nearest-boundary", "constant")


def _load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def _validate_config(config: dict) -> None:
    if "domain" not in config or "kernel" not in config:
        raise ConfigError("config requires 'domain' and 'kernel' objects")
    tol = config.get("tol", 1e-10)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise ConfigError("tol must be a positive number")
    max_iters = config.get("max_iters")
    if max_iters is not None and (not isinstance(max_iters, int) or max_iters < 1):
        raise ConfigError("max_iters must be an integer >= 1 when given")
    seed = config.get("rng_seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("rng_seed must be an integer")
    extension = config.get("extension", "zero-fill")
    if extension not in _EXTENSION_MODES:
        raise ConfigError(f"extension must be one of {_EXTENSION_MODES}")


def _apply_overrides(config: dict, args) -> dict:
    overrides = {}
    if getattr(args, "tol", None) is not None:
        overrides["tol"] = args.tol
        config["tol"] = args.tol
    if getattr(args, "max_iters", None) is not None:
        overrides["max_iters"] = args.max_iters
        config["max_iters"] = args.max_iters
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
        config["rng_seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
        config["out_dir"] = args.out
    if getattr(args, "force", False):
        overrides["force"] = True
        config["force"] = True
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
        config["figures"] = False
    if getattr(args, "no_pgm", False):
        overrides["pgm"] = False
        config["pgm"] = False
    return overrides


def _build_inputs(config: dict):
    domain = build_domain(config["domain"])
    kernel = build_kernel(domain, config["kernel"])
    return domain, kernel


def _out_dir(config: dict) -> Path:
    out = Path(config.get("out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_echo(config: dict, overrides: dict) -> dict:
    echo = {k: v for k, v in config.items()}
    return {"config": echo, "overrides": overrides}


def _default_anchor_tag(domain, anchor: int) -> str | None:
    """Catalog entry for an anchor, or None when nothing fits its geometry."""
    shape = domain.descriptor.get("shape")
    a = domain.coords[anchor]
    if shape == "disk":
        return "supporting-hyperplane"
    if shape == "annulus":
        return "supporting-hyperplane" if np.hypot(a[0], a[1]) > (
            1.0 + domain.descriptor.get("inner_radius", 0.5)
        ) / 2.0 else "wedge-power"
    if shape == "square":
        on_x = a[0] in (0.0, 1.0)
        on_y = a[1] in (0.0, 1.0)
        return "supporting-hyperplane" if on_x and on_y else "wedge-power"
    if shape == "lshape":
        notch = domain.descriptor.get("notch", 0.5)
        on_cut = (abs(a[0] - notch) <= 1e-9 and a[1] >= notch - 1e-9) or (
            abs(a[1] - notch) <= 1e-9 and a[0] >= notch - 1e-9
        )
        return "wedge-power" if on_cut else "supporting-hyperplane"
    return None


def _sample_anchors(domain, count: int) -> list[int]:
    boundary = domain.boundary_ids
    count = max(1, min(count, boundary.size))
    picks = np.linspace(0, boundary.size - 1, count, dtype=int)
    return [int(boundary[i]) for i in picks]


def cmd_check(config: dict, overrides: dict) -> int:
    domain, kernel = _build_inputs(config)
    out = _out_dir(config)
    check_cfg = config.get("check", {})
    anchors = _sample_anchors(domain, int(check_cfg.get("anchors", 8)))
    trials = int(check_cfg.get("trials", 20))
    tol = float(config.get("tol", 1e-10))

    report_b = verify_condition_B(kernel)
    report_emp = empirical_max_principle(
        kernel, trials=trials, rng_seed=int(config.get("rng_seed", 0))
    )

    def check_anchor(anchor: int):
        tag = _default_anchor_tag(domain, anchor)
        if tag is None:
            return {
                "anchor": anchor,
                "status": "no_witness",
                "detail": "no catalog entry covers this anchor's local geometry",
            }
        try:
            barrier = make_barrier(domain, anchor, tag, kernel=kernel)
        except BarrierError as exc:
            return {"anchor": anchor, "status": "no_witness", "detail": str(exc)}
        report = verify_condition_A(kernel, barrier, tol=max(tol, 1e-10))
        entry = report.to_dict()
        entry["status"] = "passed" if report.passed else "failed"
        return entry

    anchor_reports = thread_map(check_anchor, anchors)
    verified = [r for r in anchor_reports if r.get("status") in ("passed", "failed")]
    all_passed = (
        report_b.passed
        and report_emp.passed
        and all(r["status"] == "passed" for r in verified)
    )
    payload = {
        "condition_B": report_b.to_dict(),
        "empirical_max_principle": report_emp.to_dict(),
        "condition_A_anchors": anchor_reports,
        "passed": all_passed,
        **_config_echo(config, overrides),
    }
    outputs.write_json(out / "check.json", payload)
    if config.get("figures", True) and verified:
        first = next((r for r in anchor_reports if r.get("status") == "passed"), None)
        if first is not None:
            barrier = make_barrier(
                domain, int(first["parameters"]["anchor"]), first["parameters"]["catalog_tag"], kernel=kernel
            )
            figures.save_field_figure(
                domain,
                barrier.field.values.real,
                out / "figures" / "barrier.png",
                title=f"barrier at anchor {first['parameters']['anchor']}",
                label="barrier value",
            )
    return 0 if all_passed else 1


def cmd_solve(config: dict, overrides: dict) -> int:
    domain, kernel = _build_inputs(config)
    out = _out_dir(config)
    data = make_boundary_data(domain, config.get("data", {"preset": "constant"}))
    extension = config.get("extension", "zero-fill")
    magnitude = max((abs(v) for v in data.values()), default=0.0)
    start = extend_boundary(data, domain, extension, constant=magnitude)
    force = bool(config.get("force", False))
    try:
        report = iterate(
            kernel,
            start,
            tol=float(config.get("tol", 1e-10)),
            max_iters=config.get("max_iters"),
            force=force,
        )
    except SolverError as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return 1
    write_field_csv(report.fixed_point, out / "solution.csv")
    outputs.write_residuals_csv(out / "residuals.csv", report.residuals)
    payload = {
        "solve": report.summary(),
        "error_bound": error_bound(report),
        **_config_echo(config, overrides),
    }
    if config.get("pgm", True):
        mapping = outputs.write_pgm_heatmap(
            out / "heatmap.pgm", domain, report.fixed_point.values.real
        )
        payload["heatmap"] = mapping
    outputs.write_json(out / "report.json", payload)
    if config.get("figures", True):
        figures.save_field_figure(
            domain,
            report.fixed_point.values.real,
            out / "figures" / "solution.png",
            title="fixed point (real part)",
        )
        figures.save_residuals_figure(report.residuals, out / "figures" / "residuals.png")
    if not report.converged:
        print(
            f"no convergence within {report.max_iters} iterations "
            f"(final residual {report.residuals[-1]:.3g})",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_study(config: dict, overrides: dict) -> int:
    domain, kernel = _build_inputs(config)
    out = _out_dir(config)
    tol = float(config.get("tol", 1e-10))
    force = bool(config.get("force", False))
    study_cfg = config.get("study", {})
    data = make_boundary_data(domain, config.get("data", {"preset": "constant"}))

    # (a) extension-independence table
    magnitude = max((abs(v) for v in data.values()), default=0.0)
    seeds = {
        "zero-fill": extend_boundary(data, domain, "zero-fill"),
        "nearest-boundary": extend_boundary(data, domain, "nearest-boundary"),
        "constant": extend_boundary(data, domain, "constant", constant=magnitude),
    }
    limits = {}
    for mode, seed in seeds.items():
        rep = iterate(kernel, seed, tol=tol, max_iters=config.get("max_iters"), force=force)
        limits[mode] = rep.fixed_point
    rows = []
    worst_pair = 0.0
    modes = list(limits)
    for i, mode_a in enumerate(modes):
        for mode_b in modes[i + 1 :]:
            dist = float(np.max(np.abs(limits[mode_a].values - limits[mode_b].values)))
            worst_pair = max(worst_pair, dist)
            rows.append([mode_a, mode_b, dist])
    outputs.write_table_csv(out / "uniqueness.csv", ["mode_a", "mode_b", "sup_distance"], rows)

    # (b) boundary deviation profiles at sampled anchors
    anchors = _sample_anchors(domain, int(study_cfg.get("anchors", 4)))
    max_n = int(study_cfg.get("max_n", 200))
    profile_first = None
    for anchor in anchors:
        profile = boundary_equicontinuity_profile(
            kernel, seeds["zero-fill"], anchor, max_n=max_n
        )
        if profile_first is None:
            profile_first = (anchor, profile)
        outputs.write_table_csv(
            out / f"equicontinuity_{anchor}.csv",
            ["distance", "deviation"],
            [[d, v] for d, v in profile],
        )

    # (c) residual decay against the spectral bound
    rep = iterate(kernel, seeds["zero-fill"], tol=tol, max_iters=config.get("max_iters"), force=force)
    ratio_rows = []
    for i, residual in enumerate(rep.residuals):
        ratio = rep.residuals[i] / rep.residuals[i - 1] if i > 0 and rep.residuals[i - 1] > 0 else ""
        ratio_rows.append([i + 1, residual, ratio])
    outputs.write_table_csv(out / "residual_decay.csv", ["n", "residual", "ratio"], ratio_rows)
    spectral = interior_spectral_bound(kernel, iters=500)

    # (d) refinement against each resolution's own direct solve
    refinement_rows = []
    shape = domain.descriptor.get("shape")
    if shape in ("square", "disk", "annulus", "lshape"):
        base_n = int(domain.descriptor["n"])
        ns = study_cfg.get("refinement_ns") or [base_n, 2 * base_n + (base_n % 2)]
        for n in ns:
            spec_n = dict(config["domain"])
            spec_n["n"] = int(n)
            domain_n = build_domain(spec_n)
            kernel_n = build_kernel(domain_n, config["kernel"])
            data_n = make_boundary_data(domain_n, config.get("data", {"preset": "constant"}))
            rep_n = iterate(
                kernel_n,
                extend_boundary(data_n, domain_n, "zero-fill"),
                tol=tol,
                force=force,
            )
            direct_n = direct_solve(kernel_n, data_n)
            vs_direct = float(np.max(np.abs(rep_n.fixed_point.values - direct_n.values)))
            row = [int(n), vs_direct]
            if shape == "disk":
                angles = boundary_angles(domain_n)
                values = np.array([data_n[int(b)] for b in domain_n.boundary_ids])
                interior = domain_n.interior_ids
                rr = np.hypot(domain_n.coords[interior, 0], domain_n.coords[interior, 1])
                tt = np.arctan2(domain_n.coords[interior, 1], domain_n.coords[interior, 0])
                reference = np.array(
                    [poisson_disk(angles, values, r_i, t_i) for r_i, t_i in zip(rr, tt)]
                )
                vs_poisson = float(
                    np.max(np.abs(rep_n.fixed_point.values[interior] - reference))
                )
                row.append(vs_poisson)
            refinement_rows.append(row)
        header = ["n", "vs_direct_solve"] + (["vs_poisson"] if shape == "disk" else [])
        outputs.write_table_csv(out / "refinement.csv", header, refinement_rows)

    payload = {
        "uniqueness_max_pairwise": worst_pair,
        "contraction_estimate": rep.contraction_estimate,
        "interior_spectral_bound": spectral,
        "estimate_gap": abs(rep.contraction_estimate - spectral),
        "anchors": anchors,
        "refinement_rows": refinement_rows,
        **_config_echo(config, overrides),
    }
    outputs.write_json(out / "study.json", payload)
    if config.get("figures", True):
        figures.save_bar_figure(
            [f"{a} vs {b}" for a, b, _ in rows],
            [r[2] for r in rows],
            out / "figures" / "uniqueness.png",
            "extension independence",
            "sup distance",
        )
        figures.save_residuals_figure(rep.residuals, out / "figures" / "residual_decay.png")
        if profile_first is not None:
            figures.save_profile_figure(
                profile_first[1],
                out / "figures" / f"equicontinuity_{profile_first[0]}.png",
                title=f"deviation profile, anchor {profile_first[0]}",
            )
        if refinement_rows:
            figures.save_refinement_figure(
                [r[0] for r in refinement_rows],
                [r[-1] for r in refinement_rows],
                out / "figures" / "refinement.png",
            )
    return 0


def cmd_algebra(config: dict, overrides: dict) -> int:
    domain, kernel = _build_inputs(config)
    out = _out_dir(config)
    tol = float(config.get("tol", 1e-10))
    force = bool(config.get("force", False))
    algebra_cfg = config.get("algebra", {})
    generator_names = algebra_cfg.get("generators", ["coordinate-x", "coordinate-y"])
    generators = []
    for name in generator_names:
        data = make_boundary_data(domain, {"preset": name})
        values = np.array([data[int(b)] for b in domain.boundary_ids])
        if values.size and float(np.max(np.abs(values - values[0]))) <= 1e-14:
            raise ConfigError(
                f"generator {name!r} is constant on this boundary; rejected"
            )
        generators.append(data)

    failures: list[str] = []
    payload: dict = {}

    # Polarization identity on projections of presets and on seeded pairs.
    rng = np.random.default_rng(int(config.get("rng_seed", 0)))
    from .fields import ScalarField

    pairs = []
    projections = [
        theta_projection(kernel, g, tol=tol, force=force) for g in generators
    ]
    for i in range(len(projections)):
        for j in range(i, len(projections)):
            pairs.append((f"proj{i}-proj{j}", projections[i], projections[j]))
    for t in range(int(algebra_cfg.get("random_pairs", 20))):
        f1 = ScalarField(
            domain,
            rng.normal(size=domain.n_points) + 1j * rng.normal(size=domain.n_points),
        )
        f2 = ScalarField(
            domain,
            rng.normal(size=domain.n_points) + 1j * rng.normal(size=domain.n_points),
        )
        pairs.append((f"random-{t}", f1, f2))
    polarization_rows = []
    worst_polarization = 0.0
    for label, f1, f2 in pairs:
        residual = polarization_check(f1, f2)
        worst_polarization = max(worst_polarization, residual)
        polarization_rows.append([label, residual])
    outputs.write_table_csv(
        out / "polarization.csv", ["pair", "residual"], polarization_rows
    )
    payload["polarization_worst"] = worst_polarization
    if worst_polarization > 1e-12:
        failures.append(f"polarization residual {worst_polarization:.3g} above 1e-12")

    # Variance fields of the generators.
    variance_reports = []
    for name, projection in zip(generator_names, projections):
        try:
            vf = variance_function(kernel, projection, tol=tol, force=force)
        except AlgebraError as exc:
            failures.append(f"variance of {name}: {exc}")
            continue
        g = vf.field.values.real
        interior = domain.interior_ids
        variance_reports.append(
            {
                "generator": name,
                "min": float(g.min()),
                "min_interior": float(g[interior].min()) if interior.size else 0.0,
                "max": float(g.max()),
            }
        )
        write_field_csv(vf.field, out / f"variance_{name}.csv")
        if config.get("figures", True):
            figures.save_field_figure(
                domain, g, out / "figures" / f"variance_{name}.png",
                title=f"variance field of {name}", label="variance",
            )
    payload["variance"] = variance_reports

    # Common zero set of the variance fields.
    try:
        ideal = vanishing_ideal_check(kernel, generators, tol=tol, force=force)
        payload["vanishing_ideal"] = ideal.to_dict()
        if not ideal.equals_boundary:
            failures.append(
                f"variance zero set contains interior points {ideal.interior_zeros}"
            )
    except AlgebraError as exc:
        failures.append(f"vanishing ideal: {exc}")

    # Difference-field decay for the configured data.
    data = make_boundary_data(domain, config.get("data", {"preset": "cos-k-theta", "k": 1}))
    seed_field = extend_boundary(data, domain, "zero-fill")
    try:
        rz = residual_to_zero_test(kernel, seed_field, tol=tol, force=force)
        payload["residual_to_zero"] = {
            "final_sup": sup_norm(rz.fixed_point),
            "iterations": rz.iterations,
        }
    except AlgebraError as exc:
        failures.append(f"residual-to-zero: {exc}")

    payload["failures"] = failures
    payload["passed"] = not failures
    payload.update(_config_echo(config, overrides))
    outputs.write_json(out / "algebra.json", payload)
    if failures:
        for failure in failures:
            print(f"algebra check failed: {failure}", file=sys.stderr)
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--tol", type=float, default=None, help="override tolerance")
    parser.add_argument(
        "--max-iters", type=int, default=None, dest="max_iters", help="override iteration cap"
    )
    parser.add_argument("--seed", type=int, default=None, help="override rng seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument(
        "--force", action="store_true", help="run even when the support check fails"
    )
    parser.add_argument(
        "--no-figures", action="store_true", dest="no_figures", help="skip PNG figures"
    )
    parser.add_argument(
        "--no-pgm", action="store_true", dest="no_pgm", help="skip the PGM heatmap"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="markov-dirichlet",
        description="Dirichlet problems by clamped Markov operator iteration",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "verify the barrier and maximum-principle hypotheses"),
        ("solve", "iterate boundary data to its invariant field"),
        ("study", "uniqueness, deviation profiles, decay and refinement tables"),
        ("algebra", "polarization, variance fields, zero sets, decay to zero"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        overrides = _apply_overrides(config, args)
        _validate_config(config)
        if args.command == "check":
            return cmd_check(config, overrides)
        if args.command == "solve":
            return cmd_solve(config, overrides)
        if args.command == "study":
            return cmd_study(config, overrides)
        return cmd_algebra(config, overrides)
    except _SETUP_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, AlgebraError, OracleError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except MarkovDirichletError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
