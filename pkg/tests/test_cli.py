import csv
import json
from pathlib import Path

from markov_dirichlet.cli import main
from markov_dirichlet.counterexamples import bundled_paths


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def base_config(tmp_path, out_name, **extra):
    config = {
        "domain": {"shape": "disk", "n": 9},
        "kernel": {"type": "grid-walk", "lazy": 0.0},
        "data": {"preset": "cos-k-theta", "k": 1},
        "tol": 1e-10,
        "rng_seed": 0,
        "out_dir": str(tmp_path / out_name),
        "figures": False,
        "pgm": False,
    }
    config.update(extra)
    return config


def test_check_disk_exit_zero(tmp_path):
    config = base_config(tmp_path, "check_out", check={"anchors": 4, "trials": 4})
    code = main(["check", "--config", write_config(tmp_path, "c.json", config)])
    assert code == 0
    payload = json.loads((tmp_path / "check_out" / "check.json").read_text())
    assert payload["passed"] is True
    assert payload["condition_B"]["passed"] is True


def test_check_counterexample_exit_one(tmp_path):
    domain_path, kernel_path = bundled_paths()
    config = {
        "domain": {"shape": "custom", "path": str(domain_path)},
        "kernel": {"type": "custom", "path": str(kernel_path)},
        "tol": 1e-10,
        "rng_seed": 0,
        "out_dir": str(tmp_path / "cx_out"),
        "figures": False,
        "check": {"anchors": 2, "trials": 3},
    }
    code = main(["check", "--config", write_config(tmp_path, "cx.json", config)])
    assert code == 1
    payload = json.loads((tmp_path / "cx_out" / "check.json").read_text())
    assert payload["condition_B"]["passed"] is False
    assert payload["condition_B"]["witness_id"] is not None


def test_malformed_config_exit_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"domain": {"shape": "disk", "n": 9}\n  "kernel": {}}')
    code = main(["check", "--config", str(path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_solve_constant_preset(tmp_path):
    # nearest-boundary extension of constant data is already the fixed point
    config = base_config(
        tmp_path,
        "solve_out",
        data={"preset": "constant", "c": 2.0},
        extension="nearest-boundary",
    )
    code = main(["solve", "--config", write_config(tmp_path, "s.json", config)])
    assert code == 0
    with open(tmp_path / "solve_out" / "solution.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert all(float(row["re"]) == 2.0 and float(row["im"]) == 0.0 for row in rows)
    report = json.loads((tmp_path / "solve_out" / "report.json").read_text())
    assert report["solve"]["converged"] is True


def test_solve_force_on_failing_kernel(tmp_path):
    domain_path, kernel_path = bundled_paths()
    config = {
        "domain": {"shape": "custom", "path": str(domain_path)},
        "kernel": {"type": "custom", "path": str(kernel_path)},
        "data": {"preset": "constant", "c": 1.0},
        "tol": 1e-10,
        "out_dir": str(tmp_path / "forced_out"),
        "figures": False,
        "pgm": False,
    }
    path = write_config(tmp_path, "f.json", config)
    assert main(["solve", "--config", path]) == 1
    assert main(["solve", "--config", path, "--force"]) == 0
    report = json.loads((tmp_path / "forced_out" / "report.json").read_text())
    assert report["solve"]["check_status"] == "forced"
    assert report["overrides"]["force"] is True


def test_solve_nonconvergence_exit_one(tmp_path):
    config = base_config(tmp_path, "short_out", max_iters=2, tol=1e-14)
    code = main(["solve", "--config", write_config(tmp_path, "n.json", config)])
    assert code == 1
    report = json.loads((tmp_path / "short_out" / "report.json").read_text())
    assert report["solve"]["converged"] is False


def test_unknown_preset_exit_two(tmp_path):
    config = base_config(tmp_path, "bad_out", data={"preset": "sawtooth"})
    code = main(["solve", "--config", write_config(tmp_path, "p.json", config)])
    assert code == 2


def test_study_outputs(tmp_path):
    # constant data keeps the error aligned with the dominant mode, so the
    # measured decay rate tracks the spectral bound
    config = base_config(
        tmp_path,
        "study_out",
        data={"preset": "constant", "c": 1.0},
        study={"anchors": 2, "max_n": 60, "refinement_ns": [9, 17]},
    )
    code = main(["study", "--config", write_config(tmp_path, "st.json", config)])
    assert code == 0
    out = tmp_path / "study_out"
    for name in ("uniqueness.csv", "residual_decay.csv", "refinement.csv", "study.json"):
        assert (out / name).exists()
    payload = json.loads((out / "study.json").read_text())
    assert payload["estimate_gap"] <= 0.05


def test_study_refinement_error_decreases(tmp_path):
    config = base_config(
        tmp_path,
        "study_ref",
        study={"anchors": 1, "max_n": 20, "refinement_ns": [17, 33]},
    )
    code = main(["study", "--config", write_config(tmp_path, "sr.json", config)])
    assert code == 0
    payload = json.loads((tmp_path / "study_ref" / "study.json").read_text())
    refinement = payload["refinement_rows"]
    # the continuum-reference column shrinks under refinement
    assert refinement[1][-1] < refinement[0][-1]


def test_study_constant_data_zero_uniqueness(tmp_path):
    config = base_config(
        tmp_path,
        "study_const",
        data={"preset": "constant", "c": 2.0},
        study={"anchors": 1, "max_n": 10, "refinement_ns": [9]},
    )
    code = main(["study", "--config", write_config(tmp_path, "sc.json", config)])
    assert code == 0
    payload = json.loads((tmp_path / "study_const" / "study.json").read_text())
    assert payload["uniqueness_max_pairwise"] <= 1e-8


def test_algebra_disk(tmp_path):
    config = base_config(tmp_path, "alg_out", algebra={"random_pairs": 5})
    code = main(["algebra", "--config", write_config(tmp_path, "a.json", config)])
    assert code == 0
    payload = json.loads((tmp_path / "alg_out" / "algebra.json").read_text())
    assert payload["passed"] is True
    assert payload["vanishing_ideal"]["equals_boundary"] is True
    assert payload["polarization_worst"] <= 1e-12


def test_algebra_constant_generator_exit_two(tmp_path):
    config = base_config(
        tmp_path, "alg_bad", algebra={"generators": ["constant"], "random_pairs": 2}
    )
    code = main(["algebra", "--config", write_config(tmp_path, "ab.json", config)])
    assert code == 2


def test_algebra_counterexample_exit_one(tmp_path):
    domain_path, kernel_path = bundled_paths()
    config = {
        "domain": {"shape": "custom", "path": str(domain_path)},
        "kernel": {"type": "custom", "path": str(kernel_path)},
        "data": {"preset": "coordinate-x"},
        "tol": 1e-10,
        "force": True,
        "out_dir": str(tmp_path / "alg_cx"),
        "figures": False,
        "algebra": {"random_pairs": 2},
    }
    code = main(["algebra", "--config", write_config(tmp_path, "ax.json", config)])
    assert code == 1
    payload = json.loads((tmp_path / "alg_cx" / "algebra.json").read_text())
    assert payload["vanishing_ideal"]["equals_boundary"] is False
    assert payload["vanishing_ideal"]["interior_zeros"]


def test_flag_overrides_recorded(tmp_path):
    config = base_config(tmp_path, "ovr_out", data={"preset": "constant", "c": 1.0})
    path = write_config(tmp_path, "o.json", config)
    out2 = str(tmp_path / "ovr_out2")
    code = main(["solve", "--config", path, "--tol", "1e-8", "--out", out2])
    assert code == 0
    report = json.loads((Path(out2) / "report.json").read_text())
    assert report["overrides"]["tol"] == 1e-8
    assert report["config"]["tol"] == 1e-8


def test_rerun_outputs_identical(tmp_path):
    config = base_config(tmp_path, "det_out", figures=True, pgm=True)
    path = write_config(tmp_path, "d.json", config)
    assert main(["solve", "--config", path]) == 0
    out = tmp_path / "det_out"
    snapshot = {
        p.name: p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()
    }
    assert main(["solve", "--config", path]) == 0
    for p in sorted(out.rglob("*")):
        if p.is_file():
            assert p.read_bytes() == snapshot[p.name]
