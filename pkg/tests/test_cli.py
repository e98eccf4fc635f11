"""Command-line interface: file round trips, golden outputs, error paths."""

import json

import numpy as np
import pytest

from scmodes import cli, io
from scmodes.cli import PipelineConfig, main
from scmodes.model import CircuitHamiltonian, ModeKind

from conftest import CPB_PATH, FLUXONIUM_PATH


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_toy(tmp_path, name="toy.json"):
    H = CircuitHamiltonian.create(
        kinds=[ModeKind.INDUCTOR] * 2,
        C_inv=np.diag([1.0, 2.0]),
        M0=np.diag([1.0, 2.0]),
    )
    path = tmp_path / name
    io.save_hamiltonian(H, str(path))
    return path


# ---------------------------------------------------------------------------
# inspect
# ---------------------------------------------------------------------------


def test_inspect_fluxonium(capsys):
    code, out, _ = run(capsys, "inspect", "--input", str(FLUXONIUM_PATH))
    assert code == 0
    assert out.splitlines()[0] == "n=5, n_J=2, F=0, offdiag=2.87e+05"


def test_inspect_cpb_reports_free_mode(capsys):
    code, out, _ = run(capsys, "inspect", "--input", str(CPB_PATH))
    assert code == 0
    assert "F=1" in out


def test_inspect_empty_file(tmp_path, capsys):
    bad = tmp_path / "empty.json"
    bad.write_text("")
    code, out, err = run(capsys, "inspect", "--input", str(bad))
    assert code == 1
    assert "error" in err
    assert "1:1" in err  # line context


def test_inspect_invalid_hamiltonian(tmp_path, capsys):
    data = {
        "mode_kinds": ["inductor"],
        "C_inv": [[-1.0]],
        "M0": [[1.0]],
    }
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "inspect", "--input", str(bad))
    assert code == 1
    assert "positive" in err


# ---------------------------------------------------------------------------
# remove-free
# ---------------------------------------------------------------------------


def test_remove_free_cpb(tmp_path, capsys):
    out_path = tmp_path / "reduced.json"
    code, _, err = run(
        capsys, "remove-free", "--input", str(CPB_PATH), "--output", str(out_path)
    )
    assert code == 0
    H_red = io.load_hamiltonian(str(out_path))
    np.testing.assert_allclose(H_red.C_V[:, 0], [12.5, -17.2], atol=0.1)
    T = io.load_transform(str(tmp_path / "reduced.transform.json"))
    assert T.n == 3
    assert T.residual < 1e-10


def test_remove_free_noop(tmp_path, capsys):
    out_path = tmp_path / "same.json"
    code, _, _ = run(
        capsys, "remove-free", "--input", str(FLUXONIUM_PATH), "--output", str(out_path)
    )
    assert code == 0
    H_in = io.load_hamiltonian(str(FLUXONIUM_PATH))
    H_out = io.load_hamiltonian(str(out_path))
    np.testing.assert_array_equal(H_in.C_inv, H_out.C_inv)
    T = io.load_transform(str(tmp_path / "same.transform.json"))
    np.testing.assert_array_equal(T.W, np.eye(5))


# ---------------------------------------------------------------------------
# decouple
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "method,expected",
    [("sad", 494.0), ("ios", 89.3)],
)
def test_decouple_offdiag_report(tmp_path, capsys, method, expected):
    out_path = tmp_path / f"{method}.json"
    code, out, _ = run(
        capsys,
        "decouple", "--input", str(FLUXONIUM_PATH), "--method", method,
        "--output", str(out_path),
    )
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "method,offdiag_before,offdiag_after,iterations"
    fields = row.split(",")
    assert fields[0] == method
    assert abs(float(fields[2]) - expected) <= 0.01 * expected
    assert out_path.exists()


def test_decouple_fs_kills_quadratic_couplings(tmp_path, capsys):
    out_path = tmp_path / "fs.json"
    code, out, _ = run(
        capsys,
        "decouple", "--input", str(FLUXONIUM_PATH), "--method", "fs",
        "--output", str(out_path),
    )
    assert code == 0
    row = out.strip().splitlines()[1]
    assert float(row.split(",")[2]) < 1e-8
    # the decoupled file round-trips with its transformed junction arguments
    H_fs = io.load_hamiltonian(str(out_path))
    assert np.abs(H_fs.J_args[0]).max() > 2.0


# ---------------------------------------------------------------------------
# spectrum family
# ---------------------------------------------------------------------------


def test_spectrum_cpb_table(tmp_path, capsys):
    out_path = tmp_path / "spec.csv"
    code, _, err = run(
        capsys,
        "spectrum", "--input", str(CPB_PATH), "--cutoff", "30", "--k", "10",
        "--output", str(out_path),
    )
    assert code == 0
    assert "removed 1 free mode" in err
    lines = out_path.read_text().splitlines()
    assert lines[0] == "level,energy"
    energies = [float(line.split(",")[1]) for line in lines[1:]]
    np.testing.assert_allclose(
        energies,
        [-0.999, -0.00981, 0.979, 1.88, 1.97, 2.87, 2.96, 3.32, 3.85, 3.95],
        atol=0.01,
    )


def test_spectrum_separable_toy(tmp_path, capsys):
    toy = write_toy(tmp_path)
    code, out, _ = run(
        capsys, "spectrum", "--input", str(toy), "--cutoff", "5", "--k", "4"
    )
    assert code == 0
    energies = [float(line.split(",")[1]) for line in out.strip().splitlines()[1:]]
    np.testing.assert_allclose(energies, [1.5, 2.5, 3.5, 3.5], atol=1e-8)


def test_spectrum_deterministic_output(tmp_path, capsys):
    toy = write_toy(tmp_path)
    outputs = []
    for _ in range(2):
        _, out, _ = run(
            capsys, "spectrum", "--input", str(toy), "--cutoff", "6", "--k", "3"
        )
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_converge_csv(tmp_path, capsys):
    toy = write_toy(tmp_path)
    code, out, _ = run(
        capsys, "converge", "--input", str(toy), "--cutoff", "3,5", "--k", "3"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "d,E0,E1,E2"
    assert [line.split(",")[0] for line in lines[1:]] == ["3", "5"]


def test_converge_cutoff_list_is_uniform_sweep(capsys):
    # the d list length is unrelated to the mode count
    code, out, _ = run(
        capsys,
        "converge", "--input", str(FLUXONIUM_PATH), "--method", "fs",
        "--cutoff", "3,4", "--k", "2",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["3", "4"]


def test_rdm_csv(tmp_path, capsys):
    toy = write_toy(tmp_path)
    code, out, _ = run(
        capsys, "rdm", "--input", str(toy), "--cutoff", "4"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "mode,m,rho_mm"
    assert len(lines) == 1 + 2 * 4
    ground_pop = float(lines[1].split(",")[2])
    np.testing.assert_allclose(ground_pop, 1.0, atol=1e-10)


def test_adaptive_cutoffs_csv(tmp_path, capsys):
    toy = write_toy(tmp_path)
    code, out, _ = run(
        capsys, "adaptive-cutoffs", "--input", str(toy), "--epsilon", "0.5"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "mode,cutoff"
    assert [line.split(",")[1] for line in lines[1:]] == ["1", "1"]


def test_bad_cutoff_flag(tmp_path, capsys):
    toy = write_toy(tmp_path)
    code, _, err = run(
        capsys, "spectrum", "--input", str(toy), "--cutoff", "abc"
    )
    assert code == 1
    assert "cutoff" in err


# ---------------------------------------------------------------------------
# config and file formats
# ---------------------------------------------------------------------------


def test_pipeline_config_round_trip():
    config = PipelineConfig(
        input_path="x.json", method="fs", free_mode_threshold=1e-7,
        epsilon=1e-15, k=4, cutoffs="8,8,4", output_path="out.csv",
    )
    assert PipelineConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config


def test_hamiltonian_file_round_trip(tmp_path, fluxonium):
    path = tmp_path / "rt.json"
    io.save_hamiltonian(fluxonium, str(path))
    H2 = io.load_hamiltonian(str(path))
    np.testing.assert_array_equal(H2.C_inv, fluxonium.C_inv)
    np.testing.assert_array_equal(H2.M0, fluxonium.M0)
    np.testing.assert_array_equal(H2.E_sign, fluxonium.E_sign)
    assert H2.kinds == fluxonium.kinds


def test_csv_format_is_stable(tmp_path):
    path = tmp_path / "t.csv"
    io.write_csv([(1, 0.1), (2, 2.0 / 3.0)], header=["a", "b"], path=str(path))
    content = path.read_bytes()
    assert content == b"a,b\n1,1.00000000000e-01\n2,6.66666666667e-01\n"
