import csv
import json

import numpy as np
import pytest

from spin_geodesy.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main
from spin_geodesy.config import ConfigError, load_config, parse_resolutions, parse_seed_points, parse_suites
from spin_geodesy.grid import SpinorField, read_array_snapshot, read_snapshot
from spin_geodesy.verify import DEFAULT_TOLERANCES


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_config_round_trip(tmp_path):
    p = write(
        tmp_path,
        """
[scenario]
name = spin_helix
theta0 = 1.0

[run]
resolution = 32, 64, 128
steps = 20
stride = 5
suites = triad, frenet
tolerance_scale = 2

[constants]
charge = 1.5

[tolerances]
guidance_hand_value = 1e-9

[tetrad]
name = sinusoidal
eps = 0.1
""",
    )
    cfg = load_config(p, DEFAULT_TOLERANCES)
    assert cfg.scenario == "spin_helix" and cfg.params == {"theta0": 1.0}
    assert cfg.resolutions == (32, 64, 128)
    assert (cfg.steps, cfg.stride, cfg.suites, cfg.tolerance_scale) == (20, 5, ("triad", "frenet"), 2.0)
    assert cfg.charge == 1.5 and cfg.tolerances == {"guidance_hand_value": 1e-9}
    assert cfg.tetrad == "sinusoidal" and cfg.tetrad_params == {"eps": 0.1}


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[run]\nresolutoin = 64\n", "resolutoin"),
        ("[physics]\nx = 1\n", "physics"),
        ("[scenario]\nname = nope\n", "nope"),
        ("[run]\ndt = fast\n", "dt"),
        ("[run]\ndt = -1\n", "dt"),
        ("[tolerances]\nmade_up = 1\n", "made_up"),
        ("[constants]\nnu = 0\n", "nu"),
        ("[run]\ninject_fault = drift\n", "inject_fault"),
        ("[tetrad]\nname = wormhole\n", "wormhole"),
        ("not an ini file", "parse"),
    ],
)
def test_config_errors_name_the_key(tmp_path, text, needle):
    with pytest.raises(ConfigError, match=needle):
        load_config(write(tmp_path, text), DEFAULT_TOLERANCES)


def test_parsers():
    assert parse_resolutions("64,128;256") == (64, 128, 256)
    with pytest.raises(ConfigError):
        parse_resolutions("64,x")
    with pytest.raises(ConfigError):
        parse_resolutions("2")
    assert parse_seed_points("1,2;3") == ((1.0, 2.0, 0.0), (3.0, 0.0, 0.0))
    with pytest.raises(ConfigError):
        parse_seed_points("1,2,3,4")
    assert parse_suites("") == ("all",)
    with pytest.raises(ConfigError):
        parse_suites("triad,bogus")


def test_evolve_writes_snapshots(tmp_path):
    out = tmp_path / "ev"
    assert main(["evolve", "--scenario", "helix_packet", "--resolution", "32", "--out", str(out)]) == EXIT_OK
    run = json.loads((out / "run.json").read_text())
    assert run["snapshots"][0] == "psi_0000.bin" and len(run["snapshots"]) == 11
    assert run["norm_drift"] < 1e-12
    psi = read_snapshot(out / "psi_0010.bin")
    assert isinstance(psi, SpinorField) and psi.grid.points == (32,)


def test_observables_and_triad_from_snapshot(tmp_path):
    ev = tmp_path / "ev"
    main(["evolve", "--scenario", "spin_helix", "--resolution", "32", "--out", str(ev)])
    ob = tmp_path / "ob"
    assert main(["observables", "--input", str(ev / "psi_0000.bin"), "--out", str(ob)]) == EXIT_OK
    for name in ("rho", "v", "s", "M", "N", "euler_R", "euler_theta", "euler_phi", "euler_chi", "euler_pole"):
        assert (ob / f"{name}.bin").exists() and (ob / f"{name}.bin.json").exists()
    s = read_snapshot(ob / "s.bin").values
    np.testing.assert_allclose(np.linalg.norm(s, axis=0), 0.5)
    tr = tmp_path / "tr"
    assert main(["triad", "--input", str(ev / "psi_0000.bin"), "--out", str(tr)]) == EXIT_OK
    rep = json.loads((tr / "triad.json").read_text())
    assert rep["orthonormality_defect"] < 1e-12
    grid, T = read_array_snapshot(tr / "torsion.bin")
    assert T.shape == (3, 3, 3, 32)


def test_observables_rejects_non_spinor(tmp_path):
    main(["observables", "--scenario", "plane_wave", "--resolution", "16", "--out", str(tmp_path / "a")])
    code = main(["observables", "--input", str(tmp_path / "a" / "rho.bin"), "--out", str(tmp_path / "b")])
    assert code == EXIT_ERROR


def test_streamlines_csv(tmp_path):
    out = tmp_path / "sl"
    code = main(["streamlines", "--scenario", "spin_vortex", "--resolution", "32", "--max-len", "5", "--seed-points", "4,0,0;2,0,0", "--out", str(out)])
    assert code == EXIT_OK
    with open(out / "streamline_001.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "x", "y", "z", "kappa", "tau", "flags"]
    summary = json.loads((out / "streamlines.json").read_text())
    assert [line["file"] for line in summary["lines"]] == ["streamline_000.csv", "streamline_001.csv"]
    assert summary["lines"][1]["kappa_mean"] == pytest.approx(0.5, rel=1e-2)


def test_streamlines_need_seeds(tmp_path):
    assert main(["streamlines", "--scenario", "plane_wave", "--out", str(tmp_path)]) == EXIT_ERROR


def test_tetrad4d_report_and_geodesic(tmp_path):
    code = main(["tetrad4d", "--tetrad", "perturbed_rotating_frame", "--points", "8", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "curvature_report.json").read_text())
    assert rep["slopes"]["torsion_routes"] == pytest.approx(2.0, abs=0.2)
    assert main(["tetrad4d", "--tetrad", "rotating_frame", "--points", "8", "--geodesic", "--geodesic-steps", "50", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "geodesic.csv").read_text().splitlines()
    assert lines[0] == "s,x0,x1,x2,x3,u0,u1,u2,u3,norm" and len(lines) == 52
    assert main(["tetrad4d", "--tetrad", "sinusoidal", "--points", "8", "--geodesic", "--out", str(tmp_path)]) == EXIT_ERROR


def test_calibrate_exit_codes(tmp_path):
    assert main(["calibrate", "--resolution", "64", "--out", str(tmp_path / "ok")]) == EXIT_OK
    sig = json.loads((tmp_path / "ok" / "calibration.json").read_text())["signature"]
    assert sig == {**sig, "sigma_euler": -1, "sigma_frenet": -1, "role_swap": True, "status": "unique"}
    assert main(["calibrate", "--resolution", "64", "--inject-fault", "sign", "--out", str(tmp_path / "bad")]) == EXIT_FAIL
    assert json.loads((tmp_path / "bad" / "calibration.json").read_text())["status"] == "failed"


def test_verify_fault_and_errors(tmp_path, capsys):
    assert main(["verify", "--suite", "triad", "--inject-fault", "scale", "--out", str(tmp_path)]) == EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out
    assert main(["verify", "--suite", "triad", "--resolution", "64,100,256", "--out", str(tmp_path)]) == EXIT_ERROR
    assert main(["verify", "--config", str(write(tmp_path, "[run]\nbogus = 1\n")), "--out", str(tmp_path)]) == EXIT_ERROR
    assert main(["verify", "--config", str(tmp_path / "missing.ini")]) == EXIT_ERROR


def test_verify_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--suite", "guidance", "--out", str(a)]) == EXIT_OK
    assert main(["verify", "--suite", "guidance", "--out", str(b)]) == EXIT_OK
    raw = (a / "report.json").read_bytes()
    assert raw == (b / "report.json").read_bytes()
    rep = json.loads(raw)
    assert list(rep) == sorted(rep)
    assert rep["status"] == "pass"
    names = [c["name"] for c in rep["checks"]]
    assert names == sorted(names)


def test_tolerance_override_can_fail_a_check(tmp_path):
    cfg = write(tmp_path, "[tolerances]\nguidance_hand_value = 1e-30\n")
    assert main(["verify", "--suite", "guidance", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_FAIL
