import numpy as np
import pytest

from spin_geodesy import studies
from spin_geodesy.calibration import CalibrationError, calibrate_conventions
from spin_geodesy.observables import density_spin
from spin_geodesy.pauli import norm
from spin_geodesy.scenarios import SCENARIOS, calibration_family, default_params, instantiate, make_spec


@pytest.mark.parametrize("name", SCENARIOS)
def test_every_scenario_instantiates(name):
    sc = instantiate(name, 16 if make_spec(name).dims > 1 else 32)
    assert np.all(np.isfinite(sc.psi.values))
    assert norm(sc.psi) > 0
    assert isinstance(sc.references, dict)


@pytest.mark.parametrize("name", ["uniform", "two_component_plane_wave", "free_gaussian", "euler_phase_wave"])
def test_reference_spin(name):
    sc = instantiate(name, 64)
    _, s = density_spin(sc.psi)
    ok = np.all(np.isfinite(s.values), axis=0)
    np.testing.assert_allclose(s.values[:, ok], np.asarray(sc.references["s"])[:, None] + 0 * s.values[:, ok], atol=1e-12)


def test_spin_helix_references():
    sc = instantiate(make_spec("spin_helix", theta0=np.pi / 3), 64)
    _, s = density_spin(sc.psi)
    np.testing.assert_allclose(np.hypot(s.values[0], s.values[1]), sc.references["s_amplitude"], atol=1e-12)
    np.testing.assert_allclose(s.values[2], sc.references["s_z"], atol=1e-12)


def test_unknown_names_and_parameters_rejected():
    with pytest.raises(ValueError, match="unknown scenario"):
        make_spec("vortex_ring")
    with pytest.raises(ValueError, match="wobble"):
        make_spec("plane_wave", wobble=1.0)


def test_parameters_override_defaults():
    spec = make_spec("plane_wave", k=0.5, dims=2, extent=8.0)
    assert spec.params["k"] == 0.5 and spec.dims == 2 and spec.extent == 8.0
    assert spec.params["q"] == default_params(8.0)["q"]


def test_unresolved_wavelength_rejected():
    with pytest.raises(ValueError):
        instantiate(make_spec("spin_helix", q=2 * np.pi * 8 / 16), 16)


def test_calibration_is_unique():
    sig = studies.calibrate(128)
    assert (sig.sigma_euler, sig.sigma_frenet, sig.role_swap, sig.status) == (-1, -1, True, "unique")
    assert sig.discrepancy < 1e-2
    assert set(sig.as_dict()) == {"sigma_euler", "sigma_frenet", "role_swap", "status", "discrepancy"}


def test_plane_wave_alone_is_underdetermined():
    fam = [s for s in calibration_family(128) if s[0] == "plane_wave"]
    assert calibrate_conventions(fam).status == "underdetermined"


@pytest.mark.parametrize("fault", ["sign", "scale"])
def test_injected_faults_raise(fault):
    with pytest.raises(CalibrationError):
        studies.calibrate(64, fault=fault)


def test_calibration_argument_errors():
    with pytest.raises(ValueError):
        calibrate_conventions([])
    with pytest.raises(ValueError):
        calibrate_conventions(calibration_family(32), fault="drift")
