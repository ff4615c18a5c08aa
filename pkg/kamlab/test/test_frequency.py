import pytest
import warnings
import numpy as np
from unittest.mock import patch

from kamlab.config import settings
from kamlab.errors import BudgetExhaustedError, ModelValidationError, ResonanceError
from kamlab.kam.frequency import (
    HamiltonianField,
    IterateConfig,
    counterterm_frequency,
    degenerate_family,
    frequency_map_solve,
    torus_extract_and_verify,
)
from kamlab.normal_forms.birkhoff import birkhoff_normal_form
from kamlab.normal_forms.diagnostics import degeneracy_detect
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.utils.presets import GOLDEN, degenerate_j1, integrable_golden, perturbed_golden, russmann_type

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")

OMEGA0 = np.array([1.0, GOLDEN])
DIOPH = DiophantineParams(kappa=1e-3, tau=1.5, N_check=20)


@pytest.fixture
def config():
    return IterateConfig(kappa=1e-2, tau=1.5, h=0.02, n_max=8, tol=1e-12)


def test_frequency_at_the_origin_is_omega0(config):
    solution = frequency_map_solve(perturbed_golden(), [0.0, 0.0], config)
    assert solution.Omega == pytest.approx(OMEGA0.tolist(), abs=1e-12)
    assert solution.newton_steps == 0
    assert solution.residual <= 1e-12


def test_integrable_frequency_is_the_gradient(config):
    c = np.array([0.1, -0.2])
    solution = frequency_map_solve(integrable_golden(), c, config)
    assert np.allclose(solution.Omega, OMEGA0 + c, atol=1e-12)
    assert solution.seed == pytest.approx((OMEGA0 + c).tolist())


def test_newton_corrects_the_normal_form_seed(config):
    solution = frequency_map_solve(perturbed_golden(), [0.05, 0.0], config)
    assert solution.residual <= 1e-10
    assert np.linalg.norm(np.asarray(solution.Omega) - solution.seed) < 1e-3


def test_counterterm_frequency_map(config):
    frequency = counterterm_frequency(perturbed_golden(), config)
    c = np.array([0.05, 0.0])
    assert np.allclose(frequency(c), frequency_map_solve(perturbed_golden(), c, config).Omega, atol=1e-12)
    assert np.allclose(counterterm_frequency(integrable_golden(), config)(c), OMEGA0 + c, atol=1e-9)


def test_action_point_shape_is_checked(config):
    with pytest.raises(ModelValidationError):
        frequency_map_solve(integrable_golden(), [0.0, 0.0, 0.0], config)


def test_hamiltonian_field_matches_the_series():
    H = perturbed_golden()
    field = HamiltonianField(H)
    phi, r = np.array([0.3, 0.7]), np.array([0.05, -0.02])
    y = np.concatenate([phi, r])
    expected = [H.d_action(i).evaluate(phi[None], r[None])[0] for i in range(2)]
    expected += [-H.d_angle(i).evaluate(phi[None], r[None])[0] for i in range(2)]
    assert np.allclose(field(0.0, y), expected, atol=1e-14)
    assert field.energy(phi, r) == pytest.approx(H.evaluate(phi[None], r[None])[0], abs=1e-14)


def test_integrable_torus_is_verified(config):
    solution = frequency_map_solve(integrable_golden(), [0.1, -0.2], config)
    report = torus_extract_and_verify(integrable_golden(), solution, DIOPH, T=10.0, dt=0.5, samples=3, tol=1e-8)
    assert report.passed
    assert report.max_deviation <= 1e-8
    assert report.rotation_error <= 1e-8
    assert report.energy_drift <= 1e-10
    assert report.jacobian_defect <= 1e-12
    assert len(report.orbit) == 21


def test_resonant_frequency_is_refused(config):
    solution = frequency_map_solve(integrable_golden(), [0.0, 0.0], config)
    resonant = solution.model_copy(update={"Omega": [1.0, 0.5]})
    with pytest.raises(ResonanceError) as exc:
        torus_extract_and_verify(integrable_golden(), resonant, DIOPH, T=10.0, dt=0.5, samples=2)
    assert sorted(abs(k) for k in exc.value.witness) == [1, 2]
    assert exc.value.exit_code == 3


def test_perturbed_torus_is_verified(config):
    H = perturbed_golden()
    solution = frequency_map_solve(H, [0.05, 0.0], config)
    report = torus_extract_and_verify(H, solution, DIOPH, T=10.0, dt=0.5, samples=2, tol=1e-6)
    assert report.diophantine.diophantine
    assert report.passed
    assert report.max_deviation <= 1e-6
    assert report.rotation_error <= 1e-4
    assert report.energy_drift <= 1e-10


def test_orbit_budget_is_enforced(config):
    solution = frequency_map_solve(integrable_golden(), [0.0, 0.0], config)
    with patch.object(settings, "MAX_ORBIT_SAMPLES", 10):
        with pytest.raises(BudgetExhaustedError):
            torus_extract_and_verify(integrable_golden(), solution, DIOPH, T=10.0, dt=0.5, samples=3)


def test_degenerate_family_keeps_the_frequency(config):
    H = degenerate_j1()
    report = degeneracy_detect(birkhoff_normal_form(H, 4).N, H=H)
    scan = degenerate_family(H, report, [-1e-2, -5e-3, 5e-3, 1e-2], config, workers=1)
    assert scan.mode == "degenerate"
    assert all(p.error is None for p in scan.points)
    assert max(p.deviation for p in scan.points) <= 1e-8
    assert max(p.angle for p in scan.points) <= 1e-8
    assert abs(scan.slope) <= 1e-6


def test_russmann_family_recovers_mu(config):
    H = russmann_type()
    report = degeneracy_detect(H)
    scan = degenerate_family(H, report, [-0.2, -0.1, 0.0, 0.1, 0.2], config, workers=1)
    assert scan.mode == "russmann"
    assert max(p.angle for p in scan.points) <= 1e-8
    assert scan.mu_fit[:3] == pytest.approx([1.0, 1.0, 0.5], abs=1e-8)


def test_family_needs_a_degenerate_direction(config):
    report = degeneracy_detect(integrable_golden())
    with pytest.raises(ModelValidationError):
        degenerate_family(integrable_golden(), report, [0.1], config)
