import pytest
import warnings
import numpy as np

from kamlab.errors import ConfigValidationError
from kamlab.kam.decomposition import decompose, mean_defect
from kamlab.kam.iteration import (
    ChangeOfVariables,
    compose_changes,
    conjugacy_residual,
    counter_term_adjust,
    fit_contraction,
    initial_series,
    kam_iterate,
    kam_step,
)
from kamlab.kam.mollifier import MollifierSpec, smooth_step
from kamlab.kam.operators import cohomology_residual, cutoff_P, solve_L
from kamlab.normal_forms.birkhoff import birkhoff_normal_form
from kamlab.series import FourierTaylorSeries, NormWeights
from kamlab.utils.presets import GOLDEN, integrable_golden, perturbed_golden

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")

OMEGA0 = np.array([1.0, GOLDEN])
WEIGHTS = NormWeights(rho=0.1, delta=1.0)


@pytest.fixture
def iterate():
    def run(H, omega, c, tol=1e-12, n_max=8):
        return kam_iterate(H, omega, c, kappa=1e-2, tau=1.5, h=0.02, n_max=n_max, tol=tol, weights=WEIGHTS)
    return run


def test_mollifier_profile():
    l = MollifierSpec()
    assert l.check()
    assert l(0.0) == 1.0
    assert l(0.6) == 0.0
    assert 0.0 < l(0.4) < 1.0
    assert smooth_step(np.array([-1.0, 2.0])).tolist() == [0.0, 1.0]


@pytest.mark.parametrize("sigma", [None, 2.0])
def test_mollifier_derivative_matches_differences(sigma):
    l = MollifierSpec(sigma=sigma)
    x = np.linspace(-0.6, 0.6, 121)
    step = 1e-6
    differences = (l(x + step) - l(x - step)) / (2 * step)
    assert np.allclose(l.derivative(x), differences, atol=1e-5)
    assert np.all(l.derivative(np.linspace(0.26, 0.49, 20)) < 0)
    assert l.derivative(0.0) == 0.0


def test_solve_L_inverts_the_transport():
    f = FourierTaylorSeries.cosine([1, 0], [0, 0], 1.0, 2, 0) + FourierTaylorSeries.cosine([1, -2], [0, 0], 0.3, 2, 0)
    u = solve_L(f, OMEGA0, kappa=1e-2, tau=1.5)
    assert cohomology_residual(f, u, OMEGA0, kappa=1e-2, tau=1.5) <= 1e-14
    assert u.mean_value().is_zero()


def test_cutoff_keeps_near_resonant_modes():
    f = FourierTaylorSeries.cosine([1, 0], [0, 0], 1.0, 2, 0)
    # <n, omega> |n|^tau / kappa = 0.1 lies inside the plateau of l
    assert cutoff_P(f, OMEGA0, kappa=10.0, tau=1.5).max_abs_diff(f) == 0.0
    assert solve_L(f, OMEGA0, kappa=10.0, tau=1.5).is_zero()
    assert cutoff_P(f, OMEGA0, kappa=1e-2, tau=1.5).is_zero()


def test_decomposition_recomposes():
    K = initial_series(perturbed_golden(), OMEGA0, [0.05, 0.0])
    dec = decompose(K, OMEGA0)
    assert dec.recompose().max_abs_diff(K) <= 1e-15


def test_counter_term_cancels_the_linear_drift():
    K = initial_series(integrable_golden(), OMEGA0, [0.0, 0.0])
    W = ChangeOfVariables.identity(2, 2, 4)
    lam, dec = counter_term_adjust(decompose(K, OMEGA0), W, kappa=1e-2, tau=1.5, c=[0.0, 0.0])
    assert lam == pytest.approx(-OMEGA0)
    assert all(b.is_zero(1e-15) for b in dec.B)


def test_counter_term_at_the_origin_is_minus_omega0(iterate):
    result = iterate(integrable_golden(), OMEGA0, [0.0, 0.0])
    assert result.converged
    assert len(result.trace) == 1
    assert result.Lambda == pytest.approx(-OMEGA0)
    assert np.max(np.abs(result.frequency_residual())) == 0.0


def test_integrable_counter_term_matches_the_gradient(iterate):
    c = np.array([0.1, -0.2])
    H = integrable_golden()
    omega = OMEGA0 + c
    result = iterate(H, omega, c)
    assert result.converged
    assert np.allclose(result.frequency_residual(), 0.0, atol=1e-14)
    assert result.Gamma == pytest.approx(float(OMEGA0 @ c + 0.5 * c @ c), abs=1e-14)
    assert conjugacy_residual(H, result) <= 1e-13


def test_quadratic_perturbation_keeps_the_zero_torus(iterate):
    result = iterate(perturbed_golden(), OMEGA0, [0.0, 0.0])
    assert result.converged
    assert result.W.is_identity()
    assert np.max(np.abs(result.frequency_residual())) <= 1e-15


def test_iteration_contracts_away_from_the_origin(iterate):
    H = perturbed_golden()
    c = [0.05, 0.0]
    omega = birkhoff_normal_form(H, 3).gradient(np.array(c))
    result = iterate(H, omega, c, tol=1e-10)
    eps = [r.eps for r in result.trace]
    assert result.converged
    assert len(eps) >= 2
    assert eps[-1] < eps[0]
    assert result.trace[0].h_n == pytest.approx(0.01)
    assert np.allclose(result.W.determinant(np.random.default_rng(0).random((5, 2)), np.zeros((5, 2))), 1.0,
                       atol=1e-6)


def test_schedule_width_must_fit_the_strip():
    with pytest.raises(ConfigValidationError):
        kam_iterate(integrable_golden(), OMEGA0, [0.0, 0.0], 1e-2, 1.5, h=0.5, n_max=2, tol=1e-12,
                    weights=WEIGHTS)


def test_iteration_stops_at_n_max(iterate):
    H = perturbed_golden()
    c = [0.05, 0.0]
    omega = birkhoff_normal_form(H, 3).gradient(np.array(c))
    result = iterate(H, omega, c, tol=1e-300, n_max=0)
    assert not result.converged
    assert len(result.trace) == 1


def test_composition_with_identity():
    zero = FourierTaylorSeries.zeros(2, 1, 2)
    shift = FourierTaylorSeries.cosine([1, 0], [0, 0], 1e-3, 1, 2)
    Z = ChangeOfVariables(Phi=[shift, zero], R1=[zero, zero], R2=[[zero, zero], [zero, zero]])
    I = ChangeOfVariables.identity(2, 1, 2)
    assert compose_changes(I, Z) is Z
    assert compose_changes(Z, I) is Z


def test_composition_applies_in_order():
    zero = FourierTaylorSeries.zeros(2, 2, 2)
    W = ChangeOfVariables(Phi=[zero, zero], R1=[FourierTaylorSeries.cosine([1, 0], [0, 0], 1e-2, 2, 2), zero],
                          R2=[[zero, zero], [zero, zero]])
    Z = ChangeOfVariables(Phi=[FourierTaylorSeries.constant(2, 0.1, 2, 2), zero], R1=[zero, zero],
                          R2=[[zero, zero], [zero, zero]])
    WZ = compose_changes(W, Z)
    phi = np.random.default_rng(3).random((6, 2))
    rho = np.zeros((6, 2))
    angles, actions = WZ.apply(phi, rho)
    z_angles, z_actions = Z.apply(phi, rho)
    w_angles, w_actions = W.apply(z_angles, z_actions)
    assert np.allclose(angles, w_angles, atol=1e-12)
    assert np.allclose(actions, w_actions, atol=1e-12)


def test_contraction_fit():
    fit = fit_contraction([1e-2, 1e-3], [1e-4, 1e-6])
    assert fit.ratios == pytest.approx([1.0, 1.0])
    assert fit.log_ratios == pytest.approx([2.0, 2.0])
    assert fit.constant == pytest.approx(1.0)
    assert fit.spread == pytest.approx(1.0)
    with pytest.raises(ConfigValidationError):
        fit_contraction([1e-2], [1e-4, 1e-6])


def test_mean_defect_before_and_after_the_counter_term():
    K = initial_series(integrable_golden(), OMEGA0, [0.0, 0.0])
    dec = decompose(K, OMEGA0)
    assert mean_defect(dec, kappa=1e-2, tau=1.5) == pytest.approx(OMEGA0)
    W = ChangeOfVariables.identity(2, 2, 4)
    _, adjusted = counter_term_adjust(dec, W, kappa=1e-2, tau=1.5, c=[0.0, 0.0])
    assert np.max(np.abs(mean_defect(adjusted, kappa=1e-2, tau=1.5))) <= 1e-15


def test_kam_step_is_trivial_without_angles():
    K = initial_series(integrable_golden(), OMEGA0, [0.1, -0.2])
    step = kam_step(decompose(K, OMEGA0), kappa=1e-2, tau=1.5)
    assert step.Z.is_identity()
    assert step.flat.is_zero()
    assert step.K.max_abs_diff(K) <= 1e-15


def test_kam_step_shrinks_the_angle_dependence():
    H = perturbed_golden()
    c = [0.05, 0.0]
    omega = birkhoff_normal_form(H, 3).gradient(np.array(c))
    W = ChangeOfVariables.identity(2, 2, 4)
    _, dec = counter_term_adjust(decompose(initial_series(H, omega, c), omega), W, kappa=1e-2, tau=1.5, c=c)
    before = dec.a.oscillating_part().majorant_norm(WEIGHTS)
    step = kam_step(dec, kappa=1e-2, tau=1.5)
    assert before > 0
    assert not step.Z.is_identity()
    assert step.decomposition.a.oscillating_part().majorant_norm(WEIGHTS) < before
