import pytest
import warnings
import numpy as np

from kamlab.errors import (
    ModelValidationError,
    NotRussmannDegenerateError,
    ResonanceError,
    SeriesValidationError,
)
from kamlab.normal_forms.birkhoff import (
    birkhoff_normal_form,
    bnf_invariance_check,
    centered_consistency,
    centered_normal_form,
    frequency_from,
    random_generator,
)
from kamlab.normal_forms.diagnostics import (
    degeneracy_detect,
    diophantine_density,
    russmann_mu_extract,
    russmann_primitive,
    transversality,
)
from kamlab.normal_forms.liouville import kolmogorov_ball_fraction, liouville_truncated_bnf
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.series import FourierTaylorSeries
from kamlab.utils.presets import (
    GOLDEN,
    degenerate_j1,
    integrable_golden,
    liouville_kolmogorov,
    perturbed_golden,
    russmann_type,
)

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")


@pytest.fixture(scope="module")
def liouville_model():
    return liouville_kolmogorov()


def test_integrable_model_is_its_own_normal_form():
    nf = birkhoff_normal_form(integrable_golden(), 4)
    coeffs = nf.coefficients(1e-14)
    assert set(coeffs) == {"1,0", "0,1", "2,0", "0,2"}
    assert coeffs["1,0"] == pytest.approx(1.0)
    assert coeffs["0,1"] == pytest.approx(GOLDEN)
    assert coeffs["2,0"] == pytest.approx(0.5)
    assert coeffs["0,2"] == pytest.approx(0.5)
    assert nf.residual_norm == 0.0
    assert nf.conjugacy_defect == 0.0


def test_normal_form_gradient_and_hessian():
    nf = birkhoff_normal_form(integrable_golden(), 4)
    c = np.array([0.1, -0.2])
    assert np.allclose(nf.gradient(c), [1.0 + 0.1, GOLDEN - 0.2], atol=1e-14)
    assert np.allclose(nf.hessian(c), np.eye(2), atol=1e-14)


def test_perturbed_normal_form_is_angle_free():
    nf = birkhoff_normal_form(perturbed_golden(), 4)
    assert nf.N.oscillating_part().is_zero()
    assert nf.conjugacy_defect <= 1e-10
    assert nf.omega0 == pytest.approx([1.0, GOLDEN])


def test_angle_dependent_frequency_is_rejected():
    H = integrable_golden() + FourierTaylorSeries.cosine([1, 0], [1, 0], 1e-3, 2, 4)
    with pytest.raises(SeriesValidationError):
        frequency_from(H)


def test_resonant_frequency_raises():
    H = FourierTaylorSeries.linear([1.0, 1.0], 2, 3)
    H = H + FourierTaylorSeries.cosine([1, -1], [2, 0], 1e-2, 2, 3)
    with pytest.raises(ResonanceError) as exc:
        birkhoff_normal_form(H, 3)
    assert exc.value.exit_code == 3


def test_normal_form_is_invariant_under_translation():
    report = bnf_invariance_check(perturbed_golden(), None, 4, translation=[0.3, 0.1])
    assert report.deviation <= 1e-12
    assert report.translation == [0.3, 0.1]


def test_normal_form_is_invariant_under_an_exact_change():
    chi = random_generator(2, 1e-2, 3, degree_cutoff=5)
    report = bnf_invariance_check(perturbed_golden(), chi, 4, fourier_cutoff=6)
    assert report.inversion_residual <= 1e-12
    assert report.deviation <= 1e-9


def test_random_generator_has_the_requested_size():
    chi = random_generator(2, 1e-2, 5)
    assert chi.coefficient_norm() == pytest.approx(1e-2)
    assert chi.degree_part(0, 1).is_zero()


def test_generator_must_be_quadratic_in_the_actions():
    chi = FourierTaylorSeries.cosine([1, 0], [1, 0], 1e-3, 1, 3)
    with pytest.raises(SeriesValidationError):
        bnf_invariance_check(perturbed_golden(), chi, 3)


def test_centered_normal_form_matches_the_birkhoff_one():
    H = perturbed_golden(eps=1e-5)
    centered = centered_normal_form(H, 4)
    gamma_gap, omega_gap = centered_consistency(centered, birkhoff_normal_form(H, 4))
    assert gamma_gap <= 1e-8
    assert omega_gap <= 1e-8


def test_centered_frequency_at_the_origin_is_omega0():
    centered = centered_normal_form(integrable_golden(), 3)
    assert np.allclose(centered.frequency(np.zeros(2)), [1.0, GOLDEN], atol=1e-14)
    assert np.allclose(centered.frequency(np.array([0.1, 0.2])), [1.1, GOLDEN + 0.2], atol=1e-12)


def test_russmann_profile_is_recovered():
    mu, residual = russmann_mu_extract(russmann_type())
    assert mu.coef[:3] == pytest.approx([1.0, 1.0, 0.5], abs=1e-10)
    assert residual <= 1e-10


def test_russmann_primitive_rebuilds_the_model():
    H = russmann_type()
    assert russmann_primitive([1.0, 1.0, 0.5], [1.0, GOLDEN], 4).max_abs_diff(H) <= 1e-14


def test_nondegenerate_gradient_is_not_russmann():
    with pytest.raises(NotRussmannDegenerateError):
        russmann_mu_extract(integrable_golden())


def test_integrable_model_is_nondegenerate():
    report = degeneracy_detect(birkhoff_normal_form(integrable_golden(), 4).N)
    assert report.j == 0
    assert report.rank == 2
    assert np.allclose(report.M0, np.eye(2))


def test_degenerate_direction_is_found():
    H = degenerate_j1()
    report = degeneracy_detect(birkhoff_normal_form(H, 4).N, H=H)
    assert report.j == 1
    assert np.allclose(np.abs(report.gamma[0]), [0.0, 1.0], atol=1e-10)
    assert report.mu is None


def test_russmann_model_reports_mu():
    report = degeneracy_detect(russmann_type())
    assert report.j == 1
    assert report.mu[:3] == pytest.approx([1.0, 1.0, 0.5], abs=1e-10)


def test_transversality_picks_the_resonance_direction():
    N = birkhoff_normal_form(integrable_golden(), 4).N
    record = transversality(N, [1, -1], 1)
    k_hat = np.array([1.0, -1.0]) / np.sqrt(2.0)
    assert record.sigma == pytest.approx(1.0, abs=1e-6)
    assert abs(np.dot(record.u, k_hat)) == pytest.approx(1.0, abs=1e-4)


def test_transversality_rejects_zero_k():
    with pytest.raises(ModelValidationError):
        transversality(integrable_golden(), [0, 0], 1)


def test_density_decreases_with_kappa():
    nf = birkhoff_normal_form(integrable_golden(), 2)
    fractions = []
    for kappa in (1e-2, 1e-3, 1e-4):
        params = DiophantineParams(kappa=kappa, tau=1.5, N_check=30)
        estimate = diophantine_density(nf.gradient, 1e-2, params, 1000, seed=11, dim=2, workers=1)
        assert 0.0 <= estimate.fraction <= 1.0
        fractions.append(estimate.fraction)
    assert fractions[0] >= fractions[1] >= fractions[2]


def test_density_needs_enough_samples():
    nf = birkhoff_normal_form(integrable_golden(), 2)
    with pytest.raises(ModelValidationError):
        diophantine_density(nf.gradient, 1e-2, DiophantineParams(kappa=1e-3), 100, seed=1, dim=2)


def test_liouville_truncation_keeps_the_hessian(liouville_model):
    truncation = liouville_truncated_bnf(liouville_model, 20, 1.5, 3)
    assert truncation.K == 6
    assert truncation.min_divisor > 20 ** -1.5
    assert truncation.hessian_gap <= 1e-8
    assert truncation.remainder_norm <= truncation.remainder_bound


def test_liouville_divisor_guard(liouville_model):
    with pytest.raises(ResonanceError):
        liouville_truncated_bnf(liouville_model, 20, 1.0, 3)


def test_kolmogorov_ball_is_mostly_certified(liouville_model):
    truncation = liouville_truncated_bnf(liouville_model, 20, 1.5, 3)
    centered = centered_normal_form(truncation.truncated, 3)
    ball = kolmogorov_ball_fraction(centered, DiophantineParams(kappa=0.5, N_check=100), 1000, seed=2,
                                    Q_n=20, gamma=1.5, q=3, workers=1)
    assert ball.delta_n == pytest.approx(20.0 ** -13.5)
    assert ball.radius == ball.delta_n
    assert ball.certified_fraction > 0.5
