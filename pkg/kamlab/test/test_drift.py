import pytest
import warnings
import numpy as np
from mpmath import mpf

from kamlab.drift.bumps import build_bumps, check_plateaus, check_witnesses, edge_norm, plateau_bound
from kamlab.drift.cover import build_cover
from kamlab.drift.flows import (
    Stage,
    diffusion_experiment,
    energy,
    exact_flow,
    gdelta_schedule,
    integrate_check,
    minimal_time,
    launch_state,
)
from kamlab.drift.kicks import build_kick, combined_norm, determinant_defect
from kamlab.drift.model import SLOW, assemble_H0
from kamlab.errors import ConfigValidationError, InfeasibleCoverError, ModelValidationError
from kamlab.routes.drift import build_drift_model
from kamlab.schemas.run import DiffusionConfig

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")


@pytest.fixture(scope="module")
def config():
    return DiffusionConfig()


@pytest.fixture(scope="module")
def drift(config):
    return build_drift_model(config)


@pytest.fixture(scope="module")
def kick(drift, config):
    stage = config.stages[0]
    return build_kick(drift, stage.interval, stage.A, stage.delta, config.s, stage.eps)


@pytest.fixture(scope="module")
def start(drift, kick):
    return launch_state(drift, kick, 1.0, seed=5)


def test_cover_interlaces():
    cover = build_cover(0, 6, 2.0, 0.1)
    assert cover.chain_holds()
    for n in cover.indices():
        a, b = cover.interval(n)
        ai, bi = cover.inner_interval(n)
        assert a < ai < bi < b
    assert cover.containing(1.5) == [0]
    with pytest.raises(ModelValidationError):
        cover.interval(7)


def test_infeasible_cover_is_rejected():
    with pytest.raises(InfeasibleCoverError):
        build_cover(0, 3, 1.1, 0.5)
    with pytest.raises(InfeasibleCoverError):
        build_cover(0, 3, 1.0, 0.1)


def test_plateau_bound_schedules():
    assert plateau_bound(1e-4, 0.5, 2, 2) == pytest.approx(1e-4 * 0.5 ** 4)
    assert plateau_bound(1e-4, 3.0, 2, 2) == 1e-4
    assert plateau_bound(1e-4, 0.5, 1, 2, gevrey=True) == pytest.approx(1e-4 * 0.5 ** 2)


def test_bumps_are_flat_on_their_plateaus(drift, config):
    bumps = drift.bumps
    assert check_plateaus(bumps)
    assert check_witnesses(bumps)
    for p in bumps.plateaus:
        assert 0.0 < p.value < p.bound
    assert all(norm < config.eps for norm in bumps.norms.values())
    assert len(bumps.pairs) == config.cover_range[1] - config.cover_range[0] + 1


def test_bump_norms_are_measured_on_the_edges(drift):
    bumps = drift.bumps
    for i in (1, 2, 3):
        edges = [edge_norm(bumps, p) for p in bumps.plateaus if p.family == i]
        assert bumps.norms[i] == max(edges, default=0.0)
    for p in bumps.plateaus:
        # the C^0 part alone is the plateau height
        assert edge_norm(bumps, p) >= p.value


def test_plateau_frequencies_are_exact(drift):
    p = drift.bumps.plateaus[0]
    x = 0.5 * (p.start + p.end)
    assert drift.exact_frequency(p.family, x) == mpf(p.exact)
    assert drift.exact_frequency(4, x) is None


def test_drift_model_gradient_off_the_cover(drift):
    r = np.zeros(drift.dim)
    assert np.array_equal(drift.gradient(r), np.asarray(drift.omega0))


def _action_scale(kick) -> float:
    """Size of the action jump of a kick; float round-off on the actions scales with it."""
    return 2 * np.pi * max(abs(q) for q in kick.q)


def test_kick_is_symplectic_and_invertible(drift, kick, config):
    assert kick.norm < config.stages[0].eps
    assert determinant_defect(kick, drift.dim, samples=5, seed=1) <= 1e-12
    rng = np.random.default_rng(1)
    d = drift.dim
    for _ in range(5):
        state = rng.random(2 * d)
        state[d + SLOW] = rng.uniform(*kick.support)
        back = kick.inverse(kick.apply(state[None, :]))[0]
        assert np.allclose(back, state, rtol=0.0, atol=1e-14 * _action_scale(kick) + 1e-12)


def test_kick_is_the_identity_off_its_support(drift, kick):
    state = np.random.default_rng(2).random(2 * drift.dim)
    state[drift.dim + SLOW] = 0.0
    assert np.array_equal(kick.apply(state[None, :])[0], state)


def test_exact_flow_conserves_r4_and_energy(drift, kick, start):
    d = drift.dim
    times = np.linspace(-50.0, 50.0, 11)
    states = np.array([exact_flow(drift, [kick], start, float(t)) for t in times])
    assert np.max(np.abs(states[:, d + SLOW] - start[d + SLOW])) <= 1e-12
    h = energy(drift, [kick], states)
    assert np.max(np.abs(h - h[0])) <= 1e-10 * max(1.0, float(np.max(np.abs(h))))


def test_exact_flow_is_a_group(drift, kick, start):
    d = drift.dim
    direct = exact_flow(drift, [kick], start, 3.0)
    stepped = exact_flow(drift, [kick], exact_flow(drift, [kick], start, 1.0), 2.0)
    gap = (direct[:d] - stepped[:d] + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(gap)) <= 1e-9
    assert np.allclose(direct[d:], stepped[d:], rtol=0.0, atol=1e-13 * _action_scale(kick) + 1e-12)


def test_exact_flow_agrees_with_integration(drift, kick, start):
    # low-order resonance so the integrator does not fight cancellation in q1 F1 + q2 F2
    small = kick.model_copy(update={"q": [1, -1]})
    assert integrate_check(drift, [small], start, 100.0, 10.0) <= 1e-8


def test_kicked_orbit_drifts_both_ways(drift, kick, start, config):
    result = diffusion_experiment(drift, [kick], start, config.A, samples=401)
    verdict = result.verdict
    assert verdict.T == pytest.approx(minimal_time(kick))
    assert (verdict.i1, verdict.i2) == tuple(kick.coords)
    assert verdict.forward and verdict.backward
    assert verdict.t_hit is not None and 0 < verdict.t_hit <= verdict.T
    assert verdict.r4_drift <= 1e-12
    assert len(result.trace.rows()) == 401


def test_orbit_off_the_kick_keeps_its_actions(drift, kick, start):
    rest = start.copy()
    rest[drift.dim + SLOW] = 0.0
    result = diffusion_experiment(drift, [kick], rest, 10.0, T=100.0, samples=101)
    assert np.max(np.abs(np.asarray(result.trace.r) - rest[drift.dim:])) == 0.0
    assert not result.verdict.forward


def test_time_is_required_away_from_the_kick(drift, kick, start):
    rest = start.copy()
    rest[drift.dim + SLOW] = 0.0
    with pytest.raises(ConfigValidationError):
        diffusion_experiment(drift, [kick], rest, 10.0)


def test_overlapping_stages_are_rejected(drift):
    stages = [Stage(eps=1e-3, A=10.0, interval=2), Stage(eps=1e-3, A=10.0, interval=3)]
    with pytest.raises(ConfigValidationError):
        gdelta_schedule(drift, stages, s=2)


def test_bump_parameters_are_validated(config):
    cover = build_cover(0, 2, config.growth, config.overlap)
    with pytest.raises(ModelValidationError):
        build_bumps(cover, [1.0, -0.5, 0.4], config.eps, config.s, config.eta)
    with pytest.raises(ModelValidationError):
        build_bumps(cover, config.omega0, config.eps, config.s, eta=1.5)


def test_assemble_H0_checks_the_frequencies(drift, config):
    model = assemble_H0(drift.bumps, config.omega0 + [0.25])
    assert model.dim == 5
    with pytest.raises(ModelValidationError):
        assemble_H0(drift.bumps, config.omega0[:3])
    with pytest.raises(ModelValidationError):
        assemble_H0(drift.bumps, [1.0, 0.6, 0.4, 0.5])


def test_combined_norm_of_one_kick_is_its_own(kick, config):
    assert combined_norm([kick], config.s) == pytest.approx(kick.norm, rel=1e-9)


def test_separated_kicks_do_not_add_up(drift, kick, config):
    other = build_kick(drift, 1, 10.0, 1.0, config.s, 1e-3)
    assert other.support[1] < kick.support[0]
    measured = combined_norm([other, kick], config.s)
    assert measured == pytest.approx(max(other.norm, kick.norm), rel=1e-9)
    assert measured <= other.norm + kick.norm
