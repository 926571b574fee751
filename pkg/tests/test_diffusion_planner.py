import math

import numpy as np
import pytest

from mdcplanner.config import DenoiserKind, DiffusionConfig, IntentConfig
from mdcplanner.core import diffusion_planner
from mdcplanner.core.deployment import build_candidates
from mdcplanner.core.diffusion_planner import (
    build_schedule,
    extract_order,
    guidance_gradient,
    guidance_loss,
    plan_tour,
    reference_trajectory,
    sample_trajectory,
    two_opt,
)
from mdcplanner.core.baseline_planners import nearest_neighbor_tour
from mdcplanner.core.rng import DIFFUSION_STREAM, make_rng
from mdcplanner.core.rp_placement import select_rps
from mdcplanner.core.tour_model import bind_intent, tour_length
from mdcplanner.models.network_models import IntentWeights
from mdcplanner.models.planning_models import DenoiserSpec, NoiseSchedule
from mdcplanner.utils.exceptions import InvalidArgumentError
from mdcplanner.utils.oracles import brute_force_tour

NO_INTENT = IntentWeights()


def _line(h: int) -> np.ndarray:
    return np.column_stack([np.linspace(-1.0, 1.0, h), np.zeros(h)])


def _loss_by_loops(x, rp, weights, beta_soft):
    h = len(x)
    length = math.fsum(math.hypot(*(x[i + 1] - x[i])) for i in range(h - 1))
    proximity, visit_index = 0.0, 0.0
    for j, p in enumerate(rp):
        kernel = [math.exp(-beta_soft * math.hypot(*(x[i] - p))) for i in range(h)]
        total = math.fsum(kernel)
        w = weights.rp_importance[j]
        proximity += w * -math.log(total) / beta_soft
        visit_index += w * math.fsum(i * kernel[i] for i in range(h)) / total / h
    return weights.eta_t * length + weights.eta_p * proximity + weights.eta_f * visit_index


class TestGuidance:
    def test_straight_line_length(self):
        h = 11
        loss = guidance_loss(_line(h), np.array([[0.0, 0.5]]), IntentWeights(eta_t=1.0))
        assert loss == pytest.approx((h - 1) * 0.2, rel=1e-9)

    def test_length_gradient_on_straight_line(self):
        grad = guidance_gradient(_line(9), np.array([[0.0, 0.5]]), IntentWeights(eta_t=0.5))
        np.testing.assert_allclose(grad[1:-1], 0.0, atol=1e-12)
        assert np.linalg.norm(grad[0]) == pytest.approx(0.5)
        assert np.linalg.norm(grad[-1]) == pytest.approx(0.5)

    def test_matches_finite_differences(self, rng):
        weights = IntentWeights(eta_t=0.5, eta_f=0.3, eta_p=0.2)
        step = 1e-5
        for _ in range(50):
            x = rng.uniform(-1, 1, size=(20, 2))
            rp = rng.uniform(-1, 1, size=(5, 2))
            grad = guidance_gradient(x, rp, weights, beta_soft=20.0)
            numeric = np.zeros_like(x)
            for h in range(x.shape[0]):
                for k in range(2):
                    up, down = x.copy(), x.copy()
                    up[h, k] += step
                    down[h, k] -= step
                    numeric[h, k] = (guidance_loss(up, rp, weights, 20.0)
                                     - guidance_loss(down, rp, weights, 20.0)) / (2 * step)
            np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-6)

    def test_loss_matches_loop_evaluation(self, rng):
        for _ in range(50):
            x = rng.uniform(-1, 1, size=(20, 2))
            rp = rng.uniform(-1, 1, size=(5, 2))
            weights = IntentWeights(eta_t=0.5, eta_f=0.3, eta_p=0.2,
                                    rp_importance=rng.uniform(0.1, 2.0, size=5).tolist())
            expected = _loss_by_loops(x, rp, weights, 50.0)
            assert guidance_loss(x, rp, weights, 50.0) == pytest.approx(expected, rel=1e-9)

    def test_proximity_reaches_hard_min(self):
        x = _line(11)
        rp = x[3:4].copy()
        weights = IntentWeights(eta_p=1.0)
        assert guidance_loss(x, rp, weights, beta_soft=1.0) < -1.0
        for beta_soft in (1e3, 1e4, 1e5):
            assert abs(guidance_loss(x, rp, weights, beta_soft=beta_soft)) < 1e-5

    def test_zero_weights_give_zero_gradient(self, rng):
        x = rng.uniform(-1, 1, size=(10, 2))
        grad = guidance_gradient(x, rng.uniform(-1, 1, size=(3, 2)), NO_INTENT)
        assert not grad.any()

    def test_needs_two_waypoints(self):
        with pytest.raises(InvalidArgumentError):
            guidance_loss(np.zeros((1, 2)), np.zeros((1, 2)), IntentWeights(eta_t=1.0))


class TestSampling:
    RP = np.array([[-0.5, -0.5], [0.5, -0.5], [0.0, 0.5]])

    def test_zero_denoiser_without_noise_or_guidance(self):
        k_steps, h = 10, 6
        schedule = NoiseSchedule.linear(k_steps)
        schedule = schedule.with_gamma(np.zeros(k_steps)).with_sigma(np.zeros(k_steps))
        result = sample_trajectory(7, self.RP, NO_INTENT, schedule, DenoiserSpec(kind=DenoiserKind.ZERO), h)

        x_k = make_rng(7, DIFFUSION_STREAM).standard_normal((h, 2))
        expected = x_k / np.prod(np.sqrt(schedule.alpha))
        np.testing.assert_allclose(result.points, expected, rtol=1e-12)

    def test_weights_do_not_change_the_gaussian_draws(self, monkeypatch):
        recorded = []

        def recording_rng(seed, *names):
            source = make_rng(seed, *names)
            draws = []
            recorded.append(draws)

            class Recorder:
                def standard_normal(self, size):
                    out = source.standard_normal(size)
                    draws.append(out.copy())
                    return out

            return Recorder()

        monkeypatch.setattr(diffusion_planner, "make_rng", recording_rng)
        schedule = NoiseSchedule.linear(20)
        spec = DenoiserSpec(kind=DenoiserKind.ZERO)
        length_only = sample_trajectory(13, self.RP, IntentWeights(eta_t=1.0), schedule, spec, 12)
        visit_only = sample_trajectory(13, self.RP, IntentWeights(eta_p=1.0, eta_f=0.5), schedule, spec, 12)

        assert not np.allclose(length_only.points, visit_only.points)
        first, second = recorded
        assert [d.shape for d in first] == [(12, 2), (20, 12, 2)]
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(first[0], make_rng(13, DIFFUSION_STREAM).standard_normal((12, 2)))

    def test_analytic_reference_lands_on_reference(self):
        order = [0, 1, 2]
        spec = DenoiserSpec(kind=DenoiserKind.ANALYTIC_REFERENCE, reference_order=order)
        result = sample_trajectory(3, self.RP, NO_INTENT, NoiseSchedule.linear(50), spec, 30)
        np.testing.assert_allclose(result.points, reference_trajectory(self.RP, order, 30, True), atol=1e-9)

    def test_external_denoiser(self):
        class ZeroModel:
            def predict(self, x, k, alpha_bar_k, rp, weights):
                return np.zeros_like(x)

        schedule = NoiseSchedule.linear(8)
        external = sample_trajectory(5, self.RP, NO_INTENT, schedule,
                                     DenoiserSpec(kind=DenoiserKind.EXTERNAL, handle=ZeroModel()), 10)
        zero = sample_trajectory(5, self.RP, NO_INTENT, schedule, DenoiserSpec(kind=DenoiserKind.ZERO), 10)
        np.testing.assert_array_equal(external.points, zero.points)

    def test_external_denoiser_shape_checked(self):
        class BadModel:
            def predict(self, x, k, alpha_bar_k, rp, weights):
                return np.zeros(3)

        with pytest.raises(InvalidArgumentError):
            sample_trajectory(5, self.RP, NO_INTENT, NoiseSchedule.linear(4),
                              DenoiserSpec(kind=DenoiserKind.EXTERNAL, handle=BadModel()), 10)

    def test_reference_order_required(self):
        with pytest.raises(InvalidArgumentError):
            sample_trajectory(1, self.RP, NO_INTENT, NoiseSchedule.linear(4),
                              DenoiserSpec(kind=DenoiserKind.ANALYTIC_REFERENCE), 10)

    def test_fewer_waypoints_than_rps(self):
        with pytest.raises(InvalidArgumentError):
            sample_trajectory(1, self.RP, NO_INTENT, NoiseSchedule.linear(4),
                              DenoiserSpec(kind=DenoiserKind.ZERO), 2)

    def test_nominal_size_is_finite(self, nominal_scenario, nominal_plan):
        weights = bind_intent(IntentConfig(), nominal_plan)
        rp = nominal_scenario.area.normalize(nominal_plan.positions())
        reference = nearest_neighbor_tour(nominal_plan.positions(), start=nominal_scenario.sink)
        result = sample_trajectory(11, rp, weights, build_schedule(DiffusionConfig()),
                                   DenoiserSpec(reference_order=reference), 80)
        assert result.points.shape == (80, 2)
        assert np.all(np.isfinite(result.points))

    def test_guidance_shortens_the_trajectory(self):
        k_steps, h = 50, 40
        weights = IntentWeights(eta_t=1.0)
        base = NoiseSchedule.linear(k_steps)
        spec = DenoiserSpec(kind=DenoiserKind.ZERO)
        unguided = sample_trajectory(21, self.RP, weights, base.with_gamma(np.zeros(k_steps)), spec, h)
        guided = sample_trajectory(21, self.RP, weights, base.with_gamma(np.full(k_steps, 0.05)), spec, h)
        assert guidance_loss(guided.points, self.RP, weights) < guidance_loss(unguided.points, self.RP, weights)


def _first_visit_naive(x, rp):
    keys = []
    for j, p in enumerate(rp):
        best_h, best_d = 0, float("inf")
        for h, w in enumerate(x):
            d = float(np.hypot(*(w - p)))
            if d < best_d:
                best_h, best_d = h, d
        keys.append((best_h, best_d, j))
    return [j for _, _, j in sorted(keys)]


class TestExtractOrder:
    def test_trajectory_through_rps(self):
        rp = np.array([[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]])
        x = np.column_stack([np.linspace(20.0, 0.0, 21), np.zeros(21)])
        assert extract_order(x, rp) == [2, 1, 0]

    def test_shared_waypoint_breaks_ties_by_distance(self):
        x = np.array([[0.0, 0.0], [10.0, 0.0]])
        assert extract_order(x, np.array([[0.0, 3.0], [0.0, 1.0]])) == [1, 0]

    def test_full_tie_breaks_by_index(self):
        x = np.array([[0.0, 0.0], [10.0, 0.0]])
        assert extract_order(x, np.array([[0.0, 1.0], [0.0, -1.0]])) == [0, 1]

    def test_identical_waypoints(self):
        x = np.zeros((6, 2))
        ring = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        assert extract_order(x, ring) == [0, 1, 2, 3]
        assert extract_order(x, np.array([[3.0, 0.0], [1.0, 0.0], [0.0, 2.0]])) == [1, 2, 0]

    def test_matches_naive_scan(self, rng):
        for _ in range(100):
            x = rng.uniform(0, 100, size=(rng.integers(2, 30), 2))
            rp = rng.uniform(0, 100, size=(rng.integers(1, 12), 2))
            assert extract_order(x, rp) == _first_visit_naive(x, rp)


class TestTwoOpt:
    def test_uncrosses_square(self):
        rp = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        order = two_opt([0, 1, 2, 3], rp)
        assert tour_length(order, rp) == pytest.approx(4.0)
        assert sorted(order) == [0, 1, 2, 3]

    def test_triangle_untouched(self):
        rp = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]])
        assert two_opt([2, 0, 1], rp) == [2, 0, 1]

    def test_open_path(self):
        rp = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        order = two_opt([0, 2, 1, 3], rp, closed=False)
        assert tour_length(order, rp, closed=False) == pytest.approx(3.0)

    def test_zero_passes(self):
        rp = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        assert two_opt([0, 1, 2, 3], rp, max_passes=0) == [0, 1, 2, 3]

    def test_close_to_optimal_on_small_instances(self, rng):
        ratios = []
        for _ in range(100):
            rp = rng.uniform(0, 200, size=(8, 2))
            start = nearest_neighbor_tour(rp)
            order = two_opt(start, rp)
            assert tour_length(order, rp) <= tour_length(start, rp) + 1e-9
            _, best = brute_force_tour(rp)
            ratios.append(tour_length(order, rp) / best)
        assert min(ratios) >= 1.0 - 1e-9
        assert max(ratios) <= 1.25
        assert np.mean(ratios) <= 1.05


class TestPlanTour:
    def test_single_rp(self, scenario_factory):
        scenario = scenario_factory([(50.0, 50.0), (55.0, 52.0)])
        plan = select_rps(scenario, build_candidates(scenario), 1)
        order, trajectory = plan_tour(4, scenario, plan, bind_intent(IntentConfig(), plan),
                                      DiffusionConfig(waypoints=20, k_steps=10))
        assert order == [0]
        assert trajectory.h == 20
        assert not trajectory.normalized

    def test_deterministic(self, nominal_scenario, nominal_plan):
        weights = bind_intent(IntentConfig(), nominal_plan)
        config = DiffusionConfig(waypoints=40, k_steps=20)
        first = plan_tour(9, nominal_scenario, nominal_plan, weights, config)
        second = plan_tour(9, nominal_scenario, nominal_plan, weights, config)
        assert first[0] == second[0]
        np.testing.assert_array_equal(first[1].points, second[1].points)
        assert sorted(first[0]) == list(range(nominal_plan.m))

    def test_snapshots(self, nominal_scenario, nominal_plan):
        weights = bind_intent(IntentConfig(), nominal_plan)
        _, trajectory = plan_tour(9, nominal_scenario, nominal_plan, weights, DiffusionConfig(snapshot_every=10))
        assert sorted(trajectory.snapshots) == [0, 10, 20, 30, 40, 50]
        np.testing.assert_array_equal(trajectory.snapshots[0], trajectory.points)

    def test_zero_denoiser_plans_a_valid_tour(self, nominal_scenario, nominal_plan):
        weights = bind_intent(IntentConfig(), nominal_plan)
        order, _ = plan_tour(2, nominal_scenario, nominal_plan, weights,
                             DiffusionConfig(denoiser=DenoiserKind.ZERO, k_steps=20))
        assert sorted(order) == list(range(nominal_plan.m))

    @pytest.mark.slow
    def test_refined_tours_beat_random_orders(self, nominal_template):
        from mdcplanner.core.baseline_planners import random_tour
        from mdcplanner.core.deployment import generate_scenario

        wins = 0
        for seed in range(10):
            scenario = generate_scenario(seed, 150, nominal_template)
            plan = select_rps(scenario, build_candidates(scenario), 15)
            order, _ = plan_tour(seed, scenario, plan, bind_intent(IntentConfig(), plan))
            rp = plan.positions()
            if tour_length(order, rp) < tour_length(random_tour(seed, plan.m), rp):
                wins += 1
        assert wins >= 9


def _paired_tour_lengths(scenario, plan, k_steps):
    weights = IntentWeights(eta_t=1.0)
    rp = plan.positions()
    guided = DiffusionConfig(denoiser=DenoiserKind.ZERO, two_opt=False, gamma0=0.1, k_steps=k_steps)
    unguided = guided.model_copy(update={"gamma0": 0.0})
    lengths = []
    for seed in range(100):
        with_guidance, _ = plan_tour(seed, scenario, plan, weights, guided)
        without, _ = plan_tour(seed, scenario, plan, weights, unguided)
        lengths.append((tour_length(with_guidance, rp), tour_length(without, rp)))
    return np.array(lengths)


@pytest.mark.slow
def test_length_guidance_lowers_mean_tour_at_nominal_steps(nominal_scenario, nominal_plan):
    lengths = _paired_tour_lengths(nominal_scenario, nominal_plan, 50)
    assert lengths[:, 0].mean() < lengths[:, 1].mean()


@pytest.mark.slow
def test_length_guidance_wins_sign_test(nominal_scenario, nominal_plan):
    # 50 steps of the default schedule move a waypoint by under one normalized unit in
    # total, less than the spread of the zero-denoiser cloud; 100 steps straighten it
    lengths = _paired_tour_lengths(nominal_scenario, nominal_plan, 100)
    wins = int(np.sum(lengths[:, 0] < lengths[:, 1]))
    assert wins >= 64
