from collections import Counter

import numpy as np
import pytest

from mdcplanner.config import IntentConfig
from mdcplanner.core.baseline_planners import (
    greedy_insertion_tour,
    nearest_neighbor_tour,
    random_tour,
)
from mdcplanner.core.planners import build_planners, get_planner
from mdcplanner.core.tour_model import bind_intent, tour_length
from mdcplanner.models.campaign_models import PlannerName
from mdcplanner.models.network_models import Point2D
from mdcplanner.utils.exceptions import ConfigurationError, InvalidArgumentError
from mdcplanner.utils.oracles import brute_force_tour

SQUARE = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
LINE = np.array([[0.0, 0.0], [3.0, 0.0], [1.0, 0.0], [2.0, 0.0]])


class TestRandomTour:
    def test_single_rp(self):
        assert random_tour(5, 1) == [0]

    def test_reproducible(self):
        assert random_tour(17, 12) == random_tour(17, 12)
        assert sorted(random_tour(17, 12)) == list(range(12))

    def test_seeds_differ(self):
        assert len({tuple(random_tour(seed, 10)) for seed in range(20)}) > 1

    def test_uniform_over_permutations(self):
        counts = Counter(tuple(random_tour(seed, 3)) for seed in range(12_000))
        assert len(counts) == 6
        assert all(1800 <= c <= 2200 for c in counts.values())

    def test_rejects_empty(self):
        with pytest.raises(InvalidArgumentError):
            random_tour(0, 0)


class TestNearestNeighbor:
    def test_collinear(self):
        assert nearest_neighbor_tour(LINE) == [0, 2, 3, 1]

    def test_two_rps(self):
        assert nearest_neighbor_tour(np.array([[0.0, 0.0], [5.0, 5.0]])) == [0, 1]

    def test_starts_near_anchor(self):
        assert nearest_neighbor_tour(LINE, start=Point2D(x=3.2, y=0.0)) == [1, 3, 2, 0]
        assert nearest_neighbor_tour(LINE, start=(3.2, 0.0)) == [1, 3, 2, 0]

    def test_start_index(self):
        assert nearest_neighbor_tour(LINE, start=3)[0] == 3

    def test_start_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            nearest_neighbor_tour(LINE, start=4)

    def test_each_step_takes_closest_unvisited(self, rng):
        for _ in range(50):
            rp = rng.uniform(0, 200, size=(12, 2))
            order = nearest_neighbor_tour(rp)
            for pos in range(len(order) - 1):
                here = rp[order[pos]]
                rest = order[pos + 1:]
                gaps = np.linalg.norm(rp[rest] - here, axis=1)
                assert np.linalg.norm(rp[order[pos + 1]] - here) == pytest.approx(gaps.min())


class TestGreedyInsertion:
    def test_three_rps(self):
        order = greedy_insertion_tour(np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]))
        assert sorted(order) == [0, 1, 2]

    def test_square_perimeter(self):
        assert tour_length(greedy_insertion_tour(SQUARE), SQUARE) == pytest.approx(4.0)

    def test_open_collinear(self):
        order = greedy_insertion_tour(LINE, closed=False)
        assert order == [0, 2, 3, 1]
        assert tour_length(order, LINE, closed=False) == pytest.approx(3.0)

    def test_single_rp(self):
        assert greedy_insertion_tour(np.array([[1.0, 2.0]])) == [0]

    def test_beats_random_orders(self, rng):
        wins = 0
        for seed in range(100):
            rp = rng.uniform(0, 200, size=(15, 2))
            if tour_length(greedy_insertion_tour(rp), rp) <= tour_length(random_tour(seed, 15), rp):
                wins += 1
        assert wins >= 95


class TestBruteForceOracle:
    def test_square(self):
        order, length = brute_force_tour(SQUARE)
        assert order[0] == 0
        assert length == pytest.approx(4.0)

    def test_open_line(self):
        order, length = brute_force_tour(LINE, closed=False)
        assert length == pytest.approx(3.0)
        assert tour_length(order, LINE, closed=False) == pytest.approx(3.0)

    def test_single_point(self):
        assert brute_force_tour([[4.0, 4.0]]) == ([0], 0.0)

    def test_size_limit(self):
        with pytest.raises(InvalidArgumentError):
            brute_force_tour(np.zeros((10, 2)))

    def test_no_planner_beats_it(self, rng):
        for _ in range(10):
            rp = rng.uniform(0, 100, size=(7, 2))
            _, best = brute_force_tour(rp)
            for order in (nearest_neighbor_tour(rp), greedy_insertion_tour(rp)):
                assert tour_length(order, rp) >= best - 1e-9


class TestPlannerRegistry:
    def test_unknown_planner(self):
        with pytest.raises(ConfigurationError):
            get_planner("simulated-annealing")

    def test_names_round_trip(self):
        planners = build_planners(["nn", "nn+2opt", "greedy_insertion", "random", "diffusion"])
        assert all(planner.name == key for key, planner in planners.items())

    def test_refinement_never_hurts(self, nominal_scenario, nominal_plan):
        weights = bind_intent(IntentConfig(), nominal_plan)
        rp = nominal_plan.positions()
        plain = get_planner(PlannerName.NN).build(0, nominal_scenario, nominal_plan, weights)
        refined = get_planner(PlannerName.NN_2OPT).build(0, nominal_scenario, nominal_plan, weights)
        assert tour_length(refined.order, rp) <= tour_length(plain.order, rp) + 1e-9
        assert refined.trajectory is None
