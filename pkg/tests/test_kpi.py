import math
import random

import pytest
from hypothesis import given, strategies as st

from udnsim.kpi import RunResult, GridPoint, KpiAccumulator, aggregate, ho_avg_geo, mean

POINT = GridPoint('A', 1, 10, 50.)


def run(*geos, losses=0):
    return RunResult(len(geos), tuple(geos), connection_losses=losses)


def test_ho_avg_geo_without_handover():
    assert ho_avg_geo(run()) is None


def test_ho_avg_geo_single_sample():
    assert ho_avg_geo(run(12.5)) == 12.5


def test_ho_avg_geo_is_the_mean_of_db_values():
    assert ho_avg_geo(run(10., 20., 30.)) == pytest.approx(20.)


def test_run_result_checks_lengths():
    with pytest.raises(ValueError):
        RunResult(2, (1.,))


def test_mean_of_nothing():
    assert mean([]) is None


def test_aggregate_constant_rate():
    cell = aggregate([run(1., 2., 3., 4.) for _ in range(4)], POINT)
    assert cell.mean_ho_rate == 4.
    assert not cell.failure
    assert cell.ho_avg_geo_db == pytest.approx(2.5)
    assert cell.iterations == 4
    assert cell.point == POINT


def test_aggregate_without_any_handover():
    cell = aggregate([run() for _ in range(3)], POINT)
    assert cell.mean_ho_rate == 0.
    assert cell.ho_avg_geo_db is None
    assert cell.pooled_ho_avg_geo_db is None
    assert cell.failure
    assert cell.iterations_with_handover == 0


@pytest.mark.parametrize("ho_counts, failure", [([1] * 99 + [0], True), ([1] * 100, False), ([0, 2], False)])
def test_failure_threshold(ho_counts, failure):
    cell = aggregate([run(*[5.] * k) for k in ho_counts], POINT)
    assert cell.failure is failure


def test_average_skips_runs_without_handover():
    cell = aggregate([run(10.), run(), run(20., 40.)], POINT)
    # Mean of the per-run means (10 and 30), not of the pooled samples
    assert cell.ho_avg_geo_db == pytest.approx(20.)
    assert cell.pooled_ho_avg_geo_db == pytest.approx(70. / 3)
    assert cell.iterations_with_handover == 2
    assert cell.mean_ho_rate == pytest.approx(1.)


def test_connection_losses_mean():
    cell = aggregate([run(losses=1), run(losses=2), run(1.)], POINT)
    assert cell.connection_losses_mean == pytest.approx(1.)


def test_empty_aggregate():
    with pytest.raises(ValueError):
        aggregate([], POINT)


def test_grid_points_sort_canonically():
    points = [GridPoint('B', 1, 10, 50.), GridPoint('A', 2, 10, 50.), GridPoint('A', 1, 20, 50.),
              GridPoint('A', 1, 10, 50.), GridPoint('A', math.inf, 10, 50.)]
    assert sorted(points) == [GridPoint('A', 1, 10, 50.), GridPoint('A', 1, 20, 50.), GridPoint('A', 2, 10, 50.),
                              GridPoint('A', math.inf, 10, 50.), GridPoint('B', 1, 10, 50.)]


runs = st.lists(st.lists(st.integers(-20, 40).map(float), max_size=5).map(lambda g: run(*g)), min_size=1,
                max_size=12)


@given(runs, st.randoms())
def test_aggregate_is_order_independent(results, rnd):
    shuffled = list(results)
    rnd.shuffle(shuffled)
    a = aggregate(results, POINT)
    b = aggregate(shuffled, POINT)
    assert a.mean_ho_rate == pytest.approx(b.mean_ho_rate)
    assert a.failure == b.failure
    if a.ho_avg_geo_db is None:
        assert b.ho_avg_geo_db is None
    else:
        assert a.ho_avg_geo_db == pytest.approx(b.ho_avg_geo_db)


@given(runs, runs, runs)
def test_merge_is_associative(x, y, z):
    acc = [KpiAccumulator() for _ in range(3)]
    for a, results in zip(acc, (x, y, z)):
        for r in results:
            a.add(r)
    left = acc[0].merge(acc[1]).merge(acc[2]).finalize(POINT)
    right = acc[0].merge(acc[1].merge(acc[2])).finalize(POINT)
    assert left == right
    assert left == aggregate(x + y + z, POINT)


@given(runs)
def test_duplicating_runs_keeps_the_kpis(results):
    once = aggregate(results, POINT)
    twice = aggregate(results + results, POINT)
    assert twice.iterations == 2 * once.iterations
    assert twice.mean_ho_rate == pytest.approx(once.mean_ho_rate)
    assert twice.failure == once.failure
    if once.ho_avg_geo_db is not None:
        assert twice.ho_avg_geo_db == pytest.approx(once.ho_avg_geo_db)


def test_merge_of_split_runs():
    results = [run(*[float(i)] * (i % 3)) for i in range(10)]
    random.Random(4).shuffle(results)
    left, right = KpiAccumulator(), KpiAccumulator()
    for r in results[:4]:
        left.add(r)
    for r in results[4:]:
        right.add(r)
    assert right.merge(left).finalize(POINT).mean_ho_rate == pytest.approx(aggregate(results, POINT).mean_ho_rate)
