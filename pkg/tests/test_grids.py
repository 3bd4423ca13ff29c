import numpy as np
import pytest

from hawkeslim.grids import PathGrid


def test_construction_validates_times():
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 2.0, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        PathGrid(np.array([-1.0, 0.0]), np.zeros(2))
    with pytest.raises(ValueError):
        PathGrid(np.array([[0.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        PathGrid(np.array([]), np.array([]))


def test_construction_validates_value_shape():
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 1.0]), np.zeros((2, 2, 2)))


def test_components_and_horizon():
    g = PathGrid(np.array([0.0, 0.5, 2.0]), np.arange(3.0))
    assert g.n_components == 1
    assert g.horizon == 2.0
    g2 = PathGrid(np.array([0.0, 1.0]), np.zeros((2, 2)))
    assert g2.n_components == 2


def test_value_at_is_right_continuous():
    g = PathGrid(np.array([0.0, 1.0, 2.0]), np.array([10.0, 20.0, 30.0]))
    assert g.value_at(0.5) == 10.0
    assert g.value_at(1.0) == 20.0
    assert g.value_at(5.0) == 30.0
    assert g.value_at(-1.0) == 10.0
    np.testing.assert_array_equal(
        g.value_at(np.array([0.0, 0.99, 1.01, 2.0])),
        np.array([10.0, 10.0, 20.0, 30.0]),
    )


def test_value_at_vector_components():
    g = PathGrid(np.array([0.0, 1.0]), np.array([[1.0, -1.0], [2.0, -2.0]]))
    np.testing.assert_array_equal(g.value_at(0.5), np.array([1.0, -1.0]))


def test_csv_round_trip_scalar(tmp_path):
    rng = np.random.default_rng(0)
    times = np.sort(rng.uniform(0.0, 1.0, 17))
    g = PathGrid(times, rng.normal(size=17))
    dest = tmp_path / "path.csv"
    g.to_csv(dest)
    header = dest.read_text().splitlines()[0]
    assert header == "time,value"
    back = PathGrid.from_csv(dest)
    np.testing.assert_array_equal(back.times, g.times)
    np.testing.assert_array_equal(back.values, g.values)


def test_csv_round_trip_two_components(tmp_path):
    g = PathGrid(np.array([0.0, 0.25, 1.0]), np.arange(6.0).reshape(3, 2))
    dest = tmp_path / "path.csv"
    g.to_csv(dest)
    assert dest.read_text().splitlines()[0] == "time,value_1,value_2"
    back = PathGrid.from_csv(dest)
    assert back.n_components == 2
    np.testing.assert_array_equal(back.values, g.values)
