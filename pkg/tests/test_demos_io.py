import numpy as np
import pytest

from embedcal.dataio import (
    DataFormatError, load_csv_dataset, load_training_csv, write_csv_dataset, write_training_csv,
)
from embedcal.demos import DEMOS, generate_data, get_demo
from embedcal.likelihood import Dataset


def test_demo2_noiseless_grid():
    d = generate_data("demo2", 10)
    np.testing.assert_allclose(d.xs[:, 0], np.linspace(0, 5, 10))
    np.testing.assert_array_equal(d.ys, get_demo("demo2").truth(d.xs[:, 0]))


def test_demo3_noise_level():
    d = generate_data("demo3-quadratic", 1000, 0.5, seed=4)
    resid = d.ys - get_demo("demo3-quadratic").truth(d.xs[:, 0])
    assert 0.35 <= resid.std() <= 0.65
    assert d.xs.min() >= -1 and d.xs.max() <= 1


@pytest.mark.parametrize("demo_id", sorted(DEMOS))
def test_zero_noise_exact_and_seeded(demo_id):
    a = generate_data(demo_id, 25, 0.0, seed=3)
    np.testing.assert_array_equal(a.ys, get_demo(demo_id).truth(a.xs[:, 0]))
    b = generate_data(demo_id, 25, 0.0, seed=3)
    np.testing.assert_array_equal(a.xs, b.xs)


@pytest.mark.parametrize("demo_id", sorted(DEMOS))
def test_models_finite_on_domain(demo_id):
    demo = get_demo(demo_id)
    xs = np.linspace(*demo.domain, 50)[:, None]
    out = demo.model.evaluate(xs, np.array([demo.guess, np.ones(demo.model.dim)]))
    assert out.shape == (2, 50) and np.all(np.isfinite(out))


def test_true_order_model_contains_truth():
    demo = get_demo("demo3-true")
    xs = np.linspace(-1, 1, 30)
    np.testing.assert_allclose(demo.model.evaluate(xs[:, None], np.array([[6.0, 0, 1, -0.5]]))[0],
                               demo.truth(xs), atol=1e-12)


def test_errors():
    with pytest.raises(ValueError, match="unknown demo"):
        generate_data("demo7", 5)
    with pytest.raises(ValueError):
        generate_data("demo1", 0)


class TestCsv:
    def test_two_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,y\n0.1,1.0\n0.2,2.0\n")
        assert load_csv_dataset(p).n == 2

    def test_header_only(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,y\n")
        with pytest.raises(DataFormatError, match="empty dataset"):
            load_csv_dataset(p)

    def test_round_trip_full_precision(self, tmp_path):
        rng = np.random.default_rng(0)
        d = Dataset(rng.normal(size=(7, 2)), rng.normal(size=7))
        write_csv_dataset(d, tmp_path / "d.csv")
        back = load_csv_dataset(tmp_path / "d.csv")
        np.testing.assert_array_equal(back.xs, d.xs)
        np.testing.assert_array_equal(back.ys, d.ys)

    def test_malformed_rows_reported(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y\n1,2\n3,abc\n4\n")
        with pytest.raises(DataFormatError) as info:
            load_csv_dataset(p)
        assert "line 3" in str(info.value) and "line 4" in str(info.value)

    def test_missing_y(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,x2\n1,2\n")
        with pytest.raises(DataFormatError):
            load_csv_dataset(p)

    def test_training_round_trip(self, tmp_path):
        lams = np.random.default_rng(1).uniform(size=(5, 2))
        outs = np.random.default_rng(2).normal(size=(5, 3))
        write_training_csv(lams, outs, tmp_path / "t.csv")
        a, b = load_training_csv(tmp_path / "t.csv")
        np.testing.assert_array_equal(a, lams)
        np.testing.assert_array_equal(b, outs)
