import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qsanfis.dataset import (DataError, Dataset, load_csv, normalize_minmax, split_even_odd,
                             write_csv)

MPG_INPUTS = ["cylinders", "displacement", "horsepower", "weight", "acceleration", "model_year"]


class TestLoadCsv:
    def test_mpg_drops_missing_horsepower(self, mpg_csv):
        d = load_csv(mpg_csv, "mpg", "?", MPG_INPUTS)
        assert len(d) == 392
        assert d.n_inputs == 6
        assert d.input_names == tuple(MPG_INPUTS)
        # first record of the UCI file
        np.testing.assert_array_equal(d.X[0], [8, 307, 130, 3504, 12, 70])
        assert d.y[0] == 18.0

    def test_raw_file_has_398_rows_six_missing(self, mpg_csv):
        lines = mpg_csv.read_text().splitlines()[1:]
        assert len(lines) == 398
        assert sum("?" in ln for ln in lines) == 6

    def test_no_missing_keeps_order(self, write_csv):
        rows = "\n".join(f"{i},{10 * i}" for i in range(10))
        d = load_csv(write_csv("a.csv", "x,y\n" + rows + "\n"), "y")
        assert len(d) == 10
        np.testing.assert_array_equal(d.X[:, 0], np.arange(10))
        np.testing.assert_array_equal(d.y, 10 * np.arange(10))

    def test_middle_row_removed(self, write_csv):
        d = load_csv(write_csv("a.csv", "x,y\n1,2\n?,4\n5,6\n"), "y")
        np.testing.assert_array_equal(d.X[:, 0], [1, 5])
        np.testing.assert_array_equal(d.y, [2, 6])

    def test_custom_token(self, write_csv):
        d = load_csv(write_csv("a.csv", "x,y\n1,2\nNA,4\n"), "y", missing_token="NA")
        assert len(d) == 1

    def test_unused_text_column_is_ignored(self, write_csv):
        d = load_csv(write_csv("a.csv", "x,name,y\n1,foo bar,2\n"), "y", input_columns=["x"])
        assert d.input_names == ("x",)

    @pytest.mark.parametrize("text,match", [
        ("x,y\n1,abc\n", "non-numeric"),
        ("x,y\n?,1\n", "no records left"),
        ("x,z\n1,2\n", "target column"),
        ("", "header"),
        ("x,y\n1,2,3\n", "expected 2 cells"),
    ])
    def test_errors(self, write_csv, text, match):
        with pytest.raises(DataError, match=match):
            load_csv(write_csv("bad.csv", text), "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "nope.csv", "y")

    def test_error_carries_line_number(self, write_csv):
        with pytest.raises(DataError, match=r"bad.csv:3:"):
            load_csv(write_csv("bad.csv", "x,y\n1,2\n1,oops\n"), "y")


def _ds(cols, target):
    return Dataset(np.column_stack(cols), np.asarray(target, dtype=float),
                   tuple(f"c{i}" for i in range(len(cols))), "t")


class TestNormalize:
    def test_affine_endpoints(self):
        d, p = normalize_minmax(_ds([[10, 20, 30]], [1, 2, 3]))
        np.testing.assert_array_equal(d.X[:, 0], [0, 0.5, 1])
        assert not p.constant[0]

    def test_constant_column(self):
        d, p = normalize_minmax(_ds([[5, 5, 5], [1, 2, 3]], [0, 1, 2]))
        np.testing.assert_array_equal(d.X[:, 0], [0, 0, 0])
        assert p.constant[0] and not p.constant[1]

    def test_empty(self):
        with pytest.raises(DataError):
            normalize_minmax(Dataset(np.zeros((0, 1)), np.zeros(0), ("a",), "t"))

    def test_mpg_all_columns_in_unit_interval(self, mpg_csv, tmp_path):
        d, _ = normalize_minmax(load_csv(mpg_csv, "mpg", "?", MPG_INPUTS))
        out = tmp_path / "norm.csv"
        write_csv(out, d)
        table = np.loadtxt(out, delimiter=",", skiprows=1)
        assert table.shape == (392, 7)
        assert table.min() >= -1e-12 and table.max() <= 1 + 1e-12
        np.testing.assert_allclose(table.min(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(table.max(axis=0), 1, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, (12, 3), elements=st.floats(-1e6, 1e6, allow_subnormal=False)))
    def test_denormalize_round_trip(self, raw):
        d = Dataset(raw[:, :2], raw[:, 2], ("a", "b"), "t")
        nd, p = normalize_minmax(d)
        assert nd.X.min() >= -1e-12 and nd.X.max() <= 1 + 1e-12
        back = p.denormalize_inputs(nd.X)
        for j in range(2):
            if p.constant[j]:
                continue
            np.testing.assert_allclose(back[:, j], raw[:, j], rtol=1e-9,
                                       atol=1e-9 * (p.maxs[j] - p.mins[j]))
        if not p.constant[2]:
            np.testing.assert_allclose(p.denormalize_target(nd.y), raw[:, 2], rtol=1e-9,
                                       atol=1e-9 * (p.maxs[2] - p.mins[2]))


class TestSplit:
    def test_mpg_halves(self, mpg_csv):
        d, _ = normalize_minmax(load_csv(mpg_csv, "mpg", "?", MPG_INPUTS))
        train, test = split_even_odd(d)
        assert (len(train), len(test)) == (196, 196)

    def test_single_sample_goes_to_train(self, caplog):
        d = _ds([[1.0]], [2.0])
        train, test = split_even_odd(d)
        assert len(train) == 1 and len(test) == 0
        assert "empty" in caplog.text

    def test_five_samples(self):
        d = _ds([np.arange(5.0)], np.arange(5.0))
        train, test = split_even_odd(d)
        np.testing.assert_array_equal(train.record_ids, [0, 2, 4])
        np.testing.assert_array_equal(test.record_ids, [1, 3])
        tr2, te2 = split_even_odd(d, swap=True)
        np.testing.assert_array_equal(tr2.record_ids, [1, 3])
        np.testing.assert_array_equal(te2.record_ids, [0, 2, 4])

    @given(st.integers(1, 60))
    def test_partition(self, n):
        d = _ds([np.arange(n, dtype=float)], np.zeros(n))
        train, test = split_even_odd(d)
        ids_tr, ids_te = set(train.record_ids), set(test.record_ids)
        assert ids_tr.isdisjoint(ids_te)
        assert ids_tr | ids_te == set(range(n))
        assert abs(len(train) - len(test)) <= 1


def test_deterministic_serialisation(mpg_csv, tmp_path):
    paths = []
    for i in range(2):
        d, _ = normalize_minmax(load_csv(mpg_csv, "mpg", "?", MPG_INPUTS))
        tr, _ = split_even_odd(d)
        paths.append(tmp_path / f"run{i}.csv")
        write_csv(paths[-1], tr)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_samples_view():
    d = _ds([[1.0, 2.0], [3.0, 4.0]], [5.0, 6.0])
    s = d.samples
    assert len(s) == 2 and s[1].target == 6.0
    np.testing.assert_array_equal(s[0].inputs, [1.0, 3.0])
