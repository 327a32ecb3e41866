import numpy as np
import pytest

from stablema.io import parse_meta_line, read_path_csv, read_table, write_path_csv, write_table
from stablema.kernels import gaussian2d, triangular
from stablema.rng import RngStream, StableLaw
from stablema.simulate import simulate_ma_1d, simulate_ma_2d


def test_path_roundtrip(tmp_path):
    p = simulate_ma_1d(triangular(), StableLaw(1.3), 100, 0.05, rng=RngStream(8))
    out = write_path_csv(p, tmp_path / "p.csv")
    head = out.read_text().splitlines()[0]
    assert head == "# n=100 delta=0.050000000000000003 alpha=1.3 kernel=triangular seed=8"
    back = read_path_csv(out)
    assert np.array_equal(back.values, p.values) and back.delta == p.delta and back.alpha == 1.3


def test_field_roundtrip(tmp_path):
    f = simulate_ma_2d(gaussian2d(), StableLaw(1.8), 12, 0.2, 1.0, RngStream(2))
    back = read_path_csv(write_path_csv(f, tmp_path / "f.csv"))
    assert np.array_equal(back.values, f.values)


def test_table_roundtrip(tmp_path):
    cols = {"a": np.array([0.1, 1 / 3, -2e-300]), "b": np.array([np.pi, np.e, 1e300])}
    meta, back = read_table(write_table(tmp_path / "t.csv", cols, ["x=1 y=two"]))
    assert meta == ["x=1 y=two"]
    assert all(np.array_equal(cols[k], back[k]) for k in cols)


def test_meta_parsing():
    assert parse_meta_line("# a=1 b='x y' c") == {"a": "1", "b": "x y"}


def test_bad_path_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# n=3 delta=0.1\n1\n2\n")
    with pytest.raises(ValueError):
        read_path_csv(bad)
    with pytest.raises(OSError, match="missing.csv"):
        read_path_csv(tmp_path / "missing.csv")
