import json
import os
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maxvel.checkpoint import HEADER, load_checkpoint, read_header, save_checkpoint
from maxvel.config import parse_config
from maxvel.errors import CheckpointError, ConfigError
from maxvel.experiments import RunConfig, TimeSeries
from maxvel.grid import Field, make_grid
from maxvel.reporting import csv_columns, jsonable, read_csv, summarize_dir, write_csv, write_json

MINIMAL = "[experiment]\nname = maxvel\n"


# ------------------------------------------------------------ configuration


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.experiment == "maxvel"
    assert cfg.run == RunConfig(seed=cfg.run.seed)
    assert cfg.grid.n == 1024 and cfg.grid.radial
    assert cfg.potential is None
    assert cfg.estimate.R_values == (5.0, 10.0)


def test_config_values_are_parsed():
    cfg = parse_config(MINIMAL + "seed = 7\n[grid]\nn = 256\nL = 32\nradial = no\n"
                       "[potential]\nfamily = gaussian_well\ng = 0.3\n"
                       "[run]\nR = 1.2\na = 1.6\na_width = auto\n[estimate]\nshells = 0, 2\n"
                       "[maxvel]\na_values = 1.8; 2.2\n")
    assert cfg.grid.n == 256 and cfg.grid.L == 32.0 and not cfg.grid.radial
    assert cfg.potential.g == 0.3
    assert cfg.run.a == 1.6 and cfg.run.a_width is None and cfg.run.seed == 7
    assert cfg.estimate.shells == (0, 2)
    assert cfg.maxvel.a_values == (1.8, 2.2)


def test_threshold_ordering_error():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "[run]\nR = 2.0\na = 1.0\n")
    assert any("1 < R < a" in p for p in exc.value.problems)


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "[run]\npotental = 3\n")
    assert any("'potental'" in p for p in exc.value.problems)


def test_errors_are_aggregated():
    text = ("[experiment]\nname = warp\n[grid]\nn = 100\n[bogus]\nx = 1\n"
            "[potential]\ng = 1\n[estimate]\nvariant = nope\n[run]\neps = -1\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    probs = exc.value.problems
    for frag in ("warp", "power of two", "[bogus]", "without a family", "nope", "eps"):
        assert any(frag in p for p in probs), frag


def test_syntax_error():
    with pytest.raises(ConfigError):
        parse_config("no section header\n")


# ------------------------------------------------------------ checkpoints


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(1, 64, False), (1, 32, True), (2, 16, False)]))
def test_checkpoint_round_trip_is_bit_exact(tmp_path_factory, seed, shape):
    dim, n, radial = shape
    g = make_grid(dim, n, 8.0, radial=radial)
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    path = str(tmp_path_factory.mktemp("ck") / "f.phmv")
    save_checkpoint(Field(g, vals), 1.25, path)
    f, t = load_checkpoint(path)
    assert t == 1.25
    assert f.values.tobytes() == vals.astype(np.complex128).tobytes()
    assert f.grid.radial == radial and f.grid.shape == g.shape


def test_checkpoint_header(tmp_path):
    g = make_grid(1, 64, 8.0)
    path = str(tmp_path / "f.phmv")
    save_checkpoint(Field(g, np.ones(64)).momentum(), 2.0, path, precision=np.complex64)
    assert HEADER.size == 64
    assert os.path.getsize(path) == 64 + 64 * 8
    h = read_header(path)
    assert h["rep"] == "momentum" and h["dtype"] == np.complex64 and h["t"] == 2.0
    f, _ = load_checkpoint(path, grid=g)
    assert f.rep == "momentum"


def test_truncated_checkpoint(tmp_path):
    g = make_grid(1, 64, 8.0)
    path = str(tmp_path / "f.phmv")
    save_checkpoint(Field(g, np.ones(64)), 0.0, path)
    data = open(path, "rb").read()
    for cut in (10, 64 + 100):
        open(path, "wb").write(data[:cut])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)


def test_checkpoint_grid_mismatch_and_magic(tmp_path):
    g = make_grid(1, 64, 8.0)
    path = str(tmp_path / "f.phmv")
    save_checkpoint(Field(g, np.ones(64)), 0.0, path)
    with pytest.raises(CheckpointError, match="grid mismatch"):
        load_checkpoint(path, grid=make_grid(2, 64, 8.0))
    data = bytearray(open(path, "rb").read())
    data[:5] = b"XXXXX"
    open(path, "wb").write(bytes(data))
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)
    data[:5] = b"PHMV1"
    struct.pack_into("<H", data, 6, 9)
    open(path, "wb").write(bytes(data))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


# ------------------------------------------------------------ reporting


def _series():
    s = TimeSeries(np.array([1.0, 2.0, 4.0]))
    s.add("integrand", [0.1, 1 / 3, np.nan])
    s.add("shell10", [1, 2, 3])
    s.add("shell2", [4, 5, 6])
    s.add("cumulative", [0.0, 0.2, np.inf])
    s.add("extra", [7, 8, 9])
    return s


def test_csv_column_order():
    s = _series()
    assert csv_columns("prop-estimate", s) == ["t", "integrand", "cumulative", "extra", "shell10", "shell2"]
    for i in range(12):
        s.add(f"shell{i}", [i, i, i])
    cols = csv_columns("prop-estimate", s)
    assert cols == ["t", "integrand", "cumulative"] + [f"shell{i}" for i in range(12)] + ["extra"]


def test_csv_round_trip(tmp_path):
    s = _series()
    path = str(tmp_path / "a.csv")
    write_csv(path, "prop-estimate", s)
    back = read_csv(path)
    assert np.array_equal(back["t"], s.times)
    assert back["integrand"][1] == 1 / 3
    assert np.isnan(back["integrand"][2]) and np.isinf(back["cumulative"][2])
    text = open(path).read()
    assert "0.33333333333333331" in text
    write_csv(str(tmp_path / "b.csv"), "prop-estimate", s)
    assert open(str(tmp_path / "b.csv"), "rb").read() == open(path, "rb").read()


def test_json_helpers(tmp_path):
    rec = {"a": np.float64(1.5), "b": np.arange(3), "c": 1 + 2j, "d": float("nan"), "e": np.bool_(True)}
    out = jsonable(rec)
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": {"re": 1.0, "im": 2.0}, "d": "nan", "e": True}
    os.makedirs(tmp_path / "sub")
    write_json(str(tmp_path / "sub" / "s.json"), rec)
    (tmp_path / "broken.json").write_text("{")
    items = summarize_dir(str(tmp_path))
    assert any(it.get("record", {}).get("a") == 1.5 for it in items)
    assert any("error" in it for it in items)
    json.loads((tmp_path / "sub" / "s.json").read_text())
