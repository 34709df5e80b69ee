import json

import numpy as np
import pytest

from vlcnoise import ChannelParams, DataError, NoiseComponent, NoiseRecipe, OokPattern
from vlcnoise.dataset import build_dataset, load_dataset, make_pair, save_dataset, sub_seed

PATTERN = OokPattern(1e-3, 4e-3, 1.0, 0.0, 1)
RECIPE = NoiseRecipe((NoiseComponent(0.0, 0.15), NoiseComponent(2.0, 0.005)), 256)


def test_sub_seed_stable_and_distinct():
    assert sub_seed(7, 3) == sub_seed(7, 3)
    seeds = {sub_seed(7, i) for i in range(100)} | {sub_seed(8, i) for i in range(100)}
    assert len(seeds) == 200
    assert all(0 <= s < 2 ** 63 for s in seeds)


def test_pair_shapes_and_range():
    noisy, clean = make_pair(PATTERN, RECIPE, ChannelParams(), 256, 10_000.0, seed=1)
    assert len(noisy) == len(clean) == 256
    for ts in (noisy, clean):
        assert ts.samples.min() == 0.0 and ts.samples.max() == 1.0
    assert set(np.unique(clean.samples)) == {0.0, 1.0}
    # 1 ms on / 4 ms off at 10 kHz: a fifth of the samples are on, up to phase
    assert abs(clean.samples.mean() - 0.2) < 0.05


def test_input_shorter_than_period():
    with pytest.raises(DataError):
        make_pair(PATTERN, RECIPE, ChannelParams(), 30, 10_000.0, seed=1)


def test_build_deterministic_and_varied():
    a = build_dataset(20, PATTERN, RECIPE, 256, 10_000.0, seed=5)
    b = build_dataset(20, PATTERN, RECIPE, 256, 10_000.0, seed=5)
    assert np.array_equal(a.noisy, b.noisy) and np.array_equal(a.clean, b.clean)
    assert not np.array_equal(a.noisy[0], a.noisy[1])
    c = build_dataset(20, PATTERN, RECIPE, 256, 10_000.0, seed=6)
    assert not np.array_equal(a.noisy, c.noisy)


def test_prefix_stable_under_count():
    a = build_dataset(3, PATTERN, RECIPE, 256, 10_000.0, seed=5)
    b = build_dataset(6, PATTERN, RECIPE, 256, 10_000.0, seed=5)
    assert np.array_equal(a.noisy, b.noisy[:3])


def test_single_pair_and_count_zero():
    assert len(build_dataset(1, PATTERN, RECIPE, 256, 10_000.0)) == 1
    with pytest.raises(DataError):
        build_dataset(0, PATTERN, RECIPE, 256, 10_000.0)


def test_round_trip(tmp_path):
    ds = build_dataset(4, PATTERN, RECIPE, 128, 10_000.0, seed=2, label="desk")
    save_dataset(ds, tmp_path / "d")
    back = load_dataset(tmp_path / "d")
    assert np.array_equal(back.noisy, ds.noisy) and np.array_equal(back.clean, ds.clean)
    assert back.labels == ["desk"] * 4
    assert back.sample_rate_hz == 10_000.0
    assert back.metadata == json.loads(json.dumps(ds.metadata))
    noisy, clean = back.pair(2)
    assert noisy.label == "desk" and len(clean) == 128


def test_load_errors(tmp_path):
    with pytest.raises(DataError, match="manifest"):
        load_dataset(tmp_path)
    ds = build_dataset(2, PATTERN, RECIPE, 128, 10_000.0)
    save_dataset(ds, tmp_path / "d")
    m = json.loads((tmp_path / "d" / "manifest.json").read_text())
    m["format_version"] = 42
    (tmp_path / "d" / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(DataError, match="version"):
        load_dataset(tmp_path / "d")
