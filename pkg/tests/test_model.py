import json

import numpy as np
import pytest

from gedraft.graphs import SplitMix64, generate_er, permute
from gedraft.model import (
    CheckpointError,
    ModelConfig,
    copy_params,
    forward,
    forward_pairs,
    init_params,
    load_checkpoint,
    params_equal,
    save_checkpoint,
)

CFG = ModelConfig(alphabet_size=3, hidden=8, layers=2, readout="gca", fusion="diffatt", seed=0)


def some_graphs(count, seed0=0):
    return [generate_er(4 + t % 3, 0.5, 3, seed=seed0 + t, gid=f"g{t}") for t in range(count)]


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(alphabet_size=0)
    with pytest.raises(ValueError):
        ModelConfig(alphabet_size=3, readout="nope")
    with pytest.raises(ValueError):
        ModelConfig(alphabet_size=3, fusion="nope")
    with pytest.raises(ValueError):
        ModelConfig(alphabet_size=3, temperature=-1.0)


def test_config_json_roundtrip_and_unknown_keys():
    doc = CFG.to_json()
    assert ModelConfig.from_json(doc) == CFG
    doc["mystery"] = 1
    with pytest.raises(ValueError, match="mystery"):
        ModelConfig.from_json(doc)


def test_fused_dim_per_variant():
    base = dict(alphabet_size=3, hidden=8, layers=2)
    assert ModelConfig(fusion="diffatt", **base).fused_dim == 3 * 16
    assert ModelConfig(fusion="abs", **base).fused_dim == 3 * 8
    assert ModelConfig(fusion="ntn", ntn_slices=4, **base).fused_dim == 3 * 4


def test_init_params_deterministic():
    assert params_equal(init_params(CFG), init_params(CFG))
    other = ModelConfig(**{**CFG.to_json(), "seed": 1})
    assert not params_equal(init_params(CFG), init_params(other))


def test_forward_deterministic_and_batched_consistent():
    params = init_params(CFG)
    gs = some_graphs(6)
    pairs = [(gs[0], gs[1]), (gs[2], gs[3]), (gs[4], gs[5]), (gs[0], gs[5])]
    batched = forward_pairs(pairs, params, CFG).values
    singles = [forward(a, b, params, CFG) for a, b in pairs]
    assert np.allclose(batched, singles, atol=1e-12)


def test_forward_permutation_invariance():
    params = init_params(CFG)
    rng = SplitMix64(9)
    g1, g2 = some_graphs(2, seed0=40)
    base = forward(g1, g2, params, CFG)
    for _ in range(5):
        pi = list(range(g1.n))
        rng.shuffle(pi)
        assert forward(permute(g1, pi), g2, params, CFG) == pytest.approx(base, rel=1e-8)


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    params = init_params(CFG)
    path = tmp_path / "ckpt.json"
    save_checkpoint(params, CFG, path)
    loaded, cfg, opt = load_checkpoint(path)
    assert cfg == CFG
    assert opt is None
    assert params_equal(params, loaded)


def test_checkpoint_optimizer_state_roundtrip(tmp_path):
    from gedraft.optim import Adam

    params = init_params(CFG)
    opt = Adam(params)
    state = opt.state_dict()
    state["m"]["regressor.W1"][:] = 0.125
    path = tmp_path / "ckpt.json"
    save_checkpoint(params, CFG, path, optimizer_state=state)
    _, _, loaded = load_checkpoint(path)
    assert loaded["step"] == 0
    assert np.array_equal(loaded["m"]["regressor.W1"], state["m"]["regressor.W1"])


def test_checkpoint_rejects_bad_version(tmp_path):
    path = tmp_path / "ckpt.json"
    save_checkpoint(init_params(CFG), CFG, path)
    doc = json.loads(path.read_text())
    doc["version"] = "0"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_checkpoint_rejects_missing_and_extra_params(tmp_path):
    path = tmp_path / "ckpt.json"
    save_checkpoint(init_params(CFG), CFG, path)
    doc = json.loads(path.read_text())
    moved = doc["params"].pop("regressor.W1")
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="regressor.W1"):
        load_checkpoint(path)
    doc["params"]["regressor.W1"] = moved
    doc["params"]["bogus"] = moved
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="bogus"):
        load_checkpoint(path)


def test_checkpoint_rejects_wrong_shape(tmp_path):
    path = tmp_path / "ckpt.json"
    save_checkpoint(init_params(CFG), CFG, path)
    doc = json.loads(path.read_text())
    doc["params"]["regressor.b3"]["shape"] = [2]
    doc["params"]["regressor.b3"]["values"] = [0.0, 0.0]
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="shape"):
        load_checkpoint(path)


def test_checkpoint_rejects_malformed_json(tmp_path):
    path = tmp_path / "ckpt.json"
    path.write_text("{not json")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_copy_params_is_deep():
    params = init_params(CFG)
    clone = copy_params(params)
    clone["regressor.b3"].values += 1.0
    assert not params_equal(params, clone)
