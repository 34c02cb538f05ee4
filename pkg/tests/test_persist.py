import re

import numpy as np
import pytest

from chebiv import domain as dm
from chebiv.bs import normalized_call
from chebiv.engine import invert_batch
from chebiv.errors import ModelFormatError, ModelVersionError
from chebiv.persist import dumps, load_model, loads, save_model


def sample(n=10_000, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-5, 0, n)
    v = dm.v_min(x) + rng.uniform(0, 1, n) * (6 - dm.v_min(x))
    return x, normalized_call(x, v)


def test_round_trip_bit_identical(any_model, tmp_path):
    path = tmp_path / "m.chebiv"
    save_model(any_model, path)
    back = load_model(path)
    x, c = sample()
    assert np.array_equal(invert_batch(any_model, x, c).v, invert_batch(back, x, c).v)
    assert back.preset == any_model.preset and back.curves == any_model.curves
    assert back.footprint() == any_model.footprint()
    assert dumps(back) == dumps(any_model)


def test_header_and_text(model_low):
    text = dumps(model_low)
    assert text.startswith("CHEB-IV v1\n")
    assert text.endswith("END\n")


def test_truncated(model_low, tmp_path):
    text = dumps(model_low)
    for cut in (10, len(text) // 2, len(text) - 5):
        with pytest.raises(ModelFormatError):
            loads(text[:cut])


def test_version_mismatch(model_low):
    text = dumps(model_low).replace("CHEB-IV v1", "CHEB-IV v7", 1)
    with pytest.raises(ModelVersionError, match="expected v1, found v7"):
        loads(text)


def test_bad_magic_and_fields(model_low):
    with pytest.raises(ModelFormatError):
        loads("hello\n{}\nEND\n")
    with pytest.raises(ModelFormatError, match="missing field"):
        loads('CHEB-IV v1\n{"kind": "black-scholes"}\nEND\n')
    text = dumps(model_low)
    broken = re.sub(r'"(0x[0-9a-f.p+-]+)"', '"zz"', text, count=1)
    with pytest.raises(ModelFormatError):
        loads(broken)


def test_laplace_round_trip(laplace50, tmp_path):
    from chebiv.laplace import laplace_invert, laplace_normalized_call

    path = tmp_path / "l.chebiv"
    save_model(laplace50, path)
    back = load_model(path)
    x = np.linspace(-0.4, 0, 1000)
    c = laplace_normalized_call(x, 0.6)
    assert np.array_equal(laplace_invert(back, x, c).v, laplace_invert(laplace50, x, c).v)


def test_atomic_write_leaves_no_temp(model_low, tmp_path):
    path = tmp_path / "m.chebiv"
    save_model(model_low, path)
    save_model(model_low, path)
    assert [p.name for p in tmp_path.iterdir()] == ["m.chebiv"]
