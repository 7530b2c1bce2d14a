import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoment.core import random_density, random_pure
from geoment.errors import BudgetError, StateFileError
from geoment.statefile import format_state, load_state, parse_state, save_state


@given(st.integers(0, 2**31 - 1), st.booleans())
def test_roundtrip_is_exact(seed, pure):
    rng = np.random.default_rng(seed)
    st_ = random_pure((2, 3), rng) if pure else random_density((2, 3), rng, 2)
    back = parse_state(format_state(st_))
    assert type(back) is type(st_) and back.dims == st_.dims
    a = back.amplitudes if pure else back.matrix
    b = st_.amplitudes if pure else st_.matrix
    assert np.array_equal(a, b)


def test_file_roundtrip(tmp_path):
    rho = random_density((2, 2), np.random.default_rng(0))
    save_state(rho, tmp_path / "s.json")
    assert np.array_equal(load_state(tmp_path / "s.json").matrix, rho.matrix)


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    json.dumps({"dims": [2], "kind": "pure"}),
    json.dumps({"dims": ["x"], "kind": "pure", "data": [[1, 0], [0, 0]]}),
    json.dumps({"dims": [2], "kind": "other", "data": [[1, 0], [0, 0]]}),
    json.dumps({"dims": [2], "kind": "pure", "data": [[1, 0], [1, 0]]}),
    json.dumps({"dims": [2], "kind": "pure", "data": [1, 0]}),
    json.dumps({"dims": [1], "kind": "pure", "data": [[1, 0]]}),
    json.dumps({"dims": [2], "kind": "mixed", "data": [[[1, 0], [1, 0]], [[0, 0], [0, 0]]]}),
])
def test_parse_errors(text):
    with pytest.raises(StateFileError):
        parse_state(text)


def test_normalize_flag():
    doc = json.dumps({"dims": [2], "kind": "pure", "data": [[3, 0], [4, 0]]})
    with pytest.raises(StateFileError):
        parse_state(doc)
    assert np.allclose(parse_state(doc, normalize=True).amplitudes, [0.6, 0.8])


def test_budget_error_passes_through():
    doc = json.dumps({"dims": [64, 64, 2], "kind": "pure", "data": []})
    with pytest.raises(BudgetError):
        parse_state(doc)


def test_missing_file(tmp_path):
    with pytest.raises(StateFileError):
        load_state(tmp_path / "nope.json")
