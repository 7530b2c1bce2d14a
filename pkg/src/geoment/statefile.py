"""Text serialization of states: JSON with ``dims``, ``kind`` and ``data``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import DensityMatrix, PureState, State, check_budget
from .errors import BudgetError, DimensionError, GeomentError, InvalidStateError, StateFileError


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def state_to_dict(state: State) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "kind": "pure",
                "data": [_pair(z) for z in state.amplitudes]}
    return {"dims": list(state.dims), "kind": "mixed",
            "data": [[_pair(z) for z in row] for row in state.matrix]}


def format_state(state: State) -> str:
    # json writes floats with repr, i.e. 17 significant digits round-trip
    return json.dumps(state_to_dict(state)) + "\n"


def _complex(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.shape[-1] != 2:
        raise StateFileError("entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def parse_state(text: str, *, normalize: bool = False) -> State:
    """Parse a state document. Budget violations raise BudgetError, everything
    else StateFileError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not {"dims", "kind", "data"} <= doc.keys():
        raise StateFileError("state file needs fields dims, kind and data")
    try:
        dims = tuple(int(d) for d in doc["dims"])
    except (TypeError, ValueError):
        raise StateFileError("dims must be a list of integers") from None
    try:
        check_budget(dims)
    except BudgetError:
        raise
    except GeomentError as exc:
        raise StateFileError(str(exc)) from None
    kind = doc["kind"]
    try:
        data = _complex(doc["data"])
        if kind == "pure":
            return PureState.from_vector(dims, data, normalize=normalize)
        if kind == "mixed":
            return DensityMatrix.from_matrix(dims, data, normalize=normalize)
    except (ValueError, TypeError, DimensionError, InvalidStateError) as exc:
        raise StateFileError(f"invalid state data: {exc}") from None
    raise StateFileError(f"unknown kind {kind!r}")


def load_state(path: str | Path, *, normalize: bool = False) -> State:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_state(text, normalize=normalize)


def save_state(state: State, path: str | Path) -> None:
    Path(path).write_text(format_state(state))
