"""JSON wire formats.

Complex numbers are ``[re, im]`` pairs; plain real numbers are accepted on input.

* function:  ``{"weights": [...], "values": [[re, im], ...]}``
* operator:  ``{"n": 2, "entries": [[[re, im], ...], ...], "weights": [...]}``
  (``weights`` optional, a bare nested list is also accepted)
* multiplication operator: ``{"symbol": [...]}`` or a bare list
"""
from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .errors import InputError
from .measure import MeasurableFunction, MeasureSpace
from .operators import MatrixOperator, MultiplicationOperator


def _scalar(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InputError(f"complex numbers are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"expected a number, got {x!r}")
    return complex(float(x))


def complex_vector(data) -> np.ndarray:
    if not isinstance(data, (list, tuple)):
        raise InputError("expected a JSON array of numbers")
    return np.array([_scalar(x) for x in data], dtype=complex)


def complex_matrix(rows) -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise InputError("expected a non-empty JSON array of rows")
    mat = [complex_vector(r) for r in rows]
    n = len(mat)
    if any(r.size != n for r in mat):
        raise InputError("operator entries must form a square matrix")
    return np.array(mat)


def vector_to_json(values) -> list:
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in np.asarray(values, dtype=complex)]


def space_from_weights(weights, n: int) -> MeasureSpace:
    if weights is None:
        return MeasureSpace.counting(n)
    w = [float(x) for x in weights]
    if len(w) != n:
        raise InputError(f"expected {n} weights, got {len(w)}")
    return MeasureSpace(w)


def matrix_from_json(data, weights=None) -> MatrixOperator:
    if isinstance(data, dict):
        if "entries" not in data:
            raise InputError("operator JSON needs an 'entries' field")
        a = complex_matrix(data["entries"])
        if "n" in data and int(data["n"]) != a.shape[0]:
            raise InputError(f"'n' is {data['n']} but entries are {a.shape[0]}x{a.shape[0]}")
        if weights is None:
            weights = data.get("weights")
    else:
        a = complex_matrix(data)
    return MatrixOperator(space_from_weights(weights, a.shape[0]), a)


def matrix_to_json(A: MatrixOperator) -> dict:
    return {"n": A.n, "entries": [vector_to_json(r) for r in A.entries],
            "weights": A.space.weights.tolist()}


def function_from_json(data, space: Optional[MeasureSpace] = None) -> MeasurableFunction:
    if isinstance(data, dict):
        vals = complex_vector(data.get("values", []))
        if space is None:
            space = space_from_weights(data.get("weights"), vals.size)
    else:
        vals = complex_vector(data)
        if space is None:
            space = MeasureSpace.counting(vals.size)
    return MeasurableFunction(space, vals)


def function_to_json(f: MeasurableFunction) -> dict:
    return {"weights": f.space.weights.tolist(), "values": vector_to_json(f.values)}


def multiplication_from_json(data, space: MeasureSpace) -> MultiplicationOperator:
    sym = data.get("symbol") if isinstance(data, dict) else data
    if sym is None:
        raise InputError("multiplication operator JSON needs a 'symbol' field")
    return MultiplicationOperator(space, complex_vector(sym))


def multiplication_to_json(D: MultiplicationOperator) -> dict:
    return {"symbol": vector_to_json(D.symbol)}


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
