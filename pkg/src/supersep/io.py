"""JSON encoding of states, subspaces, ensembles and reports.

Complex numbers are written as ``[re, im]``; matrices as nested row-major
lists of those.  Python's float repr makes the encoding lossless.
"""

from __future__ import annotations

import dataclasses
import enum
import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError
from .states import DEFAULT_TOL, DensityOperator, PureState, Tolerances


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cmat(m) -> list:
    return [[_cplx(z) for z in row] for row in np.asarray(m)]


def state_to_json(s: PureState) -> dict:
    return {"d1": s.d1, "d2": s.d2, "coeffs": _cmat(s.coeffs)}


def subspace_to_json(basis, d1: int, d2: int, **extra) -> dict:
    return {"d1": d1, "d2": d2, "basis": [state_to_json(s) for s in basis], **extra}


def density_to_json(rho: DensityOperator) -> dict:
    return {"d1": rho.d1, "d2": rho.d2, "matrix": _cmat(rho.matrix)}


def to_jsonable(obj: Any) -> Any:
    """Recursively convert results (dataclasses, enums, states, arrays) to JSON data."""
    from .products import Subspace

    if isinstance(obj, enum.Enum):
        return obj.value
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _cplx(obj)
    if isinstance(obj, PureState):
        return state_to_json(obj)
    if isinstance(obj, DensityOperator):
        return density_to_json(obj)
    if isinstance(obj, Subspace):
        return subspace_to_json(obj.basis, obj.d1, obj.d2)
    if isinstance(obj, Tolerances):
        return obj.as_dict()
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.name != "tol"}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# parsing


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def _int(obj: dict, key: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ParseError(f"field {key!r} must be a positive integer")
    return v


def _parse_cmat(raw, rows: int, cols: int, what: str) -> np.ndarray:
    try:
        a = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{what} must be a nested list of [re, im] pairs") from None
    if a.shape != (rows, cols, 2):
        raise ParseError(f"{what} has shape {a.shape[:-1] if a.ndim else ()}, expected ({rows}, {cols})")
    return a[..., 0] + 1j * a[..., 1]


def _require(obj, keys, what):
    if not isinstance(obj, dict):
        raise ParseError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ParseError(f"{what} is missing field(s) {missing}")


def state_from_json(obj, tol: Tolerances = DEFAULT_TOL) -> PureState:
    _require(obj, ("d1", "d2", "coeffs"), "state")
    d1, d2 = _int(obj, "d1"), _int(obj, "d2")
    return PureState(d1, d2, _parse_cmat(obj["coeffs"], d1, d2, "coeffs"), tol)


def subspace_from_json(obj, tol: Tolerances = DEFAULT_TOL) -> tuple[list, int, int, dict]:
    """Returns (basis states, d1, d2, extra fields such as r_claimed)."""
    _require(obj, ("d1", "d2", "basis"), "subspace")
    d1, d2 = _int(obj, "d1"), _int(obj, "d2")
    if not isinstance(obj["basis"], list):
        raise ParseError("basis must be a list of states")
    basis = [state_from_json(s, tol) for s in obj["basis"]]
    if any(s.shape != (d1, d2) for s in basis):
        raise ParseError("basis state dimensions disagree with the subspace header")
    extra = {k: v for k, v in obj.items() if k not in ("d1", "d2", "basis")}
    return basis, d1, d2, extra


def density_from_json(obj, tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    _require(obj, ("d1", "d2", "matrix"), "density operator")
    d1, d2 = _int(obj, "d1"), _int(obj, "d2")
    return DensityOperator(_parse_cmat(obj["matrix"], d1 * d2, d1 * d2, "matrix"), d1, d2, tol)


def ensemble_to_json(ens) -> dict:
    out = []
    for w, op in ens.elements:
        key = "state" if isinstance(op, PureState) else "density"
        out.append({"weight": w, key: to_jsonable(op)})
    return {"elements": out}


def ensemble_from_json(obj, tol: Tolerances = DEFAULT_TOL):
    from .discrimination import Ensemble

    _require(obj, ("elements",), "ensemble")
    els = []
    for k, e in enumerate(obj["elements"]):
        if not isinstance(e, dict) or "weight" not in e:
            raise ParseError(f"ensemble element {k} needs a weight")
        if "state" in e:
            op = state_from_json(e["state"], tol)
        elif "density" in e:
            op = density_from_json(e["density"], tol)
        else:
            raise ParseError(f"ensemble element {k} needs a 'state' or 'density'")
        els.append((e["weight"], op))
    return Ensemble(tuple(els))
