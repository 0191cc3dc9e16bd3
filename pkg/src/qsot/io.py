"""JSON wire formats for channels and states.

Complex numbers are ``[re, im]`` pairs (plain reals are also accepted on
input); matrices are row-major nested lists.

A channel file describes a linear map ``φ: domain_shape -> codomain_shape``::

    {"picture": "heisenberg" | "schrodinger",
     "domain_shape": [2], "codomain_shape": [2],
     "representation": "superoperator" | "kraus" | "channel_density",
     "data": ...}

* ``superoperator``: ``data[x][y]`` is the ``m_x² × n_y²`` block of ``φ`` in
  row-major matrix-unit coordinates.
* ``kraus``: a list of ``codomain.dim × domain.dim`` operators, ``φ(X) = Σ K X K†``
  (compressed onto the block structure).
* ``channel_density``: the dense matrix ``D[φ]`` on ``codomain ⊗ domain``.

A ``schrodinger`` φ is converted to the Heisenberg map ``F = φ*`` on load, so
``F`` then runs ``codomain_shape -> domain_shape``.

A state is either a preset string (``"maximally_mixed"``, ``"diag:p=0.3"``,
``"diag:0.2,0.3,0.5"``), or ``{"shape": [...], "density": matrix}``, or
``{"preset": ..., "shape": [...]}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, ShapeMismatchError, identity
from .cj import ChannelDensity, cj_inverse
from .experiments import AnomalyError
from .linmap import LinearMap, functional_of, hs_adjoint, kraus_map

PICTURES = ("heisenberg", "schrodinger")
REPRESENTATIONS = ("superoperator", "kraus", "channel_density")


class ParseError(ValueError):
    """Malformed input file (bad JSON or bad field values)."""


# complex arrays


def _to_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ParseError(f"{where}: booleans are not numbers")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {value!r}")


def decode_matrix(data, where: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError(f"{where}: expected a non-empty list of rows")
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise ParseError(f"{where}: ragged rows")
    return np.array(
        [[_to_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(data)],
        dtype=complex,
    )


def _require_finite(a: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise AnomalyError(f"{where}: non-finite entries")
    return a


def encode_complex(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def encode_matrix(a: np.ndarray) -> list:
    a = np.asarray(a)
    if a.ndim == 1:
        return [encode_complex(z) for z in a]
    return [encode_matrix(row) for row in a]


def encode_element(e: AlgebraElement) -> dict:
    return {"shape": list(e.shape.blocks), "blocks": [encode_matrix(b) for b in e.blocks]}


# loading


def loads_json(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return loads_json(text, str(path))


def _shape_field(spec: dict, key: str) -> AlgebraShape:
    value = spec.get(key)
    if not isinstance(value, list) or not value or not all(
        isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in value
    ):
        raise ParseError(f"{key}: expected a non-empty list of positive integers")
    return AlgebraShape(tuple(value))


def _dense_to_element(shape: AlgebraShape, mat: np.ndarray, where: str) -> AlgebraElement:
    if mat.shape != (shape.dim, shape.dim):
        raise ShapeMismatchError(f"{where}: expected {shape.dim}x{shape.dim}, got {mat.shape[0]}x{mat.shape[1]}")
    elem = AlgebraElement.from_dense(shape, mat)
    leak = float(np.abs(elem.to_dense() - mat).max())
    if leak > 0:
        raise ShapeMismatchError(f"{where}: nonzero entries outside the blocks of {shape.blocks} (max {leak:.3e})")
    return elem


@dataclass(frozen=True)
class ChannelSpec:
    picture: str
    domain_shape: AlgebraShape
    codomain_shape: AlgebraShape
    representation: str
    data: Any

    @classmethod
    def from_dict(cls, spec) -> "ChannelSpec":
        if not isinstance(spec, dict):
            raise ParseError("channel spec must be a JSON object")
        picture = spec.get("picture", "heisenberg")
        if picture not in PICTURES:
            raise ParseError(f"picture must be one of {PICTURES}, got {picture!r}")
        rep = spec.get("representation")
        if rep not in REPRESENTATIONS:
            raise ParseError(f"representation must be one of {REPRESENTATIONS}, got {rep!r}")
        if "data" not in spec:
            raise ParseError("missing field 'data'")
        return cls(picture, _shape_field(spec, "domain_shape"), _shape_field(spec, "codomain_shape"), rep, spec["data"])

    def described_map(self) -> LinearMap:
        """The map ``φ`` exactly as written (before any picture conversion)."""
        dom, cod = self.domain_shape, self.codomain_shape
        if self.representation == "superoperator":
            rows = self.data
            if not isinstance(rows, list) or len(rows) != len(cod.blocks) or not all(
                isinstance(r, list) and len(r) == len(dom.blocks) for r in rows
            ):
                raise ShapeMismatchError(
                    f"superoperator data must be a {len(cod.blocks)}x{len(dom.blocks)} grid of components"
                )
            comps = [[_require_finite(decode_matrix(c, f"data[{x}][{y}]"), f"data[{x}][{y}]") for y, c in enumerate(r)] for x, r in enumerate(rows)]
            for x, m in enumerate(cod.blocks):
                for y, n in enumerate(dom.blocks):
                    if comps[x][y].shape != (m * m, n * n):
                        raise ShapeMismatchError(
                            f"component ({x},{y}) should be {m * m}x{n * n}, got {comps[x][y].shape}"
                        )
            return LinearMap.from_components(dom, cod, comps)
        if self.representation == "kraus":
            if not isinstance(self.data, list) or not self.data:
                raise ParseError("kraus data must be a non-empty list of matrices")
            ks = [_require_finite(decode_matrix(k, f"data[{t}]"), f"data[{t}]") for t, k in enumerate(self.data)]
            for t, k in enumerate(ks):
                if k.shape != (cod.dim, dom.dim):
                    raise ShapeMismatchError(f"Kraus operator {t} should be {cod.dim}x{dom.dim}, got {k.shape}")
            return kraus_map(ks, dom, cod)
        dense = _require_finite(decode_matrix(self.data, "data"), "data")
        d = _dense_to_element(cod.tensor(dom), dense, "channel density")
        return cj_inverse(ChannelDensity(d, dom, cod))

    def to_linear_map(self) -> LinearMap:
        """Heisenberg-picture map ``F``."""
        phi = self.described_map()
        return hs_adjoint(phi) if self.picture == "schrodinger" else phi


def parse_channel(spec) -> LinearMap:
    return ChannelSpec.from_dict(spec).to_linear_map()


def load_channel(path) -> LinearMap:
    return parse_channel(load_json(path))


_DIAG_P = re.compile(r"^diag:p=(.+)$")
_DIAG_LIST = re.compile(r"^diag:(.+)$")


def preset_density(name: str, shape) -> AlgebraElement:
    shape = AlgebraShape.of(shape)
    if name == "maximally_mixed":
        return identity(shape) / shape.dim
    m = _DIAG_P.match(name)
    if m:
        try:
            p = float(m.group(1))
        except ValueError as exc:
            raise ParseError(f"bad preset {name!r}") from exc
        if shape.dim != 2:
            raise ShapeMismatchError(f"preset {name!r} needs a 2-dimensional algebra, got {shape.blocks}")
        diag = [p, 1.0 - p]
    else:
        m = _DIAG_LIST.match(name)
        if not m:
            raise ParseError(f"unknown state preset {name!r}")
        try:
            diag = [float(v) for v in m.group(1).split(",")]
        except ValueError as exc:
            raise ParseError(f"bad preset {name!r}") from exc
        if len(diag) != shape.dim:
            raise ShapeMismatchError(f"preset {name!r} has {len(diag)} entries for dimension {shape.dim}")
    return AlgebraElement.from_dense(shape, np.diag(np.array(diag, dtype=complex)))


def parse_state(spec, default_shape=None) -> LinearMap:
    """Functional from a preset string or a state object; presets need a shape."""
    if isinstance(spec, str):
        if default_shape is None:
            raise ParseError("a preset state needs a shape")
        return functional_of(preset_density(spec, default_shape))
    if not isinstance(spec, dict):
        raise ParseError("state spec must be a preset string or a JSON object")
    shape = _shape_field(spec, "shape") if "shape" in spec else (
        AlgebraShape.of(default_shape) if default_shape is not None else None
    )
    if shape is None:
        raise ParseError("state spec needs a 'shape'")
    if "preset" in spec:
        if not isinstance(spec["preset"], str):
            raise ParseError("preset must be a string")
        return functional_of(preset_density(spec["preset"], shape))
    if "density" not in spec:
        raise ParseError("state spec needs 'density' or 'preset'")
    dense = _require_finite(decode_matrix(spec["density"], "density"), "density")
    return functional_of(_dense_to_element(shape, dense, "density"))


def load_state(source, default_shape=None) -> LinearMap:
    """``source`` is a path to a JSON state file or a preset string."""
    path = Path(source)
    if path.exists():
        return parse_state(load_json(path), default_shape)
    if isinstance(source, str) and (source == "maximally_mixed" or source.startswith("diag:")):
        return parse_state(source, default_shape)
    raise ParseError(f"{source}: no such file and not a state preset")


def load_effects(path) -> tuple[np.ndarray, np.ndarray]:
    spec = load_json(path)
    if not isinstance(spec, dict) or "M" not in spec or "N" not in spec:
        raise ParseError("effects file needs fields 'M' and 'N'")
    m, n = decode_matrix(spec["M"], "M"), decode_matrix(spec["N"], "N")
    for name, e in (("M", m), ("N", n)):
        if e.shape != (2, 2):
            raise ShapeMismatchError(f"effect {name} must be 2x2, got {e.shape}")
    return m, n


def channel_to_dict(f: LinearMap) -> dict:
    """Heisenberg superoperator spec of ``f`` (inverse of :func:`parse_channel`)."""
    return {
        "picture": "heisenberg",
        "domain_shape": list(f.domain.blocks),
        "codomain_shape": list(f.codomain.blocks),
        "representation": "superoperator",
        "data": [
            [encode_matrix(f.component(x, y)) for y in range(len(f.domain.blocks))]
            for x in range(len(f.codomain.blocks))
        ],
    }


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"
