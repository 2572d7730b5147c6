"""Dense real vectors and matrices shaped by types.

A type denotes a real vector space: 2 denotes R^2 and t1 -o t2 denotes
the dim(t2) x dim(t1) matrices. A Tensor pairs a float64 array with the
type whose denotation it inhabits. vec flattens a matrix column-major
(beta_{i+m(j-1)} = alpha_{ij}) and reshape is its inverse, so function
application is an ordinary matrix-vector product on vec'd arguments.
"""

from __future__ import annotations

import json

import numpy as np

from .syntax import Bool, Lolli, Type


def dim(t: Type) -> int:
    """dim(2) = 2; dim(t1 -o t2) = dim(t1) * dim(t2)."""
    match t:
        case Bool():
            return 2
        case Lolli(domain, codomain):
            return dim(domain) * dim(codomain)
    raise AssertionError(f"unknown type {t!r}")


def shape_of(t: Type) -> tuple[int, int]:
    """Bool -> (2, 1); t1 -o t2 -> (dim(t2), dim(t1))."""
    match t:
        case Bool():
            return (2, 1)
        case Lolli(domain, codomain):
            return (dim(codomain), dim(domain))
    raise AssertionError(f"unknown type {t!r}")


class Tensor:
    """Immutable float64 array inhabiting a type's denotation."""

    __slots__ = ("cajal_type", "array")

    def __init__(self, cajal_type: Type, array):
        a = np.asarray(array, dtype=np.float64)
        expected = shape_of(cajal_type)
        if a.shape != expected:
            raise ValueError(f"shape {a.shape} does not match {cajal_type} "
                             f"(expected {expected})")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "cajal_type", cajal_type)
        object.__setattr__(self, "array", a)

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return self.array.shape

    @property
    def data(self) -> list[float]:
        """Row-major flat copy of the entries."""
        return [float(x) for x in self.array.reshape(-1, order="C")]

    def __repr__(self) -> str:
        return f"Tensor({self.cajal_type}, {self.array.tolist()})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Tensor)
                and self.cajal_type == other.cajal_type
                and np.array_equal(self.array, other.array))

    def to_json(self) -> str:
        from .parser import parse_type  # round-trip guard at import site
        payload = {
            "type": str(self.cajal_type),
            "shape": list(self.array.shape),
            "data_row_major": [[float(x) for x in row] for row in self.array],
        }
        assert parse_type(payload["type"]) == self.cajal_type
        return json.dumps(payload, separators=(", ", ": "))

    @staticmethod
    def from_json(text: str) -> "Tensor":
        from .parser import parse_type
        payload = json.loads(text)
        t = parse_type(payload["type"])
        a = np.array(payload["data_row_major"], dtype=np.float64)
        if list(a.shape) != payload["shape"]:
            raise ValueError(f"declared shape {payload['shape']} does not match "
                             f"data shape {list(a.shape)}")
        return Tensor(t, a)


# A target environment maps names to tensors.
TargetEnv = dict[str, Tensor]


def vec(m) -> np.ndarray:
    """Column-major flatten to a length-dim vector (a 1-D array).

    Accepts a Tensor or any array-like matrix.
    """
    a = m.array if isinstance(m, Tensor) else np.asarray(m, dtype=np.float64)
    return a.reshape(-1, order="F")


def reshape(v, t: Type) -> Tensor:
    """Inverse of vec: rebuild the type-shaped tensor from a flat vector."""
    a = np.asarray(v, dtype=np.float64).reshape(-1)
    if a.size != dim(t):
        raise ValueError(f"vector of length {a.size} cannot inhabit {t} "
                         f"(dim {dim(t)})")
    return Tensor(t, a.reshape(shape_of(t), order="F"))


def basis(t: Type) -> list[Tensor]:
    """Standard basis of the denotation, ordered by vec position."""
    n = dim(t)
    return [reshape(np.eye(n)[:, k], t) for k in range(n)]


def matmul_typed(f: Tensor, a: Tensor) -> Tensor:
    """Apply a function tensor to an argument tensor of its domain type."""
    if not isinstance(f.cajal_type, Lolli):
        raise TypeError(f"cannot apply tensor of type {f.cajal_type}")
    if f.cajal_type.domain != a.cajal_type:
        raise TypeError(f"argument type {a.cajal_type} does not match "
                        f"domain {f.cajal_type.domain}")
    return reshape(f.array @ vec(a), f.cajal_type.codomain)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.cajal_type != b.cajal_type:
        raise TypeError(f"cannot add {a.cajal_type} and {b.cajal_type}")
    return Tensor(a.cajal_type, a.array + b.array)


def scale(c: float, a: Tensor) -> Tensor:
    return Tensor(a.cajal_type, c * a.array)


def zeros(t: Type) -> Tensor:
    return Tensor(t, np.zeros(shape_of(t)))


def approx_eq(a: Tensor, b: Tensor, tol: float = 1e-9) -> bool:
    if a.cajal_type != b.cajal_type:
        return False
    return float(np.max(np.abs(a.array - b.array))) <= tol
