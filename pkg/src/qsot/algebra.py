"""Multi-matrix algebras and their elements.

An algebra ``⊕_x M_{m_x}(C)`` is described by an :class:`AlgebraShape`, the
ordered tuple of block sizes ``(m_1, ..., m_k)``.  Elements are stored as one
dense complex ``m_x × m_x`` array per block.

Coordinate conventions (used by every superoperator downstream):

* a block is vectorized row-major, so matrix unit ``E_ij`` of block ``x`` sits
  at offset ``offset_x + i*m_x + j``;
* the vector of an element is the concatenation of its block vectors;
* ``A ⊗ B`` has blocks ``m_x * n_y`` in lexicographic ``(x, y)`` order and each
  block is the Kronecker product ``a_x ⊗ b_y``.

With these conventions ``(A⊗B)⊗C`` and ``A⊗(B⊗C)`` have identical coordinates,
so re-association is free.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from ._tol import resolve_tol


class ShapeMismatchError(ValueError):
    """Raised when operands live in different (or incompatible) algebras."""


@dataclass(frozen=True)
class AlgebraShape:
    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(m) for m in self.blocks)
        if not blocks:
            raise ValueError("an algebra shape needs at least one block")
        if any(m < 1 for m in blocks):
            raise ValueError(f"block dimensions must be >= 1, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, spec) -> "AlgebraShape":
        """Coerce an int, a sequence of ints or a shape into an AlgebraShape."""
        if isinstance(spec, AlgebraShape):
            return spec
        if isinstance(spec, (int, np.integer)):
            return cls((int(spec),))
        return cls(tuple(spec))

    @property
    def dim(self) -> int:
        """Dimension of the underlying Hilbert space, ``Σ m_x``."""
        return sum(self.blocks)

    @property
    def vdim(self) -> int:
        """Vector-space dimension of the algebra, ``Σ m_x²``."""
        return sum(m * m for m in self.blocks)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for m in self.blocks:
            out.append(acc)
            acc += m * m
        return tuple(out)

    @property
    def is_matrix_algebra(self) -> bool:
        return len(self.blocks) == 1

    def block_slice(self, x: int) -> slice:
        off = self.offsets[x]
        return slice(off, off + self.blocks[x] ** 2)

    def tensor(self, other: "AlgebraShape") -> "AlgebraShape":
        return AlgebraShape(tuple(m * n for m, n in product(self.blocks, other.blocks)))

    def __str__(self):
        return "⊕".join(f"M{m}" for m in self.blocks)


SCALARS = AlgebraShape((1,))


@dataclass(frozen=True)
class TensorShape:
    """A product shape remembering its two factors."""

    left: AlgebraShape
    right: AlgebraShape

    @property
    def product(self) -> AlgebraShape:
        return self.left.tensor(self.right)

    def block_index(self, x: int, y: int) -> int:
        return x * len(self.right.blocks) + y


def _as_block(arr, m: int) -> np.ndarray:
    a = np.array(arr, dtype=complex)
    if a.shape != (m, m):
        raise ShapeMismatchError(f"expected a {m}x{m} block, got {a.shape}")
    a.setflags(write=False)
    return a


class AlgebraElement:
    """Immutable element of a multi-matrix algebra."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape, blocks: Sequence):
        shape = AlgebraShape.of(shape)
        blocks = list(blocks)
        if len(blocks) != len(shape.blocks):
            raise ShapeMismatchError(
                f"shape {shape.blocks} needs {len(shape.blocks)} blocks, got {len(blocks)}"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(
            self, "blocks", tuple(_as_block(b, m) for b, m in zip(blocks, shape.blocks))
        )

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    # constructors

    @classmethod
    def from_matrix(cls, matrix) -> "AlgebraElement":
        """Single-block element from a square matrix."""
        a = np.asarray(matrix)
        return cls((a.shape[0],), [a])

    @classmethod
    def from_vec(cls, shape, vec) -> "AlgebraElement":
        shape = AlgebraShape.of(shape)
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (shape.vdim,):
            raise ShapeMismatchError(f"expected vector of length {shape.vdim}, got {vec.shape}")
        return cls(shape, [vec[shape.block_slice(x)].reshape(m, m) for x, m in enumerate(shape.blocks)])

    @classmethod
    def from_dense(cls, shape, matrix) -> "AlgebraElement":
        """Compress a ``dim × dim`` matrix onto the diagonal blocks of ``shape``."""
        shape = AlgebraShape.of(shape)
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (shape.dim, shape.dim):
            raise ShapeMismatchError(f"expected {shape.dim}x{shape.dim} matrix, got {matrix.shape}")
        blocks, start = [], 0
        for m in shape.blocks:
            blocks.append(matrix[start:start + m, start:start + m])
            start += m
        return cls(shape, blocks)

    # views

    def vec(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    def to_dense(self) -> np.ndarray:
        """Block-diagonal ``dim × dim`` matrix."""
        out = np.zeros((self.shape.dim, self.shape.dim), dtype=complex)
        start = 0
        for b in self.blocks:
            m = b.shape[0]
            out[start:start + m, start:start + m] = b
            start += m
        return out

    @property
    def matrix(self) -> np.ndarray:
        """The single block of an element of a full matrix algebra."""
        if len(self.blocks) != 1:
            raise ShapeMismatchError("matrix is only defined for single-block shapes")
        return self.blocks[0]

    # arithmetic

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeMismatchError(f"shape mismatch: {self.shape.blocks} vs {other.shape.blocks}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.shape, [-a for a in self.blocks])

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            raise TypeError("use @ (or multiply) for the algebra product")
        return AlgebraElement(self.shape, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        return multiply(self, other)

    def dagger(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [a.conj().T for a in self.blocks])

    def norm(self) -> float:
        """Max-abs entry norm, used for all violation measurements."""
        return max(float(np.abs(b).max()) for b in self.blocks)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and (self - other).norm() <= atol

    def __repr__(self):
        return f"AlgebraElement({self.shape}, {[b.tolist() for b in self.blocks]})"


def identity(shape) -> AlgebraElement:
    shape = AlgebraShape.of(shape)
    return AlgebraElement(shape, [np.eye(m) for m in shape.blocks])


def zeros(shape) -> AlgebraElement:
    shape = AlgebraShape.of(shape)
    return AlgebraElement(shape, [np.zeros((m, m)) for m in shape.blocks])


def matrix_unit(shape, x: int, i: int, j: int) -> AlgebraElement:
    """``E_ij`` placed in block ``x`` (zero elsewhere)."""
    shape = AlgebraShape.of(shape)
    vec = np.zeros(shape.vdim, dtype=complex)
    vec[shape.offsets[x] + i * shape.blocks[x] + j] = 1.0
    return AlgebraElement.from_vec(shape, vec)


def basis(shape) -> Iterator[AlgebraElement]:
    """Matrix units in vectorization order."""
    shape = AlgebraShape.of(shape)
    for x, m in enumerate(shape.blocks):
        for i in range(m):
            for j in range(m):
                yield matrix_unit(shape, x, i, j)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot multiply {a.shape.blocks} by {b.shape.blocks}")
    return AlgebraElement(a.shape, [x @ y for x, y in zip(a.blocks, b.blocks)])


def trace(a: AlgebraElement) -> complex:
    """Unnormalized trace, ``Σ_x tr(a_x)``."""
    return complex(sum(np.trace(b) for b in a.blocks))


def tensor(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    shape = a.shape.tensor(b.shape)
    return AlgebraElement(shape, [np.kron(x, y) for x, y in product(a.blocks, b.blocks)])


def hs_inner(a: AlgebraElement, b: AlgebraElement) -> complex:
    """Hilbert–Schmidt pairing ``tr(a† b)``."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot pair {a.shape.blocks} with {b.shape.blocks}")
    return complex(np.vdot(a.vec(), b.vec()))


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a @ b - b @ a


def jordan_product(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Symmetrized product ``½(ab + ba)``."""
    return 0.5 * (a @ b + b @ a)


def eigenvalues(a: AlgebraElement) -> np.ndarray:
    """Sorted real spectrum of a self-adjoint element (all blocks pooled)."""
    vals = np.concatenate([np.linalg.eigvalsh(0.5 * (b + b.conj().T)) for b in a.blocks])
    return np.sort(vals)


def selfadjoint_violation(a: AlgebraElement) -> float:
    return (a - a.dagger()).norm()


def is_selfadjoint(a: AlgebraElement, tol=None) -> bool:
    return selfadjoint_violation(a) <= resolve_tol(tol)


def is_positive(a: AlgebraElement, tol=None) -> bool:
    """Self-adjoint with every blockwise eigenvalue ``>= -tol``."""
    tol = resolve_tol(tol)
    return is_selfadjoint(a, tol) and eigenvalues(a)[0] >= -tol
