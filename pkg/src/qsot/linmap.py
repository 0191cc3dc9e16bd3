"""Linear maps between multi-matrix algebras.

A map ``F: B -> A`` is stored as its superoperator matrix of shape
``(A.vdim, B.vdim)`` acting on vectorized elements (see :mod:`qsot.algebra`
for the coordinate conventions).  The ``(x, y)`` component ``F_xy`` is the
``m_x² × n_y²`` sub-block of that matrix.

Functionals ``ω: A -> C`` are ordinary maps whose codomain is the one-block
shape ``(1,)``; their density is ``ρ = ω*(1)†`` so that ``ω = tr(ρ ·)``.

Maps are never required to be completely positive.  Kraus operators are only
accepted by :func:`kraus_map`, which is meant for I/O boundaries.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from ._tol import resolve_tol
from .algebra import (
    SCALARS,
    AlgebraElement,
    AlgebraShape,
    ShapeMismatchError,
    basis,
    identity,
)


class LinearMap:
    """Immutable linear map ``domain -> codomain``."""

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, domain, codomain, matrix):
        domain = AlgebraShape.of(domain)
        codomain = AlgebraShape.of(codomain)
        mat = np.array(matrix, dtype=complex)
        if mat.shape != (codomain.vdim, domain.vdim):
            raise ShapeMismatchError(
                f"superoperator for {domain} -> {codomain} must be "
                f"{codomain.vdim}x{domain.vdim}, got {mat.shape}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "matrix", mat)

    def __setattr__(self, name, value):
        raise AttributeError("LinearMap is immutable")

    @classmethod
    def from_components(cls, domain, codomain, components) -> "LinearMap":
        """Assemble from a nested list ``components[x][y]`` of block superoperators."""
        domain = AlgebraShape.of(domain)
        codomain = AlgebraShape.of(codomain)
        mat = np.zeros((codomain.vdim, domain.vdim), dtype=complex)
        if len(components) != len(codomain.blocks):
            raise ShapeMismatchError("one row of components per codomain block is required")
        for x, row in enumerate(components):
            if len(row) != len(domain.blocks):
                raise ShapeMismatchError("one component per domain block is required")
            for y, comp in enumerate(row):
                mat[codomain.block_slice(x), domain.block_slice(y)] = comp
        return cls(domain, codomain, mat)

    def component(self, x: int, y: int) -> np.ndarray:
        return self.matrix[self.codomain.block_slice(x), self.domain.block_slice(y)]

    @property
    def is_functional(self) -> bool:
        return self.codomain == SCALARS

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.domain:
            raise ShapeMismatchError(
                f"map expects {self.domain.blocks}, got element of {a.shape.blocks}"
            )
        return AlgebraElement.from_vec(self.codomain, self.matrix @ a.vec())

    __call__ = apply

    def _same_type(self, other):
        if not isinstance(other, LinearMap):
            return False
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            raise ShapeMismatchError("maps have different domain/codomain")
        return True

    def __add__(self, other):
        if not self._same_type(other):
            return NotImplemented
        return LinearMap(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other):
        if not self._same_type(other):
            return NotImplemented
        return LinearMap(self.domain, self.codomain, self.matrix - other.matrix)

    def __neg__(self):
        return LinearMap(self.domain, self.codomain, -self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, (LinearMap, AlgebraElement)):
            return NotImplemented
        return LinearMap(self.domain, self.codomain, scalar * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            return compose(self, other)
        return NotImplemented

    def distance(self, other: "LinearMap") -> float:
        """Max-abs entry difference of the superoperators."""
        self._same_type(other)
        return float(np.abs(self.matrix - other.matrix).max())

    def __repr__(self):
        return f"LinearMap({self.domain} -> {self.codomain})"


Functional = LinearMap


# construction


def from_function(func: Callable[[AlgebraElement], AlgebraElement], domain, codomain) -> LinearMap:
    """Tabulate a Python callable on the matrix-unit basis of ``domain``."""
    domain = AlgebraShape.of(domain)
    codomain = AlgebraShape.of(codomain)
    cols = []
    for e in basis(domain):
        out = func(e)
        if out.shape != codomain:
            raise ShapeMismatchError(f"function returned {out.shape.blocks}, expected {codomain.blocks}")
        cols.append(out.vec())
    return LinearMap(domain, codomain, np.stack(cols, axis=1))


def identity_map(shape) -> LinearMap:
    shape = AlgebraShape.of(shape)
    return LinearMap(shape, shape, np.eye(shape.vdim))


def trace_functional(shape) -> LinearMap:
    shape = AlgebraShape.of(shape)
    return LinearMap(shape, SCALARS, identity(shape).vec()[None, :])


def unit_map(shape) -> LinearMap:
    """The unique unital map ``C -> A`` (written ``!_A``)."""
    shape = AlgebraShape.of(shape)
    return LinearMap(SCALARS, shape, identity(shape).vec()[:, None])


def functional_of(rho: AlgebraElement) -> LinearMap:
    """The functional ``tr(ρ ·)``."""
    row = np.concatenate([b.T.ravel() for b in rho.blocks])
    return LinearMap(rho.shape, SCALARS, row[None, :])


def density_of(omega: LinearMap) -> AlgebraElement:
    """The density ``ρ = ω*(1)†`` of a functional."""
    if not omega.is_functional:
        raise ShapeMismatchError(f"expected a functional, got codomain {omega.codomain.blocks}")
    return hs_adjoint(omega).apply(identity(SCALARS)).dagger()


def evaluate(omega: LinearMap, a: AlgebraElement) -> complex:
    """Scalar value of a functional on an element."""
    if not omega.is_functional:
        raise ShapeMismatchError("evaluate needs a functional")
    return complex(omega.apply(a).blocks[0][0, 0])


def kraus_map(kraus: Sequence, domain, codomain) -> LinearMap:
    """``X ↦ Σ K X K†`` compressed onto the blocks of ``codomain``.

    Each ``K`` is a ``codomain.dim × domain.dim`` matrix; the input is embedded
    block-diagonally.  The result is completely positive by construction.
    """
    domain = AlgebraShape.of(domain)
    codomain = AlgebraShape.of(codomain)
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    for k in ks:
        if k.shape != (codomain.dim, domain.dim):
            raise ShapeMismatchError(
                f"Kraus operator must be {codomain.dim}x{domain.dim}, got {k.shape}"
            )

    def act(a):
        dense = a.to_dense()
        return AlgebraElement.from_dense(codomain, sum(k @ dense @ k.conj().T for k in ks))

    return from_function(act, domain, codomain)


# algebraic operations


def compose(f: LinearMap, g: LinearMap) -> LinearMap:
    """``f ∘ g``."""
    if f.domain != g.codomain:
        raise ShapeMismatchError(
            f"cannot compose: {g.codomain.blocks} does not feed {f.domain.blocks}"
        )
    return LinearMap(g.domain, f.codomain, f.matrix @ g.matrix)


def hs_adjoint(f: LinearMap) -> LinearMap:
    # the HS pairing tr(a†b) is the standard inner product on vectorized coordinates
    return LinearMap(f.codomain, f.domain, f.matrix.conj().T)


@lru_cache(maxsize=None)
def _kron_perm(m: int, n: int) -> np.ndarray:
    """Index map with ``vec(a⊗b) = (vec a ⊗ vec b)[perm]`` for m×m ``a``, n×n ``b``."""
    return np.arange(m * m * n * n).reshape(m, m, n, n).transpose(0, 2, 1, 3).ravel()


def tensor_map(f: LinearMap, g: LinearMap) -> LinearMap:
    """``f ⊗ g`` with lexicographic block order on both sides."""
    domain = f.domain.tensor(g.domain)
    codomain = f.codomain.tensor(g.codomain)
    mat = np.zeros((codomain.vdim, domain.vdim), dtype=complex)
    out_blocks = list(product(range(len(f.codomain.blocks)), range(len(g.codomain.blocks))))
    in_blocks = list(product(range(len(f.domain.blocks)), range(len(g.domain.blocks))))
    for ox, (x, z) in enumerate(out_blocks):
        p_out = _kron_perm(f.codomain.blocks[x], g.codomain.blocks[z])
        for iy, (y, w) in enumerate(in_blocks):
            fc = f.component(x, y)
            gc = g.component(z, w)
            if not fc.any() or not gc.any():
                continue
            p_in = _kron_perm(f.domain.blocks[y], g.domain.blocks[w])
            mat[codomain.block_slice(ox), domain.block_slice(iy)] = np.kron(fc, gc)[np.ix_(p_out, p_in)]
    return LinearMap(domain, codomain, mat)


@lru_cache(maxsize=None)
def _dagger_perm(shape: AlgebraShape) -> np.ndarray:
    """``vec(a†) = conj(vec(a))[perm]``."""
    perms = []
    for x, m in enumerate(shape.blocks):
        perms.append(shape.offsets[x] + np.arange(m * m).reshape(m, m).T.ravel())
    return np.concatenate(perms)


def dagger_conjugate(f: LinearMap) -> LinearMap:
    """``† ∘ f ∘ †``, i.e. ``b ↦ f(b†)†``."""
    p_out = _dagger_perm(f.codomain)
    p_in = _dagger_perm(f.domain)
    return LinearMap(f.domain, f.codomain, f.matrix.conj()[np.ix_(p_out, p_in)])


def hermitian_part(f: LinearMap) -> LinearMap:
    return 0.5 * (f + dagger_conjugate(f))


def antihermitian_part(f: LinearMap) -> LinearMap:
    return 0.5 * (f - dagger_conjugate(f))


def swap_map(left, right) -> LinearMap:
    """The flip ``γ: A⊗B -> B⊗A``."""
    left = AlgebraShape.of(left)
    right = AlgebraShape.of(right)
    domain = left.tensor(right)
    codomain = right.tensor(left)
    mat = np.zeros((codomain.vdim, domain.vdim))
    nl, nr = len(left.blocks), len(right.blocks)
    for x, y in product(range(nl), range(nr)):
        m, n = left.blocks[x], right.blocks[y]
        src = domain.offsets[x * nr + y]
        dst = codomain.offsets[y * nl + x]
        # entry (i,k),(j,l) of a_x⊗b_y lands at (k,i),(l,j) of b_y⊗a_x
        target = np.arange(m * n * m * n).reshape(n, m, n, m).transpose(1, 0, 3, 2).ravel()
        mat[dst + target, src + np.arange(m * n * m * n)] = 1.0
    return LinearMap(domain, codomain, mat)


# multiplication map and its adjoint


def mu_map(shape) -> LinearMap:
    """The product map ``μ: A⊗A -> A``, ``a⊗b ↦ ab``."""
    shape = AlgebraShape.of(shape)
    domain = shape.tensor(shape)
    k = len(shape.blocks)
    mat = np.zeros((shape.vdim, domain.vdim))
    for x, m in enumerate(shape.blocks):
        src = domain.offsets[x * k + x]
        out = shape.offsets[x]
        for i, j, l in product(range(m), repeat=3):
            # E_ij ⊗ E_jl ↦ E_il; the unit sits at row (i,j), column (j,l) of the Kronecker block
            col = (i * m + j) * m * m + (j * m + l)
            mat[out + i * m + l, src + col] = 1.0
    return LinearMap(domain, shape, mat)


def mu_adjoint(shape) -> LinearMap:
    """Hilbert–Schmidt adjoint of ``μ`` from its closed form.

    ``μ*(A)`` is supported on the diagonal blocks ``(x, x)`` and equals
    ``Σ_{i,j,k} A_ij E_ik ⊗ E_kj`` there.
    """
    shape = AlgebraShape.of(shape)
    codomain = shape.tensor(shape)
    k = len(shape.blocks)
    mat = np.zeros((codomain.vdim, shape.vdim))
    for x, m in enumerate(shape.blocks):
        dst = codomain.offsets[x * k + x]
        src = shape.offsets[x]
        for i, j, kk in product(range(m), repeat=3):
            row = (i * m + kk) * m * m + (kk * m + j)
            mat[dst + row, src + i * m + j] = 1.0
    return LinearMap(shape, codomain, mat)


# predicates


def unital_violation(f: LinearMap) -> float:
    return (f.apply(identity(f.domain)) - identity(f.codomain)).norm()


def trace_violation(f: LinearMap) -> float:
    tr_out = identity(f.codomain).vec()
    tr_in = identity(f.domain).vec()
    return float(np.abs(tr_out @ f.matrix - tr_in).max())


def dagger_violation(f: LinearMap) -> float:
    return f.distance(dagger_conjugate(f))


def choi_matrix(f: LinearMap, x: int, y: int) -> np.ndarray:
    """Choi matrix ``Σ_ij E_ij ⊗ f_xy(E_ij)`` of one component (computational basis)."""
    m, n = f.codomain.blocks[x], f.domain.blocks[y]
    comp = f.component(x, y).reshape(m, m, n, n)  # [p, q, i, j] = f_xy(E_ij)_pq
    return comp.transpose(2, 0, 3, 1).reshape(n * m, n * m)


def cp_violation(f: LinearMap) -> float:
    """Largest negative eigenvalue magnitude over all component Choi matrices."""
    worst = 0.0
    for x, y in product(range(len(f.codomain.blocks)), range(len(f.domain.blocks))):
        c = choi_matrix(f, x, y)
        herm = float(np.abs(c - c.conj().T).max())
        low = float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])
        worst = max(worst, herm, -low)
    return worst


def is_unital(f: LinearMap, tol=None) -> bool:
    return unital_violation(f) <= resolve_tol(tol)


def is_trace_preserving(f: LinearMap, tol=None) -> bool:
    return trace_violation(f) <= resolve_tol(tol)


def is_dagger_preserving(f: LinearMap, tol=None) -> bool:
    return dagger_violation(f) <= resolve_tol(tol)


def is_completely_positive(f: LinearMap, tol=None) -> bool:
    return cp_violation(f) <= resolve_tol(tol)
