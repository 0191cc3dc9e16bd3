"""Blooms, channel states and channel densities (Jamiołkowski convention).

For ``F: B -> A`` the bloom is ``a⊗b ↦ a F(b)`` and the swapped bloom is
``a⊗b ↦ F(b) a``, both maps ``A⊗B -> A``.  The channel state is
``tr ∘ bloom(F)`` and the channel density ``D[F]`` is its density in ``A⊗B``,
i.e. the unique element with ``tr(D[F] (a⊗b)) = tr(a F(b))``.  This pairing
does not depend on a choice of basis (unlike the Choi matrix).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, AlgebraShape, ShapeMismatchError, identity, matrix_unit, tensor
from .linmap import (
    LinearMap,
    compose,
    density_of,
    hs_adjoint,
    trace_functional,
)


@dataclass(frozen=True)
class ChannelDensity:
    """``D[F]`` together with the hom-space ``B -> A`` it came from.

    ``A⊗B`` alone does not determine the split (``M4`` is ``M2⊗M2`` and also
    ``M4⊗M1``), so the source shapes travel with the value.
    """

    value: AlgebraElement
    source_domain: AlgebraShape
    source_codomain: AlgebraShape

    def __post_init__(self):
        expected = self.source_codomain.tensor(self.source_domain)
        if self.value.shape != expected:
            raise ShapeMismatchError(
                f"density of shape {self.value.shape.blocks} does not match "
                f"{self.source_codomain} ⊗ {self.source_domain}"
            )


def _bloom(f: LinearMap, swapped: bool) -> LinearMap:
    a, b = f.codomain, f.domain
    domain = a.tensor(b)
    mat = np.zeros((a.vdim, domain.vdim), dtype=complex)
    nb = len(b.blocks)
    for x, m in enumerate(a.blocks):
        eye = np.eye(m)
        for y, n in enumerate(b.blocks):
            fr = f.component(x, y).reshape(m, m, n, n)  # [p, q, k, l] = F(E_kl)_pq
            # input index order (i, k, j, l) is the Kronecker entry (ik),(jl) of E_ij ⊗ E_kl
            if swapped:
                blk = np.einsum("pikl,jq->pqikjl", fr, eye)  # F(E_kl) E_ij
            else:
                blk = np.einsum("pi,jqkl->pqikjl", eye, fr)  # E_ij F(E_kl)
            mat[a.block_slice(x), domain.block_slice(x * nb + y)] = blk.reshape(m * m, -1)
    return LinearMap(domain, a, mat)


def bloom(f: LinearMap) -> LinearMap:
    """``μ_A ∘ (id_A ⊗ f)``: ``a⊗b ↦ a f(b)``."""
    return _bloom(f, swapped=False)


def swapped_bloom(f: LinearMap) -> LinearMap:
    """``μ_A ∘ (f ⊗ id_A) ∘ γ``: ``a⊗b ↦ f(b) a``."""
    return _bloom(f, swapped=True)


def channel_state(f: LinearMap) -> LinearMap:
    """The (non-unital) functional ``tr ∘ bloom(f)`` on ``A⊗B``."""
    return compose(trace_functional(f.codomain), bloom(f))


def channel_density(f: LinearMap) -> ChannelDensity:
    """``D[f] = bloom(f)*(1_A)†``."""
    value = hs_adjoint(bloom(f)).apply(identity(f.codomain)).dagger()
    return ChannelDensity(value, f.domain, f.codomain)


def density_of_state(omega: LinearMap, domain, codomain) -> ChannelDensity:
    """Tag the density of a functional on ``codomain ⊗ domain`` with its hom-space."""
    return ChannelDensity(density_of(omega), AlgebraShape.of(domain), AlgebraShape.of(codomain))


@lru_cache(maxsize=32)
def _density_system(domain: AlgebraShape, codomain: AlgebraShape):
    """LU factors of the linear map ``vec(F) ↦ vec(D[F])`` on ``hom(domain, codomain)``."""
    size = codomain.vdim * domain.vdim
    cols = np.empty((size, size), dtype=complex)
    unit = np.zeros(size, dtype=complex)
    for t in range(size):
        unit[t] = 1.0
        f = LinearMap(domain, codomain, unit.reshape(codomain.vdim, domain.vdim))
        cols[:, t] = channel_density(f).value.vec()
        unit[t] = 0.0
    return scipy.linalg.lu_factor(cols)


def cj_inverse(d: ChannelDensity) -> LinearMap:
    """Recover ``F`` from ``D[F]`` by solving the (bijective) linear system."""
    a, b = d.source_codomain, d.source_domain
    coeffs = scipy.linalg.lu_solve(_density_system(b, a), d.value.vec())
    return LinearMap(b, a, coeffs.reshape(a.vdim, b.vdim))


def cj_inverse_partial_trace(d: ChannelDensity) -> LinearMap:
    """Recover ``F`` via ``F*(E_ij) = tr_A((E_ji ⊗ 1) D)†``.

    Independent of :func:`cj_inverse`; used to cross-check it.
    """
    a, b = d.source_codomain, d.source_domain
    one_b = identity(b)
    cols = []
    for x, m in enumerate(a.blocks):
        for i in range(m):
            for j in range(m):
                probe = tensor(matrix_unit(a, x, j, i), one_b) @ d.value
                cols.append(partial_trace_left(probe, a, b).dagger().vec())
    adjoint = LinearMap(a, b, np.stack(cols, axis=1))
    return hs_adjoint(adjoint)


def channel_state_inverse(omega: LinearMap, domain, codomain) -> LinearMap:
    """``S⁻¹``: the map ``domain -> codomain`` whose channel state is ``omega``."""
    return cj_inverse(density_of_state(omega, domain, codomain))


def _check_tensor(e: AlgebraElement, left: AlgebraShape, right: AlgebraShape):
    if e.shape != left.tensor(right):
        raise ShapeMismatchError(
            f"element of {e.shape.blocks} is not in {left} ⊗ {right}"
        )


def partial_trace_left(e: AlgebraElement, left, right) -> AlgebraElement:
    """Trace out the left factor of ``e ∈ left ⊗ right``."""
    left, right = AlgebraShape.of(left), AlgebraShape.of(right)
    _check_tensor(e, left, right)
    out = [np.zeros((n, n), dtype=complex) for n in right.blocks]
    nr = len(right.blocks)
    for x, m in enumerate(left.blocks):
        for y, n in enumerate(right.blocks):
            out[y] += np.einsum("ikil->kl", e.blocks[x * nr + y].reshape(m, n, m, n))
    return AlgebraElement(right, out)


def partial_trace_right(e: AlgebraElement, left, right) -> AlgebraElement:
    """Trace out the right factor of ``e ∈ left ⊗ right``."""
    left, right = AlgebraShape.of(left), AlgebraShape.of(right)
    _check_tensor(e, left, right)
    out = [np.zeros((m, m), dtype=complex) for m in left.blocks]
    nr = len(right.blocks)
    for x, m in enumerate(left.blocks):
        for y, n in enumerate(right.blocks):
            out[x] += np.einsum("ikjk->ij", e.blocks[x * nr + y].reshape(m, n, m, n))
    return AlgebraElement(left, out)
