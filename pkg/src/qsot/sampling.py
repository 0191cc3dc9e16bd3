"""Seeded random elements, states and maps for property testing.

Every generator takes a ``numpy.random.Generator`` (or a seed) and is otherwise
stateless.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraElement, AlgebraShape, identity
from .linmap import (
    LinearMap,
    cp_violation,
    from_function,
    functional_of,
    hermitian_part,
    kraus_map,
)


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _complex_normal(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def random_element(shape, rng) -> AlgebraElement:
    shape = AlgebraShape.of(shape)
    return AlgebraElement(shape, [_complex_normal(rng, (m, m)) for m in shape.blocks])


def random_hermitian(shape, rng) -> AlgebraElement:
    a = random_element(shape, rng)
    return 0.5 * (a + a.dagger())


def random_density(shape, rng, rank=None) -> AlgebraElement:
    """Positive semidefinite, trace one (Wishart-type)."""
    shape = AlgebraShape.of(shape)
    blocks = []
    for m in shape.blocks:
        g = _complex_normal(rng, (m, m if rank is None else min(rank, m)))
        blocks.append(g @ g.conj().T)
    rho = AlgebraElement(shape, blocks)
    return rho / np.trace(rho.to_dense()).real


def random_hermitian_density(shape, rng) -> AlgebraElement:
    """Self-adjoint with unit trace, not necessarily positive."""
    h = random_hermitian(shape, rng)
    shape = h.shape
    return h + ((1.0 - np.trace(h.to_dense()).real) / shape.dim) * identity(shape)


def random_state(shape, rng) -> LinearMap:
    return functional_of(random_density(shape, rng))


def random_unitary(n: int, rng) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_map(domain, codomain, rng) -> LinearMap:
    """Arbitrary complex linear map (generally not †-preserving)."""
    domain, codomain = AlgebraShape.of(domain), AlgebraShape.of(codomain)
    return LinearMap(domain, codomain, _complex_normal(rng, (codomain.vdim, domain.vdim)))


def random_dagger_preserving_map(domain, codomain, rng) -> LinearMap:
    return hermitian_part(random_map(domain, codomain, rng))


def random_cp_unital_map(domain, codomain, rng, n_kraus: int = 3) -> LinearMap:
    """Heisenberg-picture CP unital map ``B -> A`` from random Kraus operators."""
    domain, codomain = AlgebraShape.of(domain), AlgebraShape.of(codomain)
    ks = [_complex_normal(rng, (codomain.dim, domain.dim)) for _ in range(n_kraus)]
    raw = kraus_map(ks, domain, codomain)
    # unitalize: K -> X^{-1/2} K with X = raw(1), block diagonal and positive definite
    x = raw.apply(identity(domain))
    s = np.zeros((codomain.dim, codomain.dim), dtype=complex)
    start = 0
    for blk in x.blocks:
        w, v = np.linalg.eigh(0.5 * (blk + blk.conj().T))
        m = blk.shape[0]
        s[start:start + m, start:start + m] = (v / np.sqrt(w)) @ v.conj().T
        start += m
    return kraus_map([s @ k for k in ks], domain, codomain)


def unit_killing_perturbation(domain, codomain, rng) -> LinearMap:
    """Random †-preserving map ``P`` with ``P(1) = 0``."""
    domain, codomain = AlgebraShape.of(domain), AlgebraShape.of(codomain)
    p = random_dagger_preserving_map(domain, codomain, rng)
    p_one = p.apply(identity(domain)).vec()
    normalized_trace = identity(domain).vec() / domain.dim
    return LinearMap(domain, codomain, p.matrix - np.outer(p_one, normalized_trace))


def random_unital_dagger_map(domain, codomain, rng, non_cp: float = 0.0, ensure_non_cp: bool = False) -> LinearMap:
    """Unital †-preserving map, optionally pushed outside the CP cone.

    The map is ``F_cp + t·P`` with ``F_cp`` CP unital and ``P`` a †-preserving
    perturbation that annihilates the unit, so unitality is exact.  With
    ``ensure_non_cp`` the weight ``t`` is doubled until the Choi test fails;
    this is impossible when the domain is ``C`` (its only unital map is CP).
    """
    domain = AlgebraShape.of(domain)
    if ensure_non_cp and domain.vdim == 1:
        raise ValueError("every unital map out of a one-dimensional algebra is CP")
    f = random_cp_unital_map(domain, codomain, rng)
    if non_cp == 0.0 and not ensure_non_cp:
        return f
    p = unit_killing_perturbation(domain, codomain, rng)
    t = non_cp if non_cp > 0 else 0.25
    g = f + t * p
    for _ in range(64):
        if not ensure_non_cp or cp_violation(g) >= 1e-6:
            return g
        t *= 2.0
        g = f + t * p
    raise RuntimeError("could not leave the CP cone")


def random_stochastic(n_out: int, n_in: int, rng) -> np.ndarray:
    """Column-stochastic ``n_out × n_in`` matrix (``Σ_k f[k, i] = 1``)."""
    f = rng.random((n_out, n_in)) + 0.05
    return f / f.sum(axis=0, keepdims=True)


def planted_classical_pair(m: int, n: int, rng):
    """A classical pair ``(F, ω)`` on ``M_n -> M_m`` with known data.

    ``F(b) = Σ_k <v_k|b|v_k> Σ_i f[k, i] |u_i><u_i|`` and ``ρ = Σ_i p_i |u_i><u_i|``
    with random unitaries ``U``, ``V``, a column-stochastic ``f`` and distinct,
    strictly positive ``p``.  Returns ``(F, ω, U, V, f, p)``.
    """
    u = random_unitary(m, rng)
    v = random_unitary(n, rng)
    f = random_stochastic(n, m, rng)
    p = np.sort(rng.random(m) + 0.1)[::-1]
    p = p + 0.05 * np.arange(m)[::-1]  # keep the spectrum well separated
    p = p / p.sum()

    def act(b: AlgebraElement) -> AlgebraElement:
        weights = np.einsum("ik,ij,jk->k", v.conj(), b.matrix, v)  # <v_k|b|v_k>
        diag = weights @ f
        return AlgebraElement.from_matrix((u * diag) @ u.conj().T)

    fmap = from_function(act, (n,), (m,))
    rho = AlgebraElement.from_matrix((u * p) @ u.conj().T)
    return fmap, functional_of(rho), u, v, f, p
