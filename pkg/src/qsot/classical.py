"""Effectively classical channel/state pairs.

For full matrix algebras ``A = M_m``, ``B = M_n`` a pair ``(F, ω)`` of
†-preserving maps has a classical model exactly when there are orthonormal
bases ``{e_i}``, ``{ε_k}`` diagonalizing ``ρ`` and ``D[F]`` (the latter in the
product basis).  Then ``F(|ε_k><ε_l|) = δ_kl Σ_i f[k, i] P_i`` and the model is
read off from ``f``.

Two weaker checks work on any multi-matrix algebras and any codomain ``Z`` of
``ω``: bloom symmetry ``ω∘bloom(F) = ω∘swapped_bloom(F)`` and commutation of
``1_Z⊗D[F]`` with ``D[ω]⊗1_B``.  They are equivalent to each other and implied
by a classical model; a model is never inferred from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._tol import resolve_tol
from .algebra import AlgebraElement, commutator, identity, tensor
from .cj import bloom, channel_density, swapped_bloom
from .linmap import (
    LinearMap,
    compose,
    dagger_violation,
    density_of,
    from_function,
    hs_adjoint,
)

EIGEN_GROUPING = 1e-8


class NotClassicalError(ValueError):
    """The pair admits no classical model; ``witness`` shows why."""

    def __init__(self, reason: str, witness=None, norm: float = float("nan")):
        super().__init__(f"{reason} (norm {norm:.3e})")
        self.reason = reason
        self.witness = witness
        self.norm = norm


class InvalidModelError(ValueError):
    """A supplied model does not satisfy the classical-model equations."""


class UnsupportedShapeError(ValueError):
    """Model construction is only implemented for single-block algebras."""


@dataclass(frozen=True)
class ClassicalModel:
    """Bases, stochastic data and diagonal densities of a classical model.

    ``stochastic[k, i]`` is the weight of ``P_i`` in ``F_cl(Q_k)``; columns sum to
    one when ``F`` is unital and entries are non-negative when ``F`` is positive.
    """

    basis_A: np.ndarray
    basis_B: np.ndarray
    stochastic: np.ndarray
    diag_rho: np.ndarray
    diag_theta: np.ndarray

    @property
    def projections_A(self) -> list[np.ndarray]:
        return [np.outer(e, e.conj()) for e in self.basis_A.T]

    @property
    def projections_B(self) -> list[np.ndarray]:
        return [np.outer(e, e.conj()) for e in self.basis_B.T]

    def _pinch(self, basis: np.ndarray, shape) -> LinearMap:
        def act(a: AlgebraElement) -> AlgebraElement:
            d = np.einsum("ik,ij,jk->k", basis.conj(), a.matrix, basis)
            return AlgebraElement.from_matrix((basis * d) @ basis.conj().T)

        return from_function(act, shape, shape)

    def conditional_expectation_A(self) -> LinearMap:
        """``j_A ∘ E_A``: ``a ↦ Σ_i P_i a P_i``."""
        m = self.basis_A.shape[0]
        return self._pinch(self.basis_A, (m,))

    def conditional_expectation_B(self) -> LinearMap:
        n = self.basis_B.shape[0]
        return self._pinch(self.basis_B, (n,))

    def reconstruct(self) -> LinearMap:
        """``j_A ∘ F_cl ∘ E_B`` as a map ``M_n -> M_m``."""
        u, v, f = self.basis_A, self.basis_B, self.stochastic

        def act(b: AlgebraElement) -> AlgebraElement:
            weights = np.einsum("ik,ij,jk->k", v.conj(), b.matrix, v)
            return AlgebraElement.from_matrix((u * (weights @ f)) @ u.conj().T)

        return from_function(act, (v.shape[0],), (u.shape[0],))


def model_residuals(model: ClassicalModel, f: LinearMap, omega: LinearMap) -> dict:
    """Violations of the defining equations of a classical model."""
    u, v = model.basis_A, model.basis_B
    omega_f = compose(omega, f)
    return {
        "unitarity_A": float(np.abs(u.conj().T @ u - np.eye(u.shape[1])).max()),
        "unitarity_B": float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max()),
        "reconstruction": f.distance(model.reconstruct()),
        "state_A": omega.distance(compose(omega, model.conditional_expectation_A())),
        "state_B": omega_f.distance(compose(omega_f, model.conditional_expectation_B())),
    }


def validate_model(model: ClassicalModel, f: LinearMap, omega: LinearMap, tol=None) -> dict:
    tol = resolve_tol(tol)
    if (model.basis_A.shape[0], model.basis_B.shape[0]) != (f.codomain.dim, f.domain.dim):
        raise InvalidModelError("model bases do not match the channel's algebras")
    res = model_residuals(model, f, omega)
    bad = {k: r for k, r in res.items() if r > tol}
    if bad:
        raise InvalidModelError(f"classical-model equations violated: {bad}")
    return res


def commutator_check(f: LinearMap, omega: LinearMap, tol=None) -> tuple[bool, float]:
    """``[1_Z ⊗ D[F], D[ω] ⊗ 1_B] = 0`` for ``ω: A -> Z``."""
    tol = resolve_tol(tol)
    lhs = tensor(identity(omega.codomain), channel_density(f).value)
    rhs = tensor(channel_density(omega).value, identity(f.domain))
    norm = commutator(lhs, rhs).norm()
    return norm <= tol, norm


def bloom_symmetry_check(f: LinearMap, omega: LinearMap, tol=None) -> tuple[bool, float]:
    """``ω∘bloom(F) = ω∘swapped_bloom(F)``, measured entrywise."""
    tol = resolve_tol(tol)
    norm = compose(omega, bloom(f)).distance(compose(omega, swapped_bloom(f)))
    return norm <= tol, norm


def _group(values: np.ndarray, scale: float) -> list[np.ndarray]:
    """Split sorted eigenvalue indices into runs closer than the grouping threshold."""
    groups, current = [], [0]
    for idx in range(1, len(values)):
        if values[idx] - values[idx - 1] <= EIGEN_GROUPING * scale:
            current.append(idx)
        else:
            groups.append(np.array(current))
            current = [idx]
    groups.append(np.array(current))
    return groups


def joint_eigenbasis(family: list[np.ndarray], dim: int) -> np.ndarray:
    """Orthonormal basis refining the eigenspaces of each Hermitian matrix in turn.

    Exact for a commuting family; for a non-commuting one it still returns a
    basis, which then fails the diagonality tests downstream.
    """
    clusters = [np.eye(dim, dtype=complex)]
    for h in family:
        scale = max(1.0, float(np.abs(h).max()))
        refined = []
        for vecs in clusters:
            if vecs.shape[1] == 1:
                refined.append(vecs)
                continue
            c = vecs.conj().T @ h @ vecs
            w, rot = np.linalg.eigh(0.5 * (c + c.conj().T))
            for idx in _group(w, scale):
                refined.append(vecs @ rot[:, idx])
        clusters = refined
    return np.hstack(clusters)


def _hermitian_basis(n: int):
    for k in range(n):
        for l in range(k, n):
            h = np.zeros((n, n), dtype=complex)
            if k == l:
                h[k, k] = 1.0
                yield h
                continue
            h[k, l] = h[l, k] = 1.0
            yield h
            g = np.zeros((n, n), dtype=complex)
            g[k, l], g[l, k] = -1j, 1j
            yield g


def _offdiag(mat: np.ndarray) -> float:
    return float(np.abs(mat - np.diag(np.diag(mat))).max()) if mat.shape[0] > 1 else 0.0


def find_classical_model(f: LinearMap, omega: LinearMap, tol=None) -> ClassicalModel:
    """Construct a classical model of ``(F, ω)`` or raise :class:`NotClassicalError`.

    Only full matrix algebras are supported (``UnsupportedShapeError``
    otherwise); both inputs must be †-preserving.
    """
    tol = resolve_tol(tol)
    if not (f.domain.is_matrix_algebra and f.codomain.is_matrix_algebra):
        raise UnsupportedShapeError("classical models are only constructed for full matrix algebras")
    if not omega.is_functional or omega.domain != f.codomain:
        raise ValueError("omega must be a functional on the codomain of F")
    if dagger_violation(f) > tol or dagger_violation(omega) > tol:
        raise ValueError("find_classical_model needs †-preserving inputs")

    m, n = f.codomain.dim, f.domain.dim
    rho = density_of(omega).matrix
    adjoint = hs_adjoint(f)

    # A side: ρ first, then the range of F (which must be diagonal in {e_i})
    family = [0.5 * (rho + rho.conj().T)]
    family += [f.apply(AlgebraElement.from_matrix(h)).matrix for h in _hermitian_basis(n)]
    e = joint_eigenbasis(family, m)

    off = _offdiag(e.conj().T @ rho @ e)
    if off > tol:
        raise NotClassicalError("ρ is not diagonal in the refined basis", rho, off)

    # off-diagonal kill test: F*(|e_j><e_i|) = 0 for i != j
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            w = adjoint.apply(AlgebraElement.from_matrix(np.outer(e[:, j], e[:, i].conj()))).matrix
            norm = float(np.abs(w).max())
            if norm > tol:
                rho_el = AlgebraElement.from_matrix(family[0])
                worst = max(
                    (commutator(rho_el, AlgebraElement.from_matrix(h)).norm() for h in family[1:]),
                    default=0.0,
                )
                raise NotClassicalError(
                    f"F*(|e_{j}><e_{i}|) does not vanish (largest [ρ, F(h)] = {worst:.3e})",
                    w,
                    norm,
                )

    # B side: the commuting family {F*(P_i)} fixes {ε_k}
    images = [adjoint.apply(AlgebraElement.from_matrix(np.outer(e[:, i], e[:, i].conj()))).matrix for i in range(m)]
    theta = adjoint.apply(AlgebraElement.from_matrix(rho)).matrix
    eps = joint_eigenbasis(images + [theta], n)
    for i, img in enumerate(images):
        off = _offdiag(eps.conj().T @ img @ eps)
        if off > tol:
            raise NotClassicalError(f"F*(P_{i}) is not simultaneously diagonalizable", img, off)
    # redundant by construction (θ = Σ p_i F*(P_i)); kept as a consistency check
    off_theta = _offdiag(eps.conj().T @ theta @ eps)
    if off_theta > tol:
        raise NotClassicalError("θ is not diagonal in the refined basis", theta, off_theta)

    stoch = np.array([np.real(np.diag(eps.conj().T @ img @ eps)) for img in images]).T
    model = ClassicalModel(
        basis_A=e,
        basis_B=eps,
        stochastic=stoch,
        diag_rho=np.real(np.diag(e.conj().T @ rho @ e)),
        diag_theta=np.real(np.diag(eps.conj().T @ theta @ eps)),
    )
    res = model_residuals(model, f, omega)
    scale = max(1.0, float(np.abs(f.matrix).max()))
    if max(res.values()) > max(tol, 1e-9) * scale:
        raise NotClassicalError(f"reconstruction failed: {res}", None, max(res.values()))
    return model


def _basis_overlap(new: np.ndarray, old: np.ndarray) -> np.ndarray:
    """``T[k, k'] = |<new_k|old_k'>|²``, the action of ``E_old`` on ``new``'s projections."""
    return np.abs(new.conj().T @ old) ** 2


def compose_models(m1: ClassicalModel, m2: ClassicalModel, tol=None) -> ClassicalModel:
    """Model of ``(F∘G, ω)`` from models of ``(F, ω)`` and ``(G, ω∘F)``.

    The intermediate bases must agree up to permutation and phase on the support
    of ``θ`` (the density of ``ω∘F``); where ``θ`` vanishes they may differ.
    The composite stochastic matrix is ``f_G · T · f_F`` with ``T`` the overlap
    of the two intermediate bases (a permutation on the support).
    """
    tol = max(resolve_tol(tol), 1e-9)
    if m2.basis_A.shape != m1.basis_B.shape:
        raise InvalidModelError("intermediate algebras differ in dimension")
    overlap = _basis_overlap(m2.basis_A, m1.basis_B)
    support = np.abs(m1.diag_theta) > tol
    support_new = overlap[:, support].sum(axis=1) > 0.5
    for k in np.nonzero(support_new)[0]:
        row = overlap[k]
        if abs(row.max() - 1.0) > tol:
            raise InvalidModelError(
                f"intermediate bases disagree on the support of θ (overlap {row.max():.3e})"
            )
    stoch = m2.stochastic @ overlap @ m1.stochastic
    return ClassicalModel(
        basis_A=m1.basis_A,
        basis_B=m2.basis_B,
        stochastic=stoch,
        diag_rho=m1.diag_rho,
        diag_theta=m2.diag_theta,
    )
