"""Numerical studies: the EPR state over time, the noise cube and the LS comparison.

All studies use ``A = B = M_2``, ``F = id`` (except EPR) and
``ρ_p = diag(p, 1-p)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, identity, tensor
from .linmap import (
    LinearMap,
    cp_violation,
    dagger_violation,
    density_of,
    from_function,
    functional_of,
    identity_map,
    trace_functional,
    unit_map,
    unital_violation,
)
from .sot import StateOverTime, star, star_density
from .cj import channel_density

POSITIVITY_TOL = 1e-10
MIXTURE_TOL = 1e-12


class AnomalyError(ArithmeticError):
    """A numerical result that should be impossible (never silently repaired)."""


def _check_unit_interval(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} = {value} is outside [0, 1]")


# noise


def depolarize_state(omega: LinearMap, epsilon: float) -> LinearMap:
    """``(1-ε)ω + ε·tr/d`` on ``M_d`` (``d = 2`` gives the qubit ``ε/2``)."""
    _check_unit_interval("epsilon", epsilon)
    d = omega.domain.dim
    return (1.0 - epsilon) * omega + (epsilon / d) * trace_functional(omega.domain)


def depolarize_map(f: LinearMap, delta: float) -> LinearMap:
    """``(1-δ)F + δ·(!∘tr)/d`` with ``d`` the dimension of the domain of ``F``."""
    _check_unit_interval("delta", delta)
    d = f.domain.dim
    replacement = unit_map(f.codomain) @ trace_functional(f.domain)
    return (1.0 - delta) * f + (delta / d) * replacement


def diag_state(p: float) -> LinearMap:
    _check_unit_interval("p", p)
    return functional_of(AlgebraElement.from_matrix(np.diag([p, 1.0 - p])))


def maximally_mixed(dim: int = 2) -> LinearMap:
    return (1.0 / dim) * trace_functional((dim,))


def noise_cube_density_closed_form(p: float, delta: float, epsilon: float) -> np.ndarray:
    """The displayed 4×4 density of the noised ``id ⋆ ω_p``."""
    ep = 1.0 - epsilon
    a = ep * p + epsilon / 2
    b = ep * (1.0 - p) + epsilon / 2
    off = (1.0 - delta) / 2
    return np.array(
        [
            [(1 - delta / 2) * a, 0, 0, 0],
            [0, delta / 2 * a, off, 0],
            [0, off, delta / 2 * b, 0],
            [0, 0, 0, (1 - delta / 2) * b],
        ],
        dtype=complex,
    )


def lambda_formula(p: float, delta: float, epsilon: float) -> float:
    """The published closed form for the possibly-negative eigenvalue.

    Evaluated literally.  It agrees with the true minimum eigenvalue when
    ``δ = 0`` or ``ε = 0`` but not in general; see :func:`lambda_exact`.
    A negative or non-finite radicand raises :class:`AnomalyError`; for real
    inputs the radicand is at least ``4(1-δ)²`` so only NaN can trigger it.
    """
    ep = 1.0 - epsilon
    radicand = 4 - 8 * delta + delta**2 * (
        5 - 4 * p * ep**2 + 4 * p**2 * ep**2 - 2 * ep * epsilon
    )
    if not radicand >= 0:
        raise AnomalyError(f"bad radicand {radicand!r} at p={p}, delta={delta}, epsilon={epsilon}")
    return 0.25 * (delta - np.sqrt(radicand))


def lambda_exact(p: float, delta: float, epsilon: float) -> float:
    """Smallest eigenvalue of the noised density, from its middle 2×2 block.

    ``¼(δ - √(4(1-δ)² + δ²(1-ε)²(2p-1)²))``.
    """
    radicand = 4 * (1 - delta) ** 2 + delta**2 * (1 - epsilon) ** 2 * (2 * p - 1) ** 2
    return 0.25 * (delta - np.sqrt(radicand))


def noised_inputs(p: float, delta: float, epsilon: float) -> tuple[LinearMap, LinearMap]:
    f = depolarize_map(identity_map((2,)), delta)
    omega = depolarize_state(diag_state(p), epsilon)
    return f, omega


def noised_star_density(p: float, delta: float, epsilon: float) -> AlgebraElement:
    f, omega = noised_inputs(p, delta, epsilon)
    return star_density(f, omega)


def _mixture_terms(p: float) -> tuple[AlgebraElement, ...]:
    """``F⋆ω``, ``F⋆(½tr)``, ``ρ⊗1`` and ``1⊗1`` for ``F = id``, ``ρ = diag(p, 1-p)``."""
    f = identity_map((2,))
    omega = diag_state(p)
    one = identity((2,))
    return (
        star_density(f, omega),
        star_density(f, maximally_mixed(2)),
        tensor(density_of(omega), one),
        tensor(one, one),
    )


def _mix(terms, delta: float, epsilon: float) -> AlgebraElement:
    sot_w, sot_tr, rho_one, one_one = terms
    return (
        (1 - delta) * (1 - epsilon) * sot_w
        + (1 - delta) * epsilon * sot_tr
        + (delta * (1 - epsilon) / 2) * rho_one
        + (delta * epsilon / 4) * one_one
    )


def mixture_star_density(p: float, delta: float, epsilon: float) -> AlgebraElement:
    """Four-term bilinear expansion of the noised state over time.

    ``(1-δ)(1-ε) F⋆ω + (1-δ)ε F⋆(½tr) + δ(1-ε)/2 ω⊗tr + δε/4 tr⊗tr`` with
    ``F = id``.  Expanding bilinearly, the ``(1-δ)ε`` term pairs ``F`` with the
    added noise ``½tr``, so it is ``F⋆(½tr) = (½tr)∘bloom(F)`` and not
    ``ω∘bloom(F)``.
    """
    return _mix(_mixture_terms(p), delta, epsilon)


@dataclass(frozen=True)
class SweepRecord:
    p: float
    delta: float
    epsilon: float
    min_eigenvalue: float
    lambda_formula: float
    positive: bool


def grid(n: int = 21) -> np.ndarray:
    """``n`` equally spaced points of ``[0, 1]`` including both ends."""
    if n < 2:
        raise ValueError("a grid needs at least two points")
    return np.linspace(0.0, 1.0, n)


def noise_sweep(p_grid=None, delta_grid=None, epsilon_grid=None, check_mixture: bool = True) -> list[SweepRecord]:
    """Spectrum of the noised ``id ⋆ ω_p`` over a grid, sorted by ``(p, δ, ε)``.

    Each density is built directly from the noised channel and state and, with
    ``check_mixture``, compared against the four-term expansion (an
    :class:`AnomalyError` is raised if they differ by more than 1e-12).
    """
    p_grid = grid() if p_grid is None else p_grid
    delta_grid = grid() if delta_grid is None else delta_grid
    epsilon_grid = grid() if epsilon_grid is None else epsilon_grid
    records = []
    for p in sorted(float(v) for v in p_grid):
        terms = _mixture_terms(p)
        for delta in sorted(float(v) for v in delta_grid):
            for epsilon in sorted(float(v) for v in epsilon_grid):
                dens = noised_star_density(p, delta, epsilon)
                if check_mixture:
                    gap = (dens - _mix(terms, delta, epsilon)).norm()
                    if gap > MIXTURE_TOL:
                        raise AnomalyError(f"mixture expansion off by {gap:.3e} at {(p, delta, epsilon)}")
                min_eig = float(np.linalg.eigvalsh(dens.to_dense())[0])
                records.append(
                    SweepRecord(p, delta, epsilon, min_eig, lambda_formula(p, delta, epsilon), min_eig >= -POSITIVITY_TOL)
                )
    return records


def monotonicity_violations(records: list[SweepRecord]) -> list[tuple[SweepRecord, SweepRecord]]:
    """Pairs ``(r, s)`` at equal ``p`` with ``s`` noisier in both ``δ`` and ``ε``,
    ``r`` positive and ``s`` not."""
    by_p: dict[float, list[SweepRecord]] = {}
    for r in records:
        by_p.setdefault(r.p, []).append(r)
    bad = []
    for rows in by_p.values():
        negatives = [s for s in rows if not s.positive]
        for r in rows:
            if not r.positive:
                continue
            for s in negatives:
                if s.delta >= r.delta and s.epsilon >= r.epsilon:
                    bad.append((r, s))
    return bad


# Leifer-Spekkens comparison

LS_EFFECTS = {
    "a": (
        np.array([[0.4, -0.2 + 0.2j], [-0.2 - 0.2j, 0.8]]),
        np.array([[0.6, -0.4 - 0.1j], [-0.4 + 0.1j, 0.5]]),
    ),
    "b": (
        np.array([[0.6, -0.4], [-0.4, 0.3]], dtype=complex),
        np.array([[0.7, 0.4], [0.4, 0.4]], dtype=complex),
    ),
}


def psd_sqrt(a: AlgebraElement, tol: float = 1e-10) -> AlgebraElement:
    """Principal square root blockwise; raises if ``a`` has an eigenvalue below ``-tol``."""
    blocks = []
    for blk in a.blocks:
        w, v = np.linalg.eigh(0.5 * (blk + blk.conj().T))
        if w.size and w[0] < -tol:
            raise ValueError(f"density is not positive semidefinite (eigenvalue {w[0]:.3e})")
        blocks.append((v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T)
    return AlgebraElement(a.shape, blocks)


def ls_density(f: LinearMap, omega: LinearMap, tol: float = 1e-10) -> AlgebraElement:
    """``(√ρ⊗1) D[F] (√ρ⊗1)``."""
    root = tensor(psd_sqrt(density_of(omega), tol), identity(f.domain))
    return root @ channel_density(f).value @ root


def _pairing(density: AlgebraElement, m: np.ndarray, n: np.ndarray) -> float:
    return float(np.real(np.trace(density.to_dense() @ np.kron(m, n))))


def prob_star(p: float, m: np.ndarray, n: np.ndarray) -> float:
    return _pairing(star_density(identity_map((2,)), diag_state(p)), m, n)


def prob_ls(p: float, m: np.ndarray, n: np.ndarray) -> float:
    return _pairing(ls_density(identity_map((2,)), diag_state(p)), m, n)


@dataclass(frozen=True)
class LsComparisonRecord:
    p: float
    prob_star: float
    prob_ls: float
    M: np.ndarray
    N: np.ndarray
    case: str = ""


def ls_tangency_scan(p_grid, m: np.ndarray, n: np.ndarray, case: str = "") -> list[LsComparisonRecord]:
    m, n = np.asarray(m, dtype=complex), np.asarray(n, dtype=complex)
    return [
        LsComparisonRecord(float(p), prob_star(p, m, n), prob_ls(p, m, n), m, n, case)
        for p in sorted(float(v) for v in p_grid)
    ]


def tangency_derivatives(m: np.ndarray, n: np.ndarray, p0: float = 0.5, h: float = 1e-5) -> tuple[float, float]:
    """Central differences of ``prob_star`` and ``prob_ls`` at ``p0``."""
    d_star = (prob_star(p0 + h, m, n) - prob_star(p0 - h, m, n)) / (2 * h)
    d_ls = (prob_ls(p0 + h, m, n) - prob_ls(p0 - h, m, n)) / (2 * h)
    return d_star, d_ls


def secant_deviation(xs, ys) -> float:
    """Largest distance of ``ys`` from the line through the first and last points."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    line = ys[0] + (ys[-1] - ys[0]) * (xs - xs[0]) / (xs[-1] - xs[0])
    return float(np.abs(ys - line).max())


# EPR

EPR_DENSITY = 0.5 * np.array(
    [[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]], dtype=complex
)


def epr_channel() -> LinearMap:
    """``B ↦ J Bᵀ J⁻¹`` with ``J = [[0, 1], [-1, 0]]``: positive, unital, not CP."""
    j = np.array([[0, 1], [-1, 0]], dtype=complex)
    j_inv = np.array([[0, -1], [1, 0]], dtype=complex)
    return from_function(lambda b: AlgebraElement.from_matrix(j @ b.matrix.T @ j_inv), (2,), (2,))


def epr_example() -> StateOverTime:
    f = epr_channel()
    if unital_violation(f) > 1e-14 or dagger_violation(f) > 1e-14:
        raise AnomalyError("EPR channel should be unital and †-preserving")
    if cp_violation(f) <= 1e-12:
        raise AnomalyError("EPR channel should not be completely positive")
    return star(f, maximally_mixed(2))
