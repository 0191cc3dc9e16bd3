"""States over time ``F⋆ω`` and executable checks of the five axioms.

``F⋆ω = ½(ω∘bloom(F) + ω∘swapped_bloom(F))`` for ``F: B -> A`` and a functional
``ω`` on ``A``.  Its density is the Jordan product
``½(D[F](ρ⊗1) + (ρ⊗1)D[F])`` with ``ρ`` the density of ``ω``.

The channel version ``G⋆F = ½(F∘bloom(G) + F∘swapped_bloom(G))`` takes
``G: C -> B`` and ``F: B -> A`` to a map ``B⊗C -> A``; with ``F = ω`` a
functional this is literally ``star(G, ω)`` (``A⊗B`` there is ``B⊗C`` here
after renaming), so no re-labelling is needed.  Because tensor coordinates are
lexicographic, ``A⊗(B⊗C)`` and ``(A⊗B)⊗C`` share coordinates and both sides of
the associativity laws can be compared entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ._tol import resolve_tol
from .algebra import (
    AlgebraElement,
    ShapeMismatchError,
    identity,
    jordan_product,
    tensor,
)
from .cj import (
    bloom,
    channel_density,
    channel_state,
    channel_state_inverse,
    partial_trace_left,
    partial_trace_right,
    swapped_bloom,
)
from .linmap import (
    LinearMap,
    compose,
    dagger_violation,
    density_of,
    evaluate,
    identity_map,
    tensor_map,
    unit_map,
    unital_violation,
)


@dataclass(frozen=True)
class StateOverTime:
    functional: LinearMap
    density: AlgebraElement
    channel: LinearMap
    state: LinearMap

    def marginal_left(self) -> AlgebraElement:
        """Density of the restriction to ``A`` (should equal ``ρ``)."""
        return partial_trace_right(self.density, self.channel.codomain, self.channel.domain)

    def marginal_right(self) -> AlgebraElement:
        """Density of the restriction to ``B`` (should equal the density of ``ω∘F``)."""
        return partial_trace_left(self.density, self.channel.codomain, self.channel.domain)


def _check_functional_on(omega: LinearMap, f: LinearMap):
    if not omega.is_functional:
        raise ShapeMismatchError("star expects a functional; use star_channel for general codomains")
    if omega.domain != f.codomain:
        raise ShapeMismatchError(
            f"state lives on {omega.domain.blocks} but the channel lands in {f.codomain.blocks}"
        )


def star_functional(f: LinearMap, omega: LinearMap) -> LinearMap:
    """The functional route: ``½(ω∘bloom(F) + ω∘swapped_bloom(F))``."""
    _check_functional_on(omega, f)
    return star_channel(f, omega)


def star_density(f: LinearMap, omega: LinearMap) -> AlgebraElement:
    """The density route: Jordan product of ``D[F]`` with ``ρ⊗1``."""
    _check_functional_on(omega, f)
    rho = density_of(omega)
    return jordan_product(channel_density(f).value, tensor(rho, identity(f.domain)))


def star(f: LinearMap, omega: LinearMap) -> StateOverTime:
    return StateOverTime(
        functional=star_functional(f, omega),
        density=star_density(f, omega),
        channel=f,
        state=omega,
    )


def star_channel(g: LinearMap, f: LinearMap) -> LinearMap:
    """``G⋆F = ½(F∘bloom(G) + F∘swapped_bloom(G))``, a map ``B⊗C -> A``."""
    if g.codomain != f.domain:
        raise ShapeMismatchError(
            f"G lands in {g.codomain.blocks} but F starts from {f.domain.blocks}"
        )
    return 0.5 * (compose(f, bloom(g)) + compose(f, swapped_bloom(g)))


def extend_left(a_shape, g: LinearMap) -> LinearMap:
    """``!_A ⊗ G``: ``c ↦ 1_A ⊗ G(c)`` (domain ``C⊗C`` is identified with ``C``)."""
    return tensor_map(unit_map(a_shape), g)


def channel_associativity_sides(g: LinearMap, f: LinearMap, omega: LinearMap):
    """Both sides of ``(G⋆F)⋆ω = (!_A⊗G)⋆(F⋆ω)`` as functionals on ``A⊗B⊗C``."""
    lhs = star_channel(star_channel(g, f), omega)
    rhs = star_channel(extend_left(f.codomain, g), star_channel(f, omega))
    return lhs, rhs


def associativity_sides(g: LinearMap, f: LinearMap, omega: LinearMap):
    """Both sides of the compositionality axiom written with ``S`` and ``S⁻¹``.

    Left: ``(!_A⊗G)⋆(F⋆ω)``.  Right: ``(S⁻¹[(!_A⊗G)⋆S[F]])⋆ω``, where ``S⁻¹``
    is taken on the hom-space ``B⊗C -> A``.
    """
    a, b, c = f.codomain, f.domain, g.domain
    lifted = extend_left(a, g)
    lhs = star_functional(lifted, star_functional(f, omega))
    joint = star_functional(lifted, channel_state(f))
    h = channel_state_inverse(joint, domain=b.tensor(c), codomain=a)
    rhs = star_functional(h, omega)
    return lhs, rhs


# axiom checks


@dataclass
class AxiomReport:
    """Outcome of one axiom check.

    ``passed`` is true when every sub-check whose precondition holds stays
    within ``tol``; unmet preconditions make the corresponding sub-check
    vacuous and are listed in ``details``.
    """

    axiom: str
    passed: bool
    max_violation: float
    tol: float
    preconditions_met: bool = True
    witness: Optional[Any] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "axiom": self.axiom,
            "passed": self.passed,
            "max_violation": self.max_violation,
            "tol": self.tol,
            "preconditions_met": self.preconditions_met,
            "details": self.details,
        }
        if isinstance(self.witness, AlgebraElement):
            from .io import encode_element

            out["witness"] = encode_element(self.witness)
            out["witness_norm"] = self.witness.norm()
        return out


def _functional_unital_violation(omega: LinearMap) -> float:
    return abs(evaluate(omega, identity(omega.domain)) - 1.0)


def check_axiom_a(f: LinearMap, omega: LinearMap, tol=None) -> AxiomReport:
    """Hermiticity and unitality."""
    tol = resolve_tol(tol)
    sot = star(f, omega)
    details = {}
    violations = []

    herm_pre = dagger_violation(f) <= tol and dagger_violation(omega) <= tol
    herm = max(dagger_violation(sot.functional), (sot.density - sot.density.dagger()).norm())
    details["hermiticity"] = {"precondition": herm_pre, "violation": herm}
    if herm_pre:
        violations.append(herm)

    unital_pre = unital_violation(f) <= tol and _functional_unital_violation(omega) <= tol
    unit = _functional_unital_violation(sot.functional)
    details["unitality"] = {"precondition": unital_pre, "violation": unit}
    if unital_pre:
        violations.append(unit)

    worst = max(violations, default=0.0)
    witness = None
    if herm_pre and herm > tol:
        witness = sot.density - sot.density.dagger()
    return AxiomReport("a", worst <= tol, worst, tol, herm_pre and unital_pre, witness, details)


def check_axiom_b(f: LinearMap, g: LinearMap, omega: LinearMap, xi: LinearMap, lam=0.5, tol=None) -> AxiomReport:
    """Linearity in each slot for the mixture ``lam·x + (1-lam)·y``.

    ``lam`` may be any complex number, which checks full bilinearity.
    """
    tol = resolve_tol(tol)
    mix_map = star_functional(lam * f + (1 - lam) * g, omega)
    sep_map = lam * star_functional(f, omega) + (1 - lam) * star_functional(g, omega)
    mix_state = star_functional(f, lam * omega + (1 - lam) * xi)
    sep_state = lam * star_functional(f, omega) + (1 - lam) * star_functional(f, xi)
    v_map = mix_map.distance(sep_map)
    v_state = mix_state.distance(sep_state)
    worst = max(v_map, v_state)
    details = {"channel_slot": v_map, "state_slot": v_state, "lambda": [float(np.real(lam)), float(np.imag(lam))]}
    witness = density_of(mix_map - sep_map) if v_map >= v_state else density_of(mix_state - sep_state)
    return AxiomReport("b", worst <= tol, worst, tol, True, witness, details)


def check_axiom_c(f: LinearMap, omega: LinearMap, model=None, tol=None) -> AxiomReport:
    """Classical limit: ``F⋆ω = ω∘bloom(F)`` for effectively classical pairs.

    A supplied ``model`` is validated first (``InvalidModelError`` if it is not a
    classical model of the pair).  Without one, :func:`find_classical_model` is
    tried; if the pair is not classical the check is vacuous and the report
    carries the bloom-symmetry and commutator diagnostics.
    """
    from .classical import (
        NotClassicalError,
        bloom_symmetry_check,
        commutator_check,
        find_classical_model,
        validate_model,
    )

    tol = resolve_tol(tol)
    details = {}
    if model is not None:
        validate_model(model, f, omega, tol=max(tol, 1e-9))
        classical = True
    else:
        try:
            model = find_classical_model(f, omega, tol=tol)
            classical = True
        except NotClassicalError as exc:
            classical = False
            details["not_classical"] = exc.reason
        except ValueError as exc:
            classical = False
            details["not_classical"] = str(exc)

    sym_ok, sym_norm = bloom_symmetry_check(f, omega, tol)
    com_ok, com_norm = commutator_check(f, omega, tol)
    details.update(
        bloom_symmetric=sym_ok,
        bloom_asymmetry=sym_norm,
        densities_commute=com_ok,
        commutator_norm=com_norm,
    )
    sot_c, bloomed = star_functional(f, omega), compose(omega, bloom(f))
    gap = sot_c - bloomed
    violation = sot_c.distance(bloomed)
    details["violation"] = violation
    if not classical:
        return AxiomReport("c", True, 0.0, tol, False, None, details)
    return AxiomReport("c", violation <= tol, violation, tol, True, density_of(gap), details)


def check_axiom_d(f: LinearMap, omega: LinearMap, tol=None) -> AxiomReport:
    """Marginals: ``(F⋆ω)∘i_A = ω`` and ``(F⋆ω)∘i_B = ω∘F`` for unital ``F``."""
    tol = resolve_tol(tol)
    a, b = f.codomain, f.domain
    sot = star(f, omega)
    incl_a = tensor_map(identity_map(a), unit_map(b))
    incl_b = tensor_map(unit_map(a), identity_map(b))
    v_a = compose(sot.functional, incl_a).distance(omega)
    v_b = compose(sot.functional, incl_b).distance(compose(omega, f))
    # density route as a second opinion
    d_a = (sot.marginal_left() - density_of(omega)).norm()
    d_b = (sot.marginal_right() - density_of(compose(omega, f))).norm()
    pre = unital_violation(f) <= tol
    worst = max(v_a, v_b, d_a, d_b)
    details = {
        "precondition_unital": pre,
        "left_marginal": max(v_a, d_a),
        "right_marginal": max(v_b, d_b),
    }
    if not pre:
        return AxiomReport("d", True, 0.0, tol, False, None, details)
    if max(v_a, d_a) >= max(v_b, d_b):
        witness = sot.marginal_left() - density_of(omega)
    else:
        witness = sot.marginal_right() - density_of(compose(omega, f))
    return AxiomReport("d", worst <= tol, worst, tol, True, witness, details)


def check_axiom_e(f: LinearMap, g: LinearMap, omega: LinearMap, tol=None) -> AxiomReport:
    """Compositionality for ``C --G--> B --F--> A`` and ``ω`` on ``A``.

    Evaluates the ``S``/``S⁻¹`` formulation and the channel form
    ``(G⋆F)⋆ω = (!_A⊗G)⋆(F⋆ω)``; both must hold and agree with each other.
    """
    tol = resolve_tol(tol)
    if g.codomain != f.domain:
        raise ShapeMismatchError(
            f"G lands in {g.codomain.blocks} but F starts from {f.domain.blocks}"
        )
    pre = (
        unital_violation(f) <= tol
        and unital_violation(g) <= tol
        and _functional_unital_violation(omega) <= tol
    )
    lhs, rhs = associativity_sides(g, f, omega)
    ch_lhs, ch_rhs = channel_associativity_sides(g, f, omega)
    v_cj = lhs.distance(rhs)
    v_channel = ch_lhs.distance(ch_rhs)
    v_cross = rhs.distance(ch_lhs)
    worst = max(v_cj, v_channel, v_cross)
    details = {
        "precondition_unital": pre,
        "cj_form": v_cj,
        "channel_form": v_channel,
        "forms_agree": v_cross,
    }
    if not pre:
        return AxiomReport("e", True, 0.0, tol, False, None, details)
    gaps = {v_cj: lhs - rhs, v_channel: ch_lhs - ch_rhs, v_cross: rhs - ch_lhs}
    return AxiomReport("e", worst <= tol, worst, tol, True, density_of(gaps[worst]), details)
