import numpy as np
import pytest

from qsot.algebra import AlgebraElement, ShapeMismatchError, basis, identity, tensor, trace
from qsot.cj import (
    ChannelDensity,
    bloom,
    channel_density,
    channel_state,
    cj_inverse,
    cj_inverse_partial_trace,
    partial_trace_left,
    partial_trace_right,
    swapped_bloom,
)
from qsot.linmap import (
    dagger_violation,
    evaluate,
    hermitian_part,
    hs_adjoint,
    identity_map,
    trace_functional,
    unit_map,
)
from qsot.sampling import random_element, random_map, rng_from

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def _density_oracle(f):
    """``Σ_ij E_ij ⊗ f*(E_ij)†`` over matrix units of the codomain."""
    adj = hs_adjoint(f)
    terms = [tensor(e, adj.apply(e).dagger()) for e in basis(f.codomain)]
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def test_blooms_act_as_products():
    rng = rng_from(0)
    f = random_map((2, 1), (3, 1), rng)
    a, b = random_element((3, 1), rng), random_element((2, 1), rng)
    assert (bloom(f).apply(tensor(a, b)) - a @ f.apply(b)).norm() < 1e-12
    assert (swapped_bloom(f).apply(tensor(a, b)) - f.apply(b) @ a).norm() < 1e-12


def test_identity_density_is_swap():
    d = channel_density(identity_map((2,))).value
    assert np.abs(d.matrix - SWAP).max() == 0


def test_density_pairing_defines_it():
    rng = rng_from(1)
    f = random_map((2,), (2, 1), rng)
    d = channel_density(f).value
    a, b = random_element((2, 1), rng), random_element((2,), rng)
    assert abs(trace(d @ tensor(a, b)) - trace(a @ f.apply(b))) < 1e-12
    assert abs(evaluate(channel_state(f), tensor(a, b)) - trace(a @ f.apply(b))) < 1e-12


def test_density_matches_matrix_unit_formula():
    rng = rng_from(2)
    f = random_map((2, 2), (3,), rng)
    assert (channel_density(f).value - _density_oracle(f)).norm() < 1e-13


def test_density_is_entry_permutation_for_single_blocks():
    # D[(i,k),(j,l)] = F(E_lk)_ij
    rng = rng_from(3)
    f = random_map((2,), (3,), rng)
    d = channel_density(f).value.matrix.reshape(3, 2, 3, 2)
    fr = f.matrix.reshape(3, 3, 2, 2)
    assert np.abs(d - fr.transpose(0, 3, 1, 2)).max() == 0


def test_cj_inverse_two_routes():
    rng = rng_from(4)
    for dom, cod in [((2,), (2,)), ((2, 1), (3,)), ((1, 2), (2, 1))]:
        f = random_map(dom, cod, rng)
        d = channel_density(f)
        assert cj_inverse(d).distance(f) < 1e-12
        assert cj_inverse_partial_trace(d).distance(f) < 1e-12


def test_channel_density_rejects_wrong_split():
    d = channel_density(identity_map((2,))).value
    with pytest.raises(ShapeMismatchError):
        ChannelDensity(d, identity_map((3,)).domain, identity_map((2,)).domain)


def test_trace_channel_density():
    # F = !∘tr has D = 1⊗1
    f = unit_map((2,)) @ trace_functional((3,))
    d = channel_density(f).value
    assert (d - AlgebraElement.from_matrix(np.eye(6))).norm() == 0


def test_partial_traces():
    rng = rng_from(5)
    a, b = random_element((2, 1), rng), random_element((1, 2), rng)
    ab = tensor(a, b)
    assert (partial_trace_right(ab, (2, 1), (1, 2)) - trace(b) * a).norm() < 1e-13
    assert (partial_trace_left(ab, (2, 1), (1, 2)) - trace(a) * b).norm() < 1e-13
    m = random_element((6,), rng)
    dense = m.matrix.reshape(2, 3, 2, 3)
    assert np.abs(partial_trace_left(m, (2,), (3,)).matrix - np.einsum("ikil->kl", dense)).max() < 1e-14
    with pytest.raises(ShapeMismatchError):
        partial_trace_left(m, (2,), (2,))


def test_dagger_preserving_maps_have_selfadjoint_density():
    rng = rng_from(6)
    f = random_map((2, 1), (2,), rng)
    h = hermitian_part(f)
    d = channel_density(h).value
    assert (d - d.dagger()).norm() < 1e-14
    assert dagger_violation(channel_state(h)) < 1e-14
    d_gen = channel_density(f).value
    assert (d_gen - d_gen.dagger()).norm() > 1e-3
