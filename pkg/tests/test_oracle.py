import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from cvtele.exceptions import CutoffOverflow, InvalidQubit, ZeroOutput
from cvtele.fockspace import FockVector, cat_even, coherent, fock
from cvtele.oracle import (
    BellLabel,
    MultiModeState,
    apply_beam_splitter,
    apply_nsplitter,
    bell_outcomes,
    compare_with_closed_form,
    herald_vacuum,
    oracle_teleport,
    resource_state,
    simulate_qubit_teleporter,
    truncate_mode_to_qubit,
)
from cvtele.teleporter import teleport_pure

S2 = 1 / math.sqrt(2)


def assert_terms_close(state, expected, atol=1e-12):
    keys = set(state.terms) | set(expected)
    for k in keys:
        assert abs(state.amplitude(k) - expected.get(k, 0)) < atol, k


# -- beam splitter ------------------------------------------------------------


def test_bs_single_photon():
    out = apply_beam_splitter(MultiModeState(2, {(1, 0): 1}, 2), 0, 1, 0.5)
    assert_terms_close(out, {(1, 0): S2, (0, 1): -S2})


def test_bs_hong_ou_mandel():
    out = apply_beam_splitter(MultiModeState(2, {(1, 1): 1}, 2), 0, 1, 0.5)
    assert_terms_close(out, {(2, 0): S2, (0, 2): -S2})


def test_bs_identity_at_full_transmission():
    s = MultiModeState(3, {(1, 2, 0): 0.6, (0, 1, 1): 0.8j}, 4)
    assert apply_beam_splitter(s, 0, 1, 1.0).terms == s.terms


def dense_bs(total, t):
    """Two-mode beam splitter from expm of the photon-hopping generator."""
    d = total + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    ai, aj = np.kron(a, np.eye(d)), np.kron(np.eye(d), a)
    theta = math.acos(math.sqrt(t))
    return expm(theta * (ai.T @ aj - aj.T @ ai))


@pytest.mark.parametrize("t", [0.1, 0.5, 0.83])
@pytest.mark.parametrize("occ", [(1, 0), (0, 1), (2, 1), (3, 0), (1, 3)])
def test_bs_matches_dense_generator(t, occ):
    total = sum(occ)
    # dimension total+2 keeps the truncated generator exact on the block
    d = total + 2
    u = dense_bs(d - 1, t)
    vec = np.zeros(d * d)
    vec[occ[0] * d + occ[1]] = 1
    dense = u @ vec
    out = apply_beam_splitter(MultiModeState(2, {occ: 1}, total), 0, 1, t)
    for i in range(d):
        for j in range(d):
            assert out.amplitude((i, j)) == pytest.approx(dense[i * d + j], abs=1e-12)


def _random_multimode(data, n_modes, max_photons):
    terms = {}
    for _ in range(data.draw(st.integers(1, 5))):
        occ = tuple(data.draw(st.integers(0, 2)) for _ in range(n_modes))
        if sum(occ) <= max_photons:
            terms[occ] = complex(data.draw(st.floats(-1, 1)), data.draw(st.floats(-1, 1)))
    norm = math.sqrt(sum(abs(v) ** 2 for v in terms.values()))
    if norm < 1e-6:
        terms = {(0,) * n_modes: 1.0}
        norm = 1.0
    return MultiModeState(n_modes, {k: v / norm for k, v in terms.items()}, max_photons)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_bs_unitarity_property(data):
    state = _random_multimode(data, 3, 6)
    i, j = data.draw(st.sampled_from([(0, 1), (1, 2), (2, 0)]))
    t = data.draw(st.floats(0, 1))
    out = apply_beam_splitter(state, i, j, t)
    assert out.norm2 == pytest.approx(state.norm2, abs=1e-12)
    # photon number conserved sector by sector
    for n in state.photon_numbers() | out.photon_numbers():
        w_in = sum(abs(a) ** 2 for o, a in state.terms.items() if sum(o) == n)
        w_out = sum(abs(a) ** 2 for o, a in out.terms.items() if sum(o) == n)
        assert w_in == pytest.approx(w_out, abs=1e-12)
    back = apply_beam_splitter(out, j, i, t)
    assert_terms_close(back, state.terms)


def test_bs_rejects_bad_arguments():
    s = MultiModeState(2, {(1, 0): 1}, 2)
    with pytest.raises(ValueError):
        apply_beam_splitter(s, 0, 0, 0.5)
    with pytest.raises(ValueError):
        apply_beam_splitter(s, 0, 1, 1.5)
    with pytest.raises(IndexError):
        apply_beam_splitter(s, 0, 2, 0.5)


def test_state_cutoff_overflow():
    with pytest.raises(CutoffOverflow):
        MultiModeState(2, {(2, 1): 1}, 2)


# -- N-splitter ---------------------------------------------------------------


def test_nsplitter_coherent_product():
    mm = MultiModeState.embed(coherent(1, 12), 3, 12)
    split = apply_nsplitter(mm, [0, 1, 2])
    ref = MultiModeState.product([coherent(1 / math.sqrt(3), 12)] * 3, 36)
    ov = sum(np.conj(ref.amplitude(o)) * a for o, a in split.terms.items())
    assert abs(ov) ** 2 >= 1 - 1e-9


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_nsplitter_inverse_is_identity(N):
    mm = MultiModeState.embed(cat_even(1.0), N, 8)
    back = apply_nsplitter(apply_nsplitter(mm, range(N)), range(N), inverse=True)
    assert_terms_close(back, mm.terms)


def test_nsplitter_single_photon_resource():
    out = apply_nsplitter(MultiModeState(2, {(1, 0): 1}, 1), [0, 1])
    assert_terms_close(out, {(1, 0): S2, (0, 1): S2})
    assert_terms_close(resource_state(), {(1, 0): S2, (0, 1): S2})


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_nsplitter_even_single_photon_split(N):
    out = apply_nsplitter(MultiModeState(N, {(1,) + (0,) * (N - 1): 1}, 1), range(N))
    for m in range(N):
        occ = [0] * N
        occ[m] = 1
        assert out.amplitude(occ) == pytest.approx(1 / math.sqrt(N), abs=1e-12)


# -- truncation and heralding ----------------------------------------------------


def test_truncate_examples():
    for k in (0, 1):
        s = MultiModeState.embed(fock(k), 1, 3)
        assert truncate_mode_to_qubit(s, 0).terms == s.terms
    assert truncate_mode_to_qubit(MultiModeState.embed(fock(2), 1, 3), 0).norm2 == 0
    surv = truncate_mode_to_qubit(MultiModeState.embed(coherent(1, 14), 1, 14), 0).norm2
    assert surv == pytest.approx(2 * math.exp(-1), abs=1e-9)


def test_herald_examples():
    vac = MultiModeState(3, {(0, 0, 0): 1}, 2)
    state, p = herald_vacuum(vac, [1, 2])
    assert p == 1
    np.testing.assert_array_equal(state.amps[:1], [1])
    split = MultiModeState(2, {(1, 0): S2, (0, 1): S2}, 1)
    state, p = herald_vacuum(split, [1])
    assert p == pytest.approx(0.5)
    np.testing.assert_allclose(state.amps, [0, 1], atol=1e-15)


def test_herald_errors():
    with pytest.raises(ZeroOutput):
        herald_vacuum(MultiModeState(2, {(0, 1): 1}, 1), [1])
    with pytest.raises(ValueError):
        herald_vacuum(MultiModeState(3, {(0, 0, 0): 1}, 1), [1])


# -- full oracle pipeline -------------------------------------------------------


def test_oracle_single_photon():
    rep = oracle_teleport(fock(1), 2)
    assert rep.p_success == pytest.approx(1, abs=1e-12)
    assert abs(rep.output.amps[1]) == pytest.approx(1, abs=1e-12)


def test_oracle_two_photons_n2():
    rep = oracle_teleport(fock(2), 2)
    # both photons split to different arms (1/2) then recombine into one port (1/2)
    assert rep.p_success == pytest.approx(0.25, abs=1e-12)
    assert abs(rep.output.amps[2]) == pytest.approx(1, abs=1e-12)


def test_oracle_coherent_n3():
    state = coherent(1.0)
    rep = oracle_teleport(state, 3, 8)
    closed = teleport_pure(state, 3)
    n = closed.output.cutoff
    ov = np.vdot(rep.output.padded(n), closed.output.amps)
    assert abs(ov) ** 2 >= 1 - 1e-10
    assert rep.p_success == pytest.approx(closed.p_success, abs=1e-10)


INPUTS = {
    "fock0": fock(0),
    "fock1": fock(1),
    "fock2": fock(2),
    "coherent0.5": coherent(0.5),
    "coherent1": coherent(1.0),
    "cat1": cat_even(1.0),
}


@pytest.mark.parametrize("name", INPUTS)
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_oracle_equivalence(name, N):
    case = compare_with_closed_form(INPUTS[name], N, 8)
    assert case["p_success_dev"] <= 1e-10
    assert case["fidelity_dev"] <= 1e-10
    assert case["output_overlap_infidelity"] <= 1e-10


def test_oracle_zero_output_case_agrees():
    case = compare_with_closed_form(fock(2), 1, 8)
    assert case["p_success_oracle"] == case["p_success_closed"] == 0
    assert case["fidelity_oracle"] is None


def test_oracle_ancilla_permutation_symmetry():
    state = coherent(0.8 + 0.3j)
    a = oracle_teleport(state, 3, 8)
    b = oracle_teleport(state, 3, 8, ancilla_order=[2, 1])
    np.testing.assert_allclose(a.output.amps, b.output.amps, atol=1e-14)
    assert a.p_success == pytest.approx(b.p_success, abs=1e-14)


def test_oracle_guards():
    with pytest.raises(ValueError):
        oracle_teleport(fock(1), 7, 8)
    with pytest.raises(ValueError):
        oracle_teleport(fock(1), 3, 11)
    with pytest.raises(ValueError):
        oracle_teleport(fock(1), 4, 3)
    with pytest.raises(ValueError):
        oracle_teleport(fock(1), 3, 8, ancilla_order=[1, 1])


# -- explicit Bell measurement ------------------------------------------------------


def test_qubit_teleporter_vacuum_phi_plus():
    out = simulate_qubit_teleporter(fock(0), BellLabel.PHI_PLUS)
    assert out.probability == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_allclose(out.conditioned_state.normalized().amps, [1, 0], atol=1e-15)


def test_qubit_teleporter_plus_state_phi_minus():
    q = FockVector([S2, S2])
    out = simulate_qubit_teleporter(q, "phi_minus")
    assert out.probability == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_allclose(out.conditioned_state.normalized().amps, [S2, S2], atol=1e-15)


@pytest.mark.parametrize("seed", range(4))
def test_qubit_teleporter_outcome_budget(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    q = FockVector(v / np.linalg.norm(v))
    outs = bell_outcomes(q)
    assert sum(o.probability for o in outs.values()) == pytest.approx(1, abs=1e-12)
    assert sum(o.probability for o in outs.values() if o.success) == pytest.approx(0.5, abs=1e-12)
    a, b = q.amps
    # zero_zero pairs the input vacuum with the resource photon on the far side
    assert outs[BellLabel.ZERO_ZERO].probability == pytest.approx(abs(a) ** 2 / 2, abs=1e-12)
    assert outs[BellLabel.ONE_ONE].probability == pytest.approx(abs(b) ** 2 / 2, abs=1e-12)
    np.testing.assert_allclose(outs[BellLabel.ZERO_ZERO].conditioned_state.amps, [0, a * S2], atol=1e-15)
    np.testing.assert_allclose(outs[BellLabel.ONE_ONE].conditioned_state.amps, [b * S2, 0], atol=1e-15)


@pytest.mark.parametrize("label", [BellLabel.PHI_PLUS, BellLabel.PHI_MINUS])
def test_qubit_teleporter_equals_truncation(label):
    rng = np.random.default_rng(11)
    for _ in range(5):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        q = FockVector(v / np.linalg.norm(v))
        cond = simulate_qubit_teleporter(q, label).conditioned_state
        trunc = truncate_mode_to_qubit(MultiModeState.embed(q, 1, 1), 0)
        np.testing.assert_allclose(2 * cond.amps, [trunc.amplitude((k,)) for k in range(2)], atol=1e-15)


def test_qubit_teleporter_rejects_higher_support():
    with pytest.raises(InvalidQubit):
        simulate_qubit_teleporter(FockVector([0.6, 0, 0.8]), "phi_plus")
