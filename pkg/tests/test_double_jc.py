import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from entlab import double_jc as djc
from entlab.errors import ContractViolation
from entlab.measures import concurrence
from entlab.qstate import DensityMatrix, NamedState, named_ket, partial_trace

seeds = st.integers(0, 2**32 - 1)
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)
SZ = np.diag([-1.0, 1.0]).astype(complex)


def site(op, k):
    return reduce(np.kron, [op if j == k else np.eye(2) for j in range(4)])


def h16(p):
    """Two uncoupled JC pairs in the frame rotating at the field frequency."""
    h = np.zeros((16, 16), dtype=complex)
    for atom, field, g, d in ((0, 2, p.g1, p.delta1), (1, 3, p.g2, p.delta2)):
        s, a = site(LOWER, atom), site(LOWER, field)
        h += d * site(SZ, atom) + g * (s.conj().T @ a + s @ a.conj().T)
    return h


def pairs16(v):
    rho = DensityMatrix(np.outer(v, v.conj()))
    return np.array([concurrence(partial_trace(rho, [2] * 4, [djc.SUBSYSTEMS[p[0]], djc.SUBSYSTEMS[p[1]]])) for p in djc.PAIRS])


def random_params(rng):
    return djc.JCParams(rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2))


@given(seeds)
def test_one_excitation_closed_form_matches_generator(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    d0 = djc.amplitudes("one", z / np.linalg.norm(z))
    p = random_params(rng)
    t = rng.uniform(0, 10)
    ref = expm(-1j * djc.single_exc_generator(p) * t) @ d0.d
    assert np.allclose(djc.single_exc_evolve(d0, p, t).d, ref, atol=1e-12)


@given(seeds)
def test_one_excitation_concurrences_match_full_space(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    d0 = djc.amplitudes("one", z / np.linalg.norm(z))
    p = random_params(rng)
    t = rng.uniform(0, 5)
    v = expm(-1j * h16(p) * t) @ d0.ket16()
    assert np.allclose(djc.pair_concurrences_single(djc.single_exc_evolve(d0, p, t)).values(), pairs16(v), atol=1e-9)


@given(seeds)
def test_two_excitation_concurrences_match_full_space(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    z /= np.linalg.norm(z)
    d0 = djc.amplitudes("two", z[:4], z[4])
    p = random_params(rng)
    t = rng.uniform(0, 5)
    v = expm(-1j * h16(p) * t) @ d0.ket16()
    assert np.allclose(djc.pair_concurrences_double(djc.double_exc_evolve(d0, p, t)).values(), pairs16(v), atol=1e-9)


def test_amplitude_validation():
    with pytest.raises(ContractViolation):
        djc.amplitudes("one", [1, 1, 0, 0])
    with pytest.raises(ContractViolation):
        djc.amplitudes("three", [1, 0, 0, 0])
    with pytest.raises(ContractViolation):
        djc.amplitudes("one", [1, 0, 0, 0], d0=0.5)
    with pytest.raises(ContractViolation):
        djc.single_exc_evolve(djc.chi_sd(0.3), djc.JCParams(), 1.0)


def test_double_exc_at_zero_time_is_identity():
    d0 = djc.chi_sd(0.4, 0.2)
    assert djc.double_exc_evolve(d0, djc.JCParams(), 0.0) is d0


def test_chisd_matches_named_state():
    assert np.allclose(djc.chi_sd(math.pi / 7, 0.3).ket16(), named_ket(NamedState("ChiSD", alpha=math.pi / 7, beta=0.3)))


@given(st.floats(0.0, 3.0), st.floats(0.0, 20.0))
def test_resonant_equal_coupling_closed_form(delta, gt):
    d0 = djc.amplitudes("one", np.array([1, 1, 0, 0]) / math.sqrt(2))
    num = djc.pair_concurrences_single(djc.single_exc_evolve(d0, djc.JCParams(1, 1, delta, delta), gt))
    assert np.allclose(djc.resonant_equal_coupling_concurrences(delta, gt).values(), num.values(), atol=1e-12)


@given(st.floats(0.1, 5.0), st.floats(0.0, 20.0))
def test_steered_transfer_closed_form(ratio, gt):
    d0 = djc.amplitudes("one", np.array([1, 1, 0, 0]) / math.sqrt(2))
    num = djc.pair_concurrences_single(djc.single_exc_evolve(d0, djc.JCParams(1, ratio, 0, 0), gt))
    assert np.allclose(djc.steered_transfer(ratio, gt).values(), num.values(), atol=1e-12)


@pytest.mark.parametrize(
    "ratio,dest", [(1.0, "ab"), (2.0, "Ba"), (3.0, "ab"), (4.0, "Ba"), (0.5, "Ab"), (1 / 3, "ab"), (2.5, None), (math.sqrt(2), None)]
)
def test_transfer_destination(ratio, dest):
    assert djc.transfer_destination(ratio) == dest
    if dest is not None:
        assert djc.pair_supremum(ratio, dest) > 1 - 1e-6


def test_transfer_destination_rejects_nonpositive():
    with pytest.raises(ContractViolation):
        djc.transfer_destination(0.0)


def test_irrational_ratio_never_completes_transfer_on_window():
    assert djc.pair_supremum(math.sqrt(2), "Ba", t_max=20.0) < 0.999


@pytest.mark.parametrize("sign", [1, -1])
def test_frozen_state_on_resonance(sign):
    scans = djc.frozen_state_scan(0.4, 0.4, 0.0, np.linspace(0, 30, 301), sign=sign)
    assert max(np.max(np.abs(pc.values() - 0.5)) for pc in scans) < 1e-12


def test_frozen_state_needs_matched_phases():
    scans = djc.frozen_state_scan(math.pi / 2, 0.0, 0.0, np.linspace(0, 3, 31))
    assert max(np.max(np.abs(pc.values() - 0.5)) for pc in scans) > 0.1


def test_detuned_frozen_state_feeds_one_cross_pair():
    gt = np.linspace(0, 30, 30001)
    plus = djc.frozen_state_scan(0.0, 0.0, 1.0, gt, sign=1)
    minus = djc.frozen_state_scan(0.0, 0.0, 1.0, gt, sign=-1)
    assert max(pc.c_Ab for pc in plus) > 0.99
    assert max(pc.c_Ba for pc in minus) > 0.99


def test_pair_concurrences_general_equals_closed_forms():
    d = djc.double_exc_evolve(djc.chi_sd(math.pi / 12), djc.JCParams(1, 1.2, 0.3, 0.1), 2.3)
    assert np.allclose(djc.pair_concurrences_general(d).values(), djc.pair_concurrences_double(d).values(), atol=1e-12)


def test_rabi_rejects_zero():
    with pytest.raises(ContractViolation):
        djc.JCParams(0, 1, 0, 0).rabi(1)
