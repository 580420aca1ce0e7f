import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlab import events
from entlab import free_space as fs
from entlab import lindblad
from entlab.errors import ContractViolation, PatternViolation
from entlab.qstate import DensityMatrix, NamedState, basis_transform, build_named_state, random_density

seeds = st.integers(0, 2**32 - 1)


# --- events ------------------------------------------------------------------


def test_crossings_of_a_sine():
    t = np.linspace(0.5, 10, 951)
    out = events.crossings(t, np.sin(t), f=math.sin)
    assert [d for _, d in out] == ["down", "up", "down"]
    assert np.allclose([x for x, _ in out], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-8)


def test_crossings_ignore_values_inside_margin():
    t = np.arange(5.0)
    assert events.crossings(t, [1, 1e-12, 1, 1e-12, 1]) == []


def test_start_at_zero_counts_as_rising():
    t = np.linspace(0, 1, 11)
    assert events.crossings(t, t, kind="up")[0][1] == "up"


def test_intervals():
    t = np.arange(6.0)
    v = [0, 1, 1, 0, 0, 2]
    assert events.positive_intervals(t, v) == [(1.0, 2.0), (5.0, 5.0)]
    assert events.zero_intervals(t, v) == [(0.0, 0.0), (3.0, 4.0)]


# --- lindblad ----------------------------------------------------------------


@given(seeds)
def test_row_major_vectorization(seed):
    rng = np.random.default_rng(seed)
    a, b, r = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(np.kron(a, b.T) @ r.ravel(), (a @ r @ b).ravel())


@given(seeds)
def test_liouvillian_preserves_trace_and_hermiticity(seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    c = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lv = lindblad.liouvillian(h, [c], [0.7])
    rho = random_density(4, rng).matrix
    d = (lv @ rho.ravel()).reshape(4, 4)
    assert abs(np.trace(d)) < 1e-12
    assert np.allclose(d, d.conj().T, atol=1e-12)


def test_propagate_methods_agree():
    p = fs.collective_params(1.0)
    lv = fs.liouvillian_product(p)
    y0 = build_named_state("Psi4").matrix.ravel()
    t = np.linspace(0, 3, 7)
    a = lindblad.propagate(lv, y0, t, "rk")
    b = lindblad.propagate(lv, y0, t, "expm")
    assert np.max(np.abs(a - b)) < 1e-9


# --- collective parameters -------------------------------------------------


def test_collective_params_against_direct_formula():
    x = math.pi
    # mu perpendicular to r: gamma12 = 3/2 [sin x / x + cos x / x^2 - sin x / x^3]
    g12 = 1.5 * (math.sin(x) / x + math.cos(x) / x**2 - math.sin(x) / x**3)
    o12 = 0.75 * (-math.cos(x) / x + math.sin(x) / x**2 + math.cos(x) / x**3)
    p = fs.collective_params(x)
    assert abs(p.gamma12 - g12) < 1e-15 and abs(p.omega12 - o12) < 1e-15


def test_collective_limits():
    assert abs(fs.collective_params(1e-4).gamma12 - 1) < 1e-7
    assert abs(fs.collective_params(1e4).gamma12) < 2e-4
    assert fs.independent_params().gamma12 == 0


def test_small_kr_potential_tracks_omega12():
    for kr in (0.01, 0.05):
        assert abs(fs.small_kr_potential(kr) / fs.collective_params(kr).omega12 - 1) < 2e-3
    with pytest.raises(ContractViolation):
        fs.small_kr_potential(0.5)


def test_bad_inputs():
    with pytest.raises(ContractViolation):
        fs.collective_params(0.0)
    with pytest.raises(ContractViolation):
        fs.collective_params(1.0, mu_dot_r=1.5)


# --- closed form vs master equation ----------------------------------------


@given(seeds, st.floats(0.3, 12.0), st.floats(0.0, 1.0))
def test_closed_form_matches_master_equation(seed, kr, mu):
    rho = random_density(4, np.random.default_rng(seed))
    p = fs.collective_params(kr, mu)
    t = np.linspace(0, 4, 9)
    num = fs.evolve_master(rho, p, t)
    for i, ti in enumerate(t):
        assert np.max(np.abs(num.rho[i].matrix - fs.analytic_matrix(basis_transform(rho, "product", "dicke"), p, ti))) < 1e-8


def test_closed_form_with_atomic_frequency():
    rho = random_density(4, np.random.default_rng(3))
    p = fs.with_omega0(fs.collective_params(2.0), 3.0)
    num = fs.evolve_master(rho, p, np.linspace(0, 2, 5))
    assert np.max(np.abs(num.rho[-1].matrix - fs.analytic_matrix(basis_transform(rho, "product", "dicke"), p, 2.0))) < 1e-8


def test_t_zero_returns_input():
    rho = basis_transform(build_named_state("PsiS"), "product", "dicke")
    assert fs.analytic_solution(rho, fs.collective_params(1.0), 0.0) is rho


def test_grid_must_start_at_zero():
    with pytest.raises(ContractViolation):
        fs.evolve_master(build_named_state("Psi1"), fs.independent_params(), [1.0, 2.0])


def test_single_excitation_concurrence_matches_master_equation():
    p = fs.collective_params(1.2)
    t = np.linspace(0, 5, 11)
    num = fs.evolve_master(build_named_state("Psi3"), p, t)
    assert np.max(np.abs(num.concurrence - fs.concurrence_single_excitation(p, t))) < 1e-8


def test_independent_atoms_single_excitation():
    t = np.linspace(0, 5, 11)
    assert np.max(fs.concurrence_single_excitation(fs.independent_params(), t)) == 0


def test_dicke_model_matches_master_equation():
    p = fs.CollectiveParams(gamma=1.0, gamma12=1.0, omega12=0.0)
    t = np.linspace(0, 4, 9)
    (r11, rss, r44), c = fs.dicke_model_trajectory((0.2, 0.3, 0.5), t)
    rho0 = DensityMatrix(np.diag([0.2, 0.3, 0.0, 0.5]).astype(complex), "dicke")
    num = fs.evolve_master(rho0, p, t)
    assert np.allclose([r.matrix[1, 1].real for r in num.rho], rss, atol=1e-9)
    assert np.allclose(num.concurrence, c, atol=1e-9)


def test_dicke_model_rejects_bad_populations():
    with pytest.raises(ContractViolation):
        fs.dicke_model_trajectory((0.5, 0.5, 0.5), [0.0])


def test_diagonal_states_block_only():
    rho = basis_transform(random_density(4, np.random.default_rng(1)), "product", "dicke")
    with pytest.raises(PatternViolation):
        fs.diagonal_states(rho)
    m = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    m[1, 2], m[2, 1] = 0.05j, -0.05j
    rpp, rmm, vp, vm = fs.diagonal_states(DensityMatrix(m, "dicke"))
    assert abs(rpp + rmm - 0.5) < 1e-15
    w = np.linalg.eigvalsh(m[1:3, 1:3])
    assert np.allclose(sorted([rpp, rmm]), w)


# --- sudden death, revival, birth ------------------------------------------


@given(st.floats(0.51, 0.99))
def test_sudden_death_time_is_the_zero_of_the_criterion(q):
    td = fs.sudden_death_time(q)
    c1, _ = fs.correlated_q_criteria(q, fs.independent_params(), td)
    assert abs(c1) < 1e-12


def test_no_death_below_half():
    assert fs.sudden_death_time(0.5) is None
    assert fs.sudden_death_time(0.2) is None


def test_correlated_q_criteria_match_master_equation():
    p = fs.collective_params(0.8)
    q = 0.7
    t = np.linspace(0, 3, 7)
    num = fs.evolve_master(build_named_state(NamedState("CorrelatedQ", q=q)), p, t)
    for i, ti in enumerate(t):
        m = basis_transform(num.rho[i], "dicke", "product").matrix
        assert np.allclose(fs.criteria_from_product(m), [float(x) for x in fs.correlated_q_criteria(q, p, ti)], atol=1e-8)


@given(st.floats(0.9, 0.99))
def test_revival_roots(q):
    t1, t2 = fs.revival_times(q)
    rhs = math.sqrt((1 - q) / q)
    assert t1 < 1 < t2
    for x in (t1, t2):
        assert abs(x * math.exp(-x) - rhs) < 1e-13


def test_revival_roots_absent_for_small_q():
    assert fs.revival_times(0.6) is None


def test_second_death_infinite_at_full_collectivity():
    assert fs.second_death_time(0.9, fs.CollectiveParams(gamma=1, gamma12=1)) == math.inf


def test_sudden_birth_from_doubly_excited_state():
    p = fs.collective_params(fs.kr_from_separation(0.25))
    t = np.linspace(0, 10, 2001)
    c, birth = fs.sudden_birth_trajectory(p, t)
    assert birth is not None and birth > 1
    num = fs.evolve_master(build_named_state("Psi4"), p, t[::200])
    assert np.allclose(num.concurrence, c[::200], atol=1e-8)


def test_trajectory_rows_shape():
    traj = fs.evolve_master(build_named_state("Psi3"), fs.collective_params(1.0), np.linspace(0, 1, 3))
    rows = fs.trajectory_rows(traj)
    assert len(rows) == 3 and len(rows[0]) == len(fs.CSV_COLUMNS)
