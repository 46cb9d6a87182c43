import numpy as np
import pytest

from opdyn import (ChannelKind, ChannelSpec, DensityState, DimensionError,
                   MeanState, NetworkSpec, ParameterError, ValidationError,
                   build_initial_density, build_lindblads,
                   build_single_excitation_density, find_asymptote, integrate,
                   jump_drift_probabilities, liouvillian_apply, mean_values,
                   sweep)
from opdyn import config as cfg


def uniform_spec(n):
    return NetworkSpec(n=n, omega_f=np.ones(n), omega_g=np.ones(n),
                       lam=np.zeros(n), p_f=np.zeros((n, n)), p_g=np.zeros((n, n)))


def transfer(kind, src, dst, strength):
    return ChannelSpec(kind=kind, strength=strength, src=src, dst=dst)


def site(kind, agent, strength):
    return ChannelSpec(kind=kind, strength=strength, agent=agent)


def two_agent_setup():
    spec = uniform_spec(2)
    channels = build_lindblads([
        transfer(ChannelKind.TRANSFER_FAKE, 1, 2, 0.5),
        transfer(ChannelKind.TRANSFER_GOOD, 1, 2, 0.7),
        site(ChannelKind.SWITCH_FAKE_TO_GOOD, 2, 0.8),
        site(ChannelKind.PUMP_GOOD, 1, 0.3),
    ], 2)
    rho0 = build_initial_density(MeanState(F=[0.6, 0.0], G=[0.3, 0.0]))
    return spec, channels, rho0


# --- channel construction ---------------------------------------------------

def test_experiment_one_channel_count(exp1_doc):
    assert exp1_doc.lindblads().count == 18


def test_empty_channel_list_is_stationary():
    spec = uniform_spec(2)
    lind = build_lindblads([], 2)
    assert lind.count == 0
    rho = build_initial_density(MeanState(F=[1.0, 0.0], G=[0.0, 0.0]))
    assert np.abs(liouvillian_apply(rho, spec, lind)).max() == 0.0


def test_experiment_three_channel_count():
    doc = cfg.load_preset("exp3a")
    assert doc.lindblads().count == 19


def test_channel_validation():
    with pytest.raises(ValidationError):
        transfer(ChannelKind.TRANSFER_FAKE, 1, 1, 0.5)
    with pytest.raises(ValidationError):
        site(ChannelKind.PUMP_GOOD, 1, -0.5)
    with pytest.raises(ValidationError):
        build_lindblads([site(ChannelKind.PUMP_GOOD, 3, 0.1)], 2)
    with pytest.raises(ValidationError):
        ChannelSpec(kind=ChannelKind.TRANSFER_FAKE, strength=0.5, agent=1)


# --- initial states -----------------------------------------------------------

def test_product_density_pure_number_state():
    rho = build_initial_density(MeanState(F=[1.0], G=[0.0]))
    assert rho.populations[1] == 1.0 and rho.populations.sum() == 1.0


def test_product_density_four_quarter_configurations():
    rho = build_initial_density(MeanState(F=[0.5, 0, 0, 0, 0, 0], G=[0.5, 0, 0, 0, 0, 0]))
    p = rho.populations
    f1, g1 = 1 << 0, 1 << 6
    assert p[0] == 0.25 and p[f1] == 0.25 and p[g1] == 0.25 and p[f1 | g1] == 0.25
    assert p.sum() == 1.0
    assert np.count_nonzero(p) == 4


def test_single_excitation_density():
    rho = build_single_excitation_density(
        MeanState(F=[0.5, 0, 0, 0, 0, 0], G=[0.5, 0, 0, 0, 0, 0]))
    p = rho.populations
    assert p[1 << 0] == 0.5 and p[1 << 6] == 0.5 and p.sum() == 1.0
    with pytest.raises(ValidationError):
        build_single_excitation_density(MeanState(F=[0.5, 0.0], G=[0.0, 0.0]))


def test_density_state_validation():
    with pytest.raises(ValidationError):
        DensityState(n_agents=1, populations=np.array([0.5, 0.2, 0.0, 0.0]))
    with pytest.raises(ValidationError):
        DensityState(n_agents=1, populations=np.array([1.2, -0.2, 0.0, 0.0]))
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0
    with pytest.raises(ValidationError):
        DensityState(n_agents=1, dense=bad)


# --- generator ----------------------------------------------------------------

def test_vacuum_is_fixed_point_without_pumps(exp1_doc):
    spec, lind = exp1_doc.network_spec(), exp1_doc.lindblads()
    vac = np.zeros(1 << 12)
    vac[0] = 1.0
    rho = DensityState(n_agents=6, populations=vac)
    assert np.abs(liouvillian_apply(rho, spec, lind)).max() == 0.0


def test_pump_rate_on_vacuum():
    spec = uniform_spec(1)
    lam = 0.3
    lind = build_lindblads([site(ChannelKind.PUMP_GOOD, 1, lam)], 1)
    vac = DensityState(n_agents=1, populations=np.array([1.0, 0.0, 0.0, 0.0]))
    rhs = liouvillian_apply(vac, spec, lind)
    # the good-occupied configuration gains population at exactly lambda^2
    assert abs(rhs[2] - lam ** 2) < 1e-15
    assert abs(rhs.sum()) < 1e-15


def test_generator_is_traceless_for_random_diagonal(rng):
    spec, lind, _ = two_agent_setup()
    p = rng.uniform(0.0, 1.0, 16)
    p /= p.sum()
    rho = DensityState(n_agents=2, populations=p)
    assert abs(liouvillian_apply(rho, spec, lind).sum()) < 1e-12
    rhs_dense = liouvillian_apply(rho.to_dense(), spec, lind)
    assert abs(np.trace(rhs_dense).real) < 1e-12
    assert np.abs(np.real(np.diag(rhs_dense)) - liouvillian_apply(rho, spec, lind)).max() < 1e-12


# --- mean values ---------------------------------------------------------------

def test_mean_values_pure_and_mixed():
    spec = uniform_spec(2)
    pure = np.zeros(16)
    pure[1] = 1.0  # f_1 occupied
    assert mean_values(DensityState(n_agents=2, populations=pure), spec).F[0] == 1.0
    half = build_initial_density(MeanState(F=[0.5, 0.5], G=[0.5, 0.5]))
    ms = mean_values(half, spec)
    assert np.array_equal(ms.F, [0.5, 0.5]) and np.array_equal(ms.G, [0.5, 0.5])


# --- integration ----------------------------------------------------------------

def test_single_switch_exponential_decay():
    # one fake->good switch on one agent: pure exponential channel
    spec = uniform_spec(1)
    p = 0.8
    lind = build_lindblads([site(ChannelKind.SWITCH_FAKE_TO_GOOD, 1, p)], 1)
    rho0 = build_initial_density(MeanState(F=[1.0], G=[0.0]))
    traj = integrate(rho0, spec, lind, t_max=5.0, dt=0.001, dt_out=0.5)
    expected_f = np.exp(-p ** 2 * traj.times)
    assert np.abs(traj.F[:, 0] - expected_f).max() < 1e-9
    assert np.abs(traj.G[:, 0] - (1.0 - expected_f)).max() < 1e-9


def test_dense_and_population_paths_agree():
    spec, lind, rho0 = two_agent_setup()
    traj_pop = integrate(rho0, spec, lind, t_max=4.0, dt=0.01, dt_out=0.5)
    traj_dense = integrate(rho0.to_dense(), spec, lind, t_max=4.0, dt=0.01, dt_out=0.5)
    assert np.abs(traj_pop.F - traj_dense.F).max() < 1e-8
    assert np.abs(traj_pop.G - traj_dense.G).max() < 1e-8


def test_number_conserved_without_pumps(exp1_doc):
    traj = integrate(exp1_doc.initial_density(), exp1_doc.network_spec(),
                     exp1_doc.lindblads(), t_max=50.0, dt=0.01, dt_out=1.0)
    total = traj.F.sum(axis=1) + traj.G.sum(axis=1)
    assert np.abs(total - total[0]).max() <= 1e-8


def test_source_outflow_only(exp1_doc):
    traj = integrate(exp1_doc.initial_density(), exp1_doc.network_spec(),
                     exp1_doc.lindblads(), t_max=50.0, dt=0.01, dt_out=1.0)
    source = traj.F[:, 0] + traj.G[:, 0]
    assert (np.diff(source) <= 1e-12).all()


def test_trace_and_positivity_along_experiment_one(exp1_doc):
    from opdyn.gksl import _PopulationStepper
    stepper = _PopulationStepper(exp1_doc.initial_density(), exp1_doc.lindblads(), dt=0.01)
    for _ in range(100):
        stepper.advance(100)  # one time unit per block
        assert abs(stepper.p.sum() - 1.0) <= 1e-8
        assert stepper.p.min() >= -1e-10


def test_diagonal_state_stays_exactly_diagonal():
    # with a diagonal Hamiltonian and monomial channels the dense generator
    # never produces off-diagonal entries from a diagonal state
    spec, lind, rho0 = two_agent_setup()
    rhs = liouvillian_apply(rho0.to_dense(), spec, lind)
    off = rhs - np.diag(np.diag(rhs))
    assert np.abs(off).max() == 0.0


def test_pumped_network_total_nondecreasing():
    doc = cfg.load_preset("exp3a")
    traj = integrate(doc.initial_density(), doc.network_spec(), doc.lindblads(),
                     t_max=200.0, dt=doc.gksl_dt(), dt_out=1.0)
    total = traj.F.sum(axis=1) + traj.G.sum(axis=1)
    assert (np.diff(total) >= -1e-12).all()


def test_trace_renormalization_is_defensive_and_logged(caplog):
    spec, lind, rho0 = two_agent_setup()
    from opdyn.gksl import _PopulationStepper
    stepper = _PopulationStepper(rho0, lind, dt=0.01)
    stepper.renormalize_if_drifted(1.0)  # drift ~1e-16: must not touch p
    assert not caplog.records
    stepper.p = stepper.p * (1 + 5e-9)
    with caplog.at_level("WARNING", logger="opdyn.gksl"):
        stepper.renormalize_if_drifted(2.0)
    assert "renormalizing" in caplog.text
    assert abs(stepper.p.sum() - 1.0) < 1e-14


def test_sparse_stepping_matches_dense_step_matrix(monkeypatch):
    # force the large-subspace branch (sequential sparse RK4) and compare
    # against the default step-matrix path
    spec, lind, rho0 = two_agent_setup()
    ref = integrate(rho0, spec, lind, t_max=4.0, dt=0.01, dt_out=0.5)
    import opdyn.gksl as gksl_mod
    monkeypatch.setattr(gksl_mod, "SUBSPACE_DENSE_MAX", 2)
    forced = integrate(rho0, spec, lind, t_max=4.0, dt=0.01, dt_out=0.5)
    assert np.abs(forced.F - ref.F).max() < 1e-12
    assert np.abs(forced.G - ref.G).max() < 1e-12


def test_coherence_rotation_under_free_hamiltonian():
    # off-diagonal matrix elements rotate at the energy difference; this pins
    # the sign of the commutator term, which diagonal states never exercise
    omega_f = 0.7
    spec = NetworkSpec(n=1, omega_f=[omega_f], omega_g=[1.3], lam=[0.0],
                       p_f=[[0.0]], p_g=[[0.0]])
    lind = build_lindblads([], 1)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    rho[0, 1] = rho[1, 0] = 0.5  # superposition of vacuum and f-occupied
    state = DensityState(n_agents=1, dense=rho)
    rhs = liouvillian_apply(state, spec, lind)
    # d/dt rho_01 = -i(E_0 - E_1) rho_01 = +i omega_f rho_01
    assert abs(rhs[0, 1] - 1j * omega_f * 0.5) < 1e-14

    from opdyn.oracle import brute_force_gksl
    t = 1.3
    out = brute_force_gksl(state, spec, lind, t)
    assert abs(out.dense[0, 1] - 0.5 * np.exp(1j * omega_f * t)) < 1e-10


def test_integrate_step_validation(exp1_doc):
    with pytest.raises(ParameterError):
        integrate(exp1_doc.initial_density(), exp1_doc.network_spec(),
                  exp1_doc.lindblads(), t_max=1.0, dt=0.03, dt_out=0.1)


def test_dense_integration_dimension_cap(exp1_doc):
    with pytest.raises(DimensionError):
        integrate(exp1_doc.initial_density().to_dense(), exp1_doc.network_spec(),
                  exp1_doc.lindblads(), t_max=1.0, dt=0.1, dt_out=1.0)


# --- jump/drift decomposition -----------------------------------------------

def test_jump_drift_vacuum():
    lind = build_lindblads([transfer(ChannelKind.TRANSFER_GOOD, 1, 2, 0.5),
                            site(ChannelKind.SWITCH_GOOD_TO_FAKE, 1, 0.7)], 2)
    psi = np.zeros(16)
    psi[0] = 1.0
    p_a, jumps = jump_drift_probabilities(psi, lind, dt=0.01)
    assert p_a == 1.0 and not any(jumps)


def test_jump_probability_single_transfer():
    lind = build_lindblads([transfer(ChannelKind.TRANSFER_GOOD, 1, 2, 0.5)], 2)
    psi = np.zeros(16, dtype=complex)
    psi[1 << 2] = 1.0  # g_1 occupied
    dt = 0.01
    p_a, jumps = jump_drift_probabilities(psi, lind, dt)
    assert abs(jumps[0] - 0.25 * dt) < 1e-15
    assert abs(p_a + jumps[0] - 1.0) < 1e-4


def test_jump_drift_second_order_remainder():
    spec, lind, _ = two_agent_setup()
    psi = np.zeros(16, dtype=complex)
    psi[1 | (1 << 2)] = 1.0  # f_1 and g_1 occupied
    errs = []
    for dt in (1e-2, 1e-3):
        p_a, jumps = jump_drift_probabilities(psi, lind, dt)
        errs.append(abs(p_a + sum(jumps) - 1.0))
    ratio = errs[0] / errs[1]
    assert 50.0 < ratio < 200.0  # quadratic remainder
    assert errs[0] < 1e-3


def test_jump_drift_requires_normalized_state():
    lind = build_lindblads([], 1)
    with pytest.raises(ParameterError):
        jump_drift_probabilities(np.array([1.0, 1.0, 0.0, 0.0]), lind, 0.01)


# --- asymptotics ----------------------------------------------------------------

def test_symmetric_network_splits_evenly():
    doc = cfg.load_preset("exp1")
    doc = cfg.set_param(doc, "gksl.channels.16.strength", 0.0)
    doc = cfg.set_param(doc, "gksl.channels.17.strength", 0.0)
    res = find_asymptote(doc.initial_density(), doc.network_spec(), doc.lindblads(),
                         observable="G6")
    assert res.converged
    assert abs(res.value - 0.5) < 1e-6
    assert abs(res.means.F[5] - 0.5) < 1e-6


def test_asymptote_flags_non_convergence(exp1_doc):
    res = find_asymptote(exp1_doc.initial_density(), exp1_doc.network_spec(),
                         exp1_doc.lindblads(), observable="G6", t_cap=5.0)
    assert not res.converged


def test_asymptote_unknown_observable(exp1_doc):
    with pytest.raises(ParameterError):
        find_asymptote(exp1_doc.initial_density(), exp1_doc.network_spec(),
                       exp1_doc.lindblads(), observable="H7")


def test_sweep_single_value_matches_asymptote(exp1_doc):
    def factory(value):
        doc = cfg.set_param(exp1_doc, "gksl.channels.16.strength", value)
        return doc.initial_density(), doc.network_spec(), doc.lindblads()

    points = sweep(factory, [2.0], observable="G6")
    direct = find_asymptote(*factory(2.0), observable="G6")
    assert len(points) == 1
    assert points[0].asymptote == direct.value


def test_sweep_parallel_matches_serial(exp1_doc):
    def factory(value):
        doc = cfg.set_param(exp1_doc, "gksl.channels.16.strength", value)
        return doc.initial_density(), doc.network_spec(), doc.lindblads()

    serial = sweep(factory, [0.0, 1.0, 2.0], observable="G6", jobs=1)
    parallel = sweep(factory, [0.0, 1.0, 2.0], observable="G6", jobs=3)
    assert [p.asymptote for p in serial] == [p.asymptote for p in parallel]
