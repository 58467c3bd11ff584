"""Truncated-Fock embedding, master-equation integration, comparison."""

import math

import numpy as np
import pytest

from resonet import (
    EvolutionParams,
    ModelError,
    RSFamilySpec,
    coherent_overlap,
    decay_matrix_common,
    degenerate_modes,
    degenerate_network,
    make_rs_state,
    make_superposition,
    propagate,
)
from resonet import oracle


def test_basis_dimension_guard():
    assert oracle.FockBasisSpec(n=2, cutoff=12).dim == 169
    with pytest.raises(ModelError):
        oracle.FockBasisSpec(n=3, cutoff=50)
    with pytest.raises(ModelError):
        oracle.FockBasisSpec(n=0, cutoff=3)


def test_lowering_operator_matrix_elements():
    basis = oracle.FockBasisSpec(n=1, cutoff=4)
    a = oracle.mode_lowering_ops(basis)[0].toarray()
    for k in range(1, 5):
        assert abs(a[k - 1, k] - math.sqrt(k)) < 1e-15
    # commutator is the identity away from the truncation edge
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(np.diagonal(comm)[:-1], 1.0, atol=1e-14)


def test_lowering_operators_commute_between_modes():
    basis = oracle.FockBasisSpec(n=2, cutoff=3)
    a0, a1 = (op.toarray() for op in oracle.mode_lowering_ops(basis))
    np.testing.assert_allclose(a0 @ a1, a1 @ a0, atol=1e-14)


def test_poisson_tail_and_minimum_cutoff():
    assert oracle.poisson_tail(0.0, 1) == 0.0
    # mean 1, cutoff 1: 1 - e^-1 * (1 + 1)
    expected = 1.0 - math.exp(-1.0) * 2.0
    assert abs(oracle.poisson_tail(1.0, 1) - expected) < 1e-12
    c = oracle.minimum_cutoff(2.0)
    assert oracle.poisson_tail(4.0, c) < 1e-10
    assert oracle.poisson_tail(4.0, c - 1) >= 1e-10


def test_suggest_cutoff_rule():
    state = make_rs_state(RSFamilySpec(n=2, r=1, s=1, alpha=0.6))
    assert oracle.suggest_cutoff(state) == math.ceil(0.36 + 3.6 + 8.0)


def test_coherent_vector_components():
    basis = oracle.FockBasisSpec(n=1, cutoff=20)
    alpha = 0.7 - 0.2j
    v = oracle.coherent_vector([alpha], basis)
    for k in (0, 1, 5):
        expected = math.exp(-0.5 * abs(alpha) ** 2) * alpha**k / math.sqrt(math.factorial(k))
        assert abs(v[k] - expected) < 1e-12
    assert abs(np.vdot(v, v) - 1.0) < 1e-10


def test_coherent_vector_overlaps_match_label_algebra():
    basis = oracle.FockBasisSpec(n=2, cutoff=18)
    a = np.array([0.5, -0.3 + 0.4j])
    b = np.array([-0.2, 0.6])
    va = oracle.coherent_vector(a, basis)
    vb = oracle.coherent_vector(b, basis)
    assert abs(np.vdot(va, vb) - coherent_overlap(a, b)) < 1e-10


def test_embed_state_properties():
    state = make_rs_state(RSFamilySpec(n=2, r=1, s=1, alpha=0.6))
    basis = oracle.FockBasisSpec(n=2, cutoff=12)
    rho = oracle.embed_state(state, basis)
    rho.validate(check_positivity=True)
    mat = rho.matrix
    assert abs(np.trace(mat) - 1.0) < 1e-12
    assert abs(np.trace(mat @ mat) - 1.0) < 1e-9
    occ = oracle.mode_occupations(rho, basis)
    traj = propagate(
        state,
        EvolutionParams(
            n=2, gamma=1.0, epsilon=0.5, omega_plus=11.0, omega_minus=9.5, times=[0.0]
        ),
    )
    np.testing.assert_allclose(occ, traj.occupations[0], atol=1e-9)


def test_embed_rejects_inadequate_cutoff():
    state = make_superposition([1.0], np.array([[3.0, 0.0]]))
    basis = oracle.FockBasisSpec(n=2, cutoff=2)
    with pytest.raises(ModelError) as err:
        oracle.embed_state(state, basis)
    assert "required minimum cutoff" in str(err.value)


def test_generator_respects_amplitude_transport():
    # tr(a_m L(rho)) must equal the drift matrix acting on tr(a_m rho); this
    # ties the truncated integrator to the label flow without any dynamics.
    n, cutoff = 2, 9
    basis = oracle.FockBasisSpec(n=n, cutoff=cutoff)
    spec = degenerate_network(n, 1.3, 0.2)
    decay = decay_matrix_common(n, 0.7, 0.4)
    gen = oracle.build_generator(spec, decay, basis)
    state = make_superposition([1.0, 0.5], np.array([[0.4, -0.2], [0.1, 0.3]]))
    rho = oracle.embed_state(state, basis).matrix
    amp = oracle.mean_amplitudes(rho, basis)
    amp_dot = oracle.mean_amplitudes(gen.apply(rho), basis)
    d = (-1j * spec.w_matrix() - 0.5 * decay.matrix) @ amp
    np.testing.assert_allclose(amp_dot, d, atol=1e-8)


def test_generator_preserves_hermiticity_and_trace():
    basis = oracle.FockBasisSpec(n=2, cutoff=4)
    spec = degenerate_network(2, 1.0, 0.3)
    decay = decay_matrix_common(2, 1.0, 0.8)
    gen = oracle.build_generator(spec, decay, basis)
    rng = np.random.default_rng(13)
    x = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    rho = x @ x.conj().T
    rho /= np.trace(rho)
    out = gen.apply(rho)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)
    assert abs(np.trace(out)) < 1e-10


def test_superoperator_matrix_is_linear_action():
    basis = oracle.FockBasisSpec(n=1, cutoff=3)
    spec = degenerate_network(1, 2.0, 0.0)
    decay = decay_matrix_common(1, 0.5, 0.0)
    gen = oracle.build_generator(spec, decay, basis)
    mat = gen.matrix()
    rng = np.random.default_rng(5)
    rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(
        (mat @ rho.ravel()).reshape(4, 4), gen.apply(rho), atol=1e-12
    )


def test_single_mode_decay_against_exact_solution():
    # one resonator: <n>(t) = |alpha|^2 e^{-gamma t}, <a>(t) rotates and damps
    gamma, omega, alpha = 1.0, 3.0, 0.8
    basis = oracle.FockBasisSpec(n=1, cutoff=14)
    spec = degenerate_network(1, omega, 0.0)
    decay = decay_matrix_common(1, gamma, 0.0)
    gen = oracle.build_generator(spec, decay, basis)
    state = make_superposition([1.0], np.array([[alpha]]))
    rho0 = oracle.embed_state(state, basis)
    times = np.linspace(0.0, 1.0, 6)
    rhos = oracle.integrate(rho0, gen, times)
    for t, rho in zip(times, rhos):
        occ = oracle.mode_occupations(rho, basis)[0]
        assert abs(occ - alpha**2 * math.exp(-gamma * t)) < 1e-6
        amp = oracle.mean_amplitudes(rho, basis)[0]
        expected = alpha * np.exp((-1j * omega - 0.5 * gamma) * t)
        assert abs(amp - expected) < 1e-6
        assert abs(np.trace(rho.matrix) - 1.0) < 1e-9


def test_integration_step_halving_converges():
    # Halving the step must move the result by less than 1e-8: the integrator
    # is fourth order and the default step is already conservative.
    n = 2
    basis = oracle.FockBasisSpec(n=n, cutoff=8)
    spec = degenerate_network(n, 2.0, 0.4)
    decay = decay_matrix_common(n, 1.0, 0.5)
    gen = oracle.build_generator(spec, decay, basis)
    state = make_rs_state(RSFamilySpec(n=n, r=1, s=1, alpha=0.4))
    rho0 = oracle.embed_state(state, basis)
    times = np.array([0.0, 0.5])
    coarse = oracle.integrate(rho0, gen, times)[-1].matrix

    halved = oracle.integrate(rho0, gen, np.linspace(0.0, 0.5, 3))[-1].matrix
    assert np.max(np.abs(coarse - halved)) < 1e-8


def test_step_size_rule():
    basis = oracle.FockBasisSpec(n=2, cutoff=3)
    spec = degenerate_network(2, 10.0, 0.5)
    decay = decay_matrix_common(2, 1.0, 0.0)
    gen = oracle.build_generator(spec, decay, basis)
    # rate scale is the infinity norm of the frequency matrix here
    assert abs(gen.rate_scale - 10.5) < 1e-12
    assert abs(oracle.step_size(gen, [0.0, 1.0]) - 0.01 / 10.5) < 1e-15
    assert abs(oracle.step_size(gen, [0.0, 1e-4]) - 1e-4) < 1e-18
    with pytest.raises(ModelError):
        oracle.step_size(gen, [0.0])


def test_compare_trajectory_to_integration():
    n, gamma, eps = 2, 1.0, 0.5
    omega0, lam = 10.0, 0.5
    basis = oracle.FockBasisSpec(n=n, cutoff=12)
    spec = degenerate_network(n, omega0, lam)
    decay = decay_matrix_common(n, gamma, eps)
    state = make_rs_state(RSFamilySpec(n=n, r=1, s=1, alpha=0.6))
    times = np.linspace(0.0, 0.4, 5)
    plus, minus = degenerate_modes(n, omega0, lam)
    traj = propagate(
        state,
        EvolutionParams(n=n, gamma=gamma, epsilon=eps, omega_plus=plus, omega_minus=minus, times=times),
    )
    gen = oracle.build_generator(spec, decay, basis)
    rhos = oracle.integrate(oracle.embed_state(state, basis), gen, times)
    report = oracle.compare(traj, rhos, basis)
    assert report.max_distance < 1e-6
    assert report.distances[0] < 1e-12
    with pytest.raises(ModelError):
        oracle.compare(traj, rhos[:-1], basis)


def test_trace_abort_in_integrator():
    # An unnormalised start violates the trace window immediately.
    basis = oracle.FockBasisSpec(n=1, cutoff=3)
    gen = oracle.build_generator(
        degenerate_network(1, 1.0, 0.0), decay_matrix_common(1, 1.0, 0.0), basis
    )
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 0] = 2.0
    from resonet import NumericalError

    with pytest.raises(NumericalError):
        oracle.integrate(bad, gen, [0.0, 0.1])
