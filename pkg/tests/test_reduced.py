import numpy as np
import pytest

from lohesim import diagnostics as dg
from lohesim import integrate, reduced, tensors


def _unit_rows(n, d, seed, real=False):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d))
    if not real:
        z = z + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _random_unitaries(n, d, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        out.append(q * (np.diag(r) / np.abs(np.diag(r)))[None, :])
    return np.stack(out)


def test_sphere_rhs_is_tangent():
    states = _unit_rows(4, 3, seed=0, real=True)
    rhs = reduced.sphere_rhs(states, None, kappa0=1.5)
    radial = np.sum(states * rhs, axis=1)
    assert np.max(np.abs(radial)) < 1e-13


def test_sphere_aggregates_to_small_diameter():
    states = _unit_rows(5, 3, seed=1, real=True)
    states = np.abs(states)  # same orthant, no antipodal stall
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    run = integrate.integrate(
        lambda t, y: reduced.sphere_rhs(y, None, 2.0), states, 0.01, 30.0,
        observers={"d": lambda t, y: dg.ensemble_diameter(y)},
    )
    assert run.observed["d"][-1] < 1e-8


def test_hs_rhs_preserves_norm_and_reduces_to_sphere():
    states = _unit_rows(4, 3, seed=2)
    rhs = reduced.hs_rhs(states, None, kappa0=1.0, kappa1=0.7)
    radial = np.real(np.sum(states.conj() * rhs, axis=1))
    assert np.max(np.abs(radial)) < 1e-13
    real_states = _unit_rows(4, 3, seed=3, real=True).astype(complex)
    a = reduced.hs_rhs(real_states, None, kappa0=1.3, kappa1=0.9)
    b = reduced.sphere_rhs(real_states.real, None, kappa0=1.3)
    # kappa1 coupling dies on real states: plain sphere flow remains
    assert np.max(np.abs(a - b)) < 1e-13


def test_phase_pull_matches_direct_hs_run():
    # kappa0 = 0, zero free flow: the flow only turns phases, so the phase
    # ODE driven by the initial overlaps must reproduce the full states.
    n, d = 4, 3
    states0 = _unit_rows(n, d, seed=4)
    r0, alpha0 = reduced.overlap_polar(states0)
    kappa1 = 0.8

    full = integrate.integrate(
        lambda t, y: reduced.hs_rhs(y, None, 0.0, kappa1), states0, 1e-3, 3.0, observers={}
    )
    phase = integrate.integrate(
        lambda t, th: reduced.phase_rhs_from_overlaps(th, r0, alpha0, kappa1),
        np.zeros(n), 1e-3, 3.0, observers={},
    )
    rebuilt = np.exp(1j * phase.final_state)[:, None] * states0
    assert np.max(np.abs(full.final_state - rebuilt)) < 1e-8


def test_phase_rhs_is_negative_gradient_of_potential():
    n = 5
    states0 = _unit_rows(n, 4, seed=5)
    r0, alpha0 = reduced.overlap_polar(states0)
    kappa1 = 0.6
    rng = np.random.default_rng(6)
    theta = rng.standard_normal(n)
    rhs = reduced.phase_rhs_from_overlaps(theta, r0, alpha0, kappa1)
    eps = 1e-6
    for j in range(n):
        bump = np.zeros(n)
        bump[j] = eps
        grad_j = (
            reduced.phase_potential(theta + bump, r0, alpha0, kappa1)
            - reduced.phase_potential(theta - bump, r0, alpha0, kappa1)
        ) / (2 * eps)
        assert abs(rhs[j] + grad_j) < 1e-6


def test_glm_rhs_norm_neutral_and_variance_decay():
    rng = np.random.default_rng(7)
    states = rng.standard_normal((4, 2, 3)) + 1j * rng.standard_normal((4, 2, 3))
    states /= np.linalg.norm(states.reshape(4, -1), axis=1)[:, None, None]
    rhs = reduced.glm_rhs(states, None, kappa1=1.0, kappa2=0.5)
    for j in range(4):
        assert abs(np.real(np.vdot(states[j], rhs[j]))) < 1e-13
    run = integrate.integrate(
        lambda t, y: reduced.glm_rhs(y, None, 1.0, 0.5), states, 1e-2, 60.0,
        observers={"v": lambda t, y: dg.variance_functional(y)},
    )
    v = run.observed["v"]
    # variance settles: central-difference slope below 1e-6 at the end
    assert abs(v[-1] - v[-3]) / (2 * 1e-2) < 1e-6


def test_svd_reduce_round_trip_and_gram_check():
    rng = np.random.default_rng(8)
    d = 3
    base = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    base /= np.linalg.norm(base)
    us = _random_unitaries(4, d, seed=9)
    states = us @ base  # common right Gram by construction
    ured, lam_sq, v = reduced.svd_reduce(states)
    for j in range(4):
        assert np.allclose(ured[j].conj().T @ ured[j], np.eye(d), atol=1e-10)
        rebuilt = ured[j] @ np.diag(np.sqrt(lam_sq)) @ v.conj().T
        assert np.max(np.abs(rebuilt - states[j])) < 1e-10
    bad = states.copy()
    bad[0] = _random_unitaries(1, d, seed=10)[0] / np.sqrt(d)
    with pytest.raises(ValueError):
        reduced.svd_reduce(bad)


def test_reduced_unitary_flow_tracks_full_matrix_flow():
    # common-Gram matrix ensemble: evolving the unitary factor with the
    # weighted flow and rebuilding must match the full matrix model.
    rng = np.random.default_rng(11)
    d, n = 3, 4
    diag = np.diag([1.0, 0.8, 0.6]) ** 0.5
    diag /= np.linalg.norm(diag)
    us0 = _random_unitaries(n, d, seed=12)
    v0 = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))[0]
    states0 = us0 @ diag @ v0.conj().T
    kappa1 = 1.2

    full = integrate.integrate(
        lambda t, y: reduced.glm_rhs(y, None, kappa1, 0.0), states0, 1e-3, 2.0, observers={}
    )
    ured, lam_sq, v = reduced.svd_reduce(states0)
    unit = integrate.integrate(
        lambda t, y: reduced.rum_rhs(y, None, kappa1, lam_sq), ured, 1e-3, 2.0, observers={}
    )
    rebuilt = unit.final_state @ np.diag(np.sqrt(lam_sq)) @ v.conj().T
    assert np.max(np.abs(rebuilt - full.final_state)) < 1e-8


def test_sds_rhs_tangency_and_energy_descent():
    u = _unit_rows(5, 3, seed=13, real=True)
    v = _unit_rows(5, 4, seed=14, real=True)
    du, dv = reduced.sds_rhs(u, v, None, None, kappa=1.0)
    assert np.max(np.abs(np.sum(u * du, axis=1))) < 1e-13
    assert np.max(np.abs(np.sum(v * dv, axis=1))) < 1e-13
    f = reduced.make_pair_rhs(reduced.sds_rhs, u.shape, v.shape, None, None, 1.0)
    run = integrate.integrate(
        f, reduced.pack_pair(u, v), 1e-2, 5.0,
        observers={"E": lambda t, y: reduced.sds_energy(*reduced.unpack_pair(y, u.shape, v.shape))},
    )
    e = run.observed["E"]
    assert np.all(np.diff(e) <= 1e-12)


def test_sdm_reduces_to_unitary_pair_on_unitary_data():
    # normalized unitary factors: the double-matrix flow restricted to
    # unitary stacks must match the Hamiltonian pair flow up to the
    # Frobenius normalization of the overlaps.
    n_mem, n, m = 3, 2, 2
    us = _random_unitaries(n_mem, n, seed=15)
    vs = _random_unitaries(n_mem, m, seed=16)
    kappa = 0.9
    du1, dv1 = reduced.unitary_pair_rhs(us, vs, None, None, kappa)
    du2, dv2 = reduced.sdm_rhs(us, vs, None, None, kappa1=kappa, kappa2=0.0)
    # sdm with kappa1 only: U_k U_j^dag U_j = U_k for unitary members
    assert np.max(np.abs(du1 - du2)) < 1e-12
    assert np.max(np.abs(dv1 - dv2)) < 1e-12


def test_unitary_pair_conserves_unitarity_and_aggregates():
    from scipy.linalg import expm

    n_mem = 4
    rng = np.random.default_rng(17)
    us = np.empty((n_mem, 2, 2), dtype=complex)
    vs = np.empty((n_mem, 3, 3), dtype=complex)
    u0 = _random_unitaries(1, 2, seed=18)[0]
    v0 = _random_unitaries(1, 3, seed=19)[0]
    for j in range(n_mem):
        us[j] = u0 @ expm(0.02 * tensors.random_block_skew((2,), rng))
        vs[j] = v0 @ expm(0.02 * tensors.random_block_skew((3,), rng))
    f = reduced.make_pair_rhs(reduced.unitary_pair_rhs, us.shape, vs.shape, None, None, 2.0)
    run = integrate.integrate(
        f, reduced.pack_pair(us, vs), 1e-3, 10.0,
        observers={"d_prod": lambda t, y: _product_diameter(y, us.shape, vs.shape)},
    )
    uf, vf = reduced.unpack_pair(run.final_state, us.shape, vs.shape)
    for j in range(n_mem):
        assert np.max(np.abs(uf[j].conj().T @ uf[j] - np.eye(2))) < 1e-8
        assert np.max(np.abs(vf[j].conj().T @ vf[j] - np.eye(3))) < 1e-8
    # the joint phase between the factors is a gauge freedom the factor
    # diameters can keep, so aggregation is judged on the product states
    assert run.observed["d_prod"][-1] < 1e-7


def _product_diameter(y, shape_u, shape_v):
    u, v = reduced.unpack_pair(y, shape_u, shape_v)
    return dg.ensemble_diameter(reduced.quad_lift(u, v) / np.sqrt(shape_u[1] * shape_v[1]))


def test_pair_lift_flow_matches_matrix_action():
    rng = np.random.default_rng(19)
    d1, d2 = 3, 2
    omega = tensors.random_block_skew((d1,), rng, real=True)
    lam = tensors.random_block_skew((d2,), rng, real=True)
    t = rng.standard_normal((d1, d2))
    flat = reduced.pair_lift_flow(omega, lam)
    direct = omega @ t + t @ lam.T
    assert np.allclose((flat @ t.ravel()).reshape(d1, d2), direct, atol=1e-13)


def test_quad_lift_flow_matches_factor_actions():
    rng = np.random.default_rng(20)
    n, m = 2, 2
    b = tensors.random_block_skew((n, n), rng)
    c = tensors.random_block_skew((m, m), rng)
    u = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    v = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    t = np.tensordot(u, v, axes=0)
    flat = reduced.quad_lift_flow(b, c)
    bu = (b @ u.ravel()).reshape(n, n)
    cv = (c @ v.ravel()).reshape(m, m)
    direct = np.tensordot(bu, v, axes=0) + np.tensordot(u, cv, axes=0)
    assert np.max(np.abs((flat @ t.ravel()).reshape(n, n, m, m) - direct)) < 1e-13


def test_lift_defect_zero_on_products():
    rng = np.random.default_rng(21)
    u = _unit_rows(3, 4, seed=22, real=True)
    v = _unit_rows(3, 2, seed=23, real=True)
    lifted = reduced.pair_lift(u, v)
    assert reduced.lift_defect(lifted, u, v) < 1e-15
    perturbed = lifted + 1e-3 * rng.standard_normal(lifted.shape)
    assert reduced.lift_defect(perturbed, u, v) > 1e-4
