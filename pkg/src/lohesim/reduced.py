"""Reduced aggregation models: spheres, matrices, factor pairs, phases.

Each model ships its right-hand side on natural shapes, written directly
from the matrix/vector form rather than through the rank-m contraction
machinery, so cross-checks between this module and :mod:`lohesim.lt` are
genuinely independent.  Two-factor models (double sphere, double matrix,
unitary pair) also expose ``pack``/``unpack`` helpers and a closure
builder for the flat integrator interface.

Conventions: vector inner products conjugate the first argument; centroid
means plain ensemble average; all couplings are the all-to-all ones.
"""

import numpy as np

__all__ = [
    "sphere_rhs",
    "hs_rhs",
    "phase_rhs_from_overlaps",
    "phase_potential",
    "overlap_polar",
    "glm_rhs",
    "rum_rhs",
    "svd_reduce",
    "sds_rhs",
    "sds_energy",
    "sdm_rhs",
    "sdm_energy",
    "unitary_pair_rhs",
    "pair_lift",
    "pair_lift_flow",
    "quad_lift",
    "quad_lift_flow",
    "lift_defect",
    "pack_pair",
    "unpack_pair",
    "make_pair_rhs",
]


def _center(states):
    return states.mean(axis=0)


# -- rank-1 models ---------------------------------------------------------

def sphere_rhs(states, omegas, kappa0):
    """Aggregation flow on the real unit sphere: for each member,
    x' = Omega x + kappa0 (<x, x> x_c - <x_c, x> x_j)."""
    xc = _center(states)
    self_sq = np.sum(states * states, axis=1, keepdims=True)
    proj = states @ xc
    out = kappa0 * (self_sq * xc[None, :] - proj[:, None] * states)
    if omegas is not None:
        out = out + np.einsum("nij,nj->ni", omegas, states)
    return out


def hs_rhs(states, omegas, kappa0, kappa1):
    """Hermitian-sphere flow on complex unit vectors with both couplings:
    z' = Omega z + kappa0 (<z_j, z_j> z_c - <z_c, z_j> z_j)
               + kappa1 (<z_j, z_c> - <z_c, z_j>) z_j."""
    zc = _center(states)
    self_sq = np.sum(states.conj() * states, axis=1).real
    cz = states.conj() @ zc          # <z_j, z_c>
    out = kappa0 * (self_sq[:, None] * zc[None, :] - np.conj(cz)[:, None] * states)
    if kappa1 != 0.0:
        out = out + kappa1 * (2j * cz.imag)[:, None] * states
    if omegas is not None:
        out = out + np.einsum("nij,nj->ni", omegas, states)
    return out


def overlap_polar(states):
    """(R, alpha) polar split of the pairwise overlaps <z_j, z_k> of an
    initial ensemble; R symmetric, alpha antisymmetric."""
    h = states.conj() @ states.T
    return np.abs(h), np.angle(h)


def phase_rhs_from_overlaps(theta, r0, alpha0, kappa1):
    """Phase-pulled form of the kappa1-only hermitian-sphere flow:
    theta_j' = (2 kappa1 / N) sum_k R0_jk sin(theta_k - theta_j + alpha0_jk).
    """
    n = theta.size
    diff = theta[None, :] - theta[:, None] + alpha0
    return (2.0 * kappa1 / n) * np.sum(r0 * np.sin(diff), axis=1)


def phase_potential(theta, r0, alpha0, kappa1):
    """Potential whose full gradient reproduces phase_rhs_from_overlaps
    (note the transposed frustration in the cosine)."""
    n = theta.size
    diff = theta[:, None] - theta[None, :] + alpha0.T
    return (kappa1 / n) * float(np.sum(r0 * (1.0 - np.cos(diff))))


# -- rank-2 matrix models --------------------------------------------------

def glm_rhs(states, flows, kappa1, kappa2):
    """Matrix aggregation flow on unit-Frobenius d1 x d2 matrices:
    T' = A T + kappa1 (T_c T^dag T - T T_c^dag T) + kappa2 (T T^dag T_c - T T_c^dag T).
    ``flows`` is an optional (N, d1*d2, d1*d2) stack acting on flattened states.
    """
    tc = _center(states)
    dag = states.conj().transpose(0, 2, 1)
    tcd = tc.conj().T
    common = states @ tcd @ states
    out = kappa1 * (tc[None] @ dag @ states - common) + kappa2 * (states @ dag @ tc[None] - common)
    if flows is not None:
        flat = states.reshape(states.shape[0], -1)
        out = out + np.einsum("nij,nj->ni", flows, flat).reshape(states.shape)
    return out


def rum_rhs(us, bs, kappa1, weights):
    """Right-invariant unitary flow with diagonal weights:
    U' = B U + kappa1 (U_c W - U W U_c^dag U), W = diag(weights)."""
    uc = _center(us)
    w = np.asarray(weights, dtype=float)
    out = kappa1 * (uc[None] * w[None, None, :] - (us * w[None, None, :]) @ uc.conj().T @ us)
    if bs is not None:
        out = out + bs @ us
    return out


def svd_reduce(states, tol=1e-10):
    """Split a common-Gram matrix ensemble into (unitary stack, squared
    singular values, common right factor).

    Every member must share T_i^dag T_i; then T_j = U_j diag(s) V^dag with
    one s and V for the whole ensemble, and the returned U_j are unitary.
    Raises if the Gram matrices disagree beyond tol or the ensemble is rank
    deficient.
    """
    gram = states[0].conj().T @ states[0]
    for k in range(1, states.shape[0]):
        g = states[k].conj().T @ states[k]
        if np.max(np.abs(g - gram)) > tol:
            raise ValueError(f"member {k} breaks the common-Gram requirement")
    evals, v = np.linalg.eigh(gram)
    if evals.min() <= tol:
        raise ValueError("common Gram matrix is singular; cannot reduce")
    order = np.argsort(evals)[::-1]
    evals, v = evals[order], v[:, order]
    sing = np.sqrt(evals)
    us = states @ v / sing[None, None, :]
    return us, evals, v


# -- two-factor models -----------------------------------------------------

def sds_rhs(u, v, omegas, lambdas, kappa):
    """Coupled flow on a product of two real unit spheres; each factor's
    pull toward a neighbor is weighted by the other factor's alignment:
    u_i' = Omega_i u_i + (kappa/N) sum_j <v_i, v_j> (u_j - <u_i, u_j> u_i),
    and symmetrically for v."""
    n = u.shape[0]
    gu = u @ u.T
    gv = v @ v.T
    du = (kappa / n) * (gv @ u - np.sum(gv * gu, axis=1)[:, None] * u)
    dv = (kappa / n) * (gu @ v - np.sum(gu * gv, axis=1)[:, None] * v)
    if omegas is not None:
        du = du + np.einsum("nij,nj->ni", omegas, u)
    if lambdas is not None:
        dv = dv + np.einsum("nij,nj->ni", lambdas, v)
    return du, dv


def sds_energy(u, v):
    """Alignment potential 1 - (1/N^2) sum_ij <u_i,u_j><v_i,v_j>; the
    zero-flow double-sphere dynamics is its (projected, scaled) descent."""
    n = u.shape[0]
    return 1.0 - float(np.sum((u @ u.T) * (v @ v.T))) / (n * n)


def _pair_coupling(x, other_gram, kappa1, kappa2):
    n = x.shape[0]
    dag = x.conj().transpose(0, 2, 1)
    # sum_k w_jk X_kanchored structures; build per-member accumulations
    wk = other_gram  # w[j, k] = <Y_j, Y_k>_F
    xw = np.einsum("jk,kab->jab", wk, x)               # sum_k w_jk X_k
    xwdx = np.einsum("jk,jab,kbc,jcd->jad", wk.conj(), x, dag, x)  # sum_k conj(w_jk) X_j X_k^dag X_j
    k1 = np.einsum("jab,jbc,jcd->jad", xw, dag, x) - xwdx
    k2 = np.einsum("jab,jbc,jcd->jad", x, dag, xw) - xwdx
    return (kappa1 / n) * k1 + (kappa2 / n) * k2


def sdm_rhs(u, v, b_flows, c_flows, kappa1, kappa2):
    """Coupled matrix-factor flow: each factor follows the generalized
    matrix coupling with weights given by the other factor's Frobenius
    overlaps <V_j, V_k>_F (conjugate-first)."""
    gu = u.reshape(u.shape[0], -1).conj() @ u.reshape(u.shape[0], -1).T
    gv = v.reshape(v.shape[0], -1).conj() @ v.reshape(v.shape[0], -1).T
    du = _pair_coupling(u, gv, kappa1, kappa2)
    dv = _pair_coupling(v, gu, kappa1, kappa2)
    if b_flows is not None:
        flat = u.reshape(u.shape[0], -1)
        du = du + np.einsum("nij,nj->ni", b_flows, flat).reshape(u.shape)
    if c_flows is not None:
        flat = v.reshape(v.shape[0], -1)
        dv = dv + np.einsum("nij,nj->ni", c_flows, flat).reshape(v.shape)
    return du, dv


def sdm_energy(u, v):
    """Alignment potential of the matrix-factor flow (Frobenius overlaps)."""
    n = u.shape[0]
    gu = u.reshape(n, -1).conj() @ u.reshape(n, -1).T
    gv = v.reshape(n, -1).conj() @ v.reshape(n, -1).T
    return 1.0 - float(np.real(np.sum(gu * gv))) / (n * n)


def unitary_pair_rhs(u, v, hs, gs, kappa):
    """Hamiltonian form of the coupled unitary pair: on U(n) x U(m),
    U_j' = -i H_j U_j + (kappa/N) sum_k (<V_j,V_k>_F U_k - <V_k,V_j>_F U_j U_k^dag U_j),
    and symmetrically for V with the U overlaps."""
    n = u.shape[0]
    gu = u.reshape(n, -1).conj() @ u.reshape(n, -1).T
    gv = v.reshape(n, -1).conj() @ v.reshape(n, -1).T

    def side(x, w):
        dag = x.conj().transpose(0, 2, 1)
        gain = np.einsum("jk,kab->jab", w, x)
        loss = np.einsum("jk,jab,kbc,jcd->jad", w.conj(), x, dag, x)
        return (kappa / n) * (gain - loss)

    du = side(u, gv)
    dv = side(v, gu)
    if hs is not None:
        du = du + (-1j) * hs @ u
    if gs is not None:
        dv = dv + (-1j) * gs @ v
    return du, dv


# -- separable lifts -------------------------------------------------------

def pair_lift(u, v):
    """Rank-2 product states u_j v_j^T from sphere-pair factors."""
    return np.einsum("na,nb->nab", u, v)


def pair_lift_flow(omega, lam):
    """Flat free-flow matrix for the lifted product state: the left factor
    rotates rows, the right factor rotates columns."""
    d1, d2 = omega.shape[0], lam.shape[0]
    return np.kron(omega, np.eye(d2)) + np.kron(np.eye(d1), lam)


def quad_lift(u, v):
    """Rank-4 product states U_j (x) V_j (axes ordered as U's pair then V's)."""
    return np.einsum("nab,ncd->nabcd", u, v)


def quad_lift_flow(b_flat, c_flat):
    """Flat free flow for rank-4 product states from the factor flows
    acting on the flattened factors."""
    nb = b_flat.shape[0]
    nc = c_flat.shape[0]
    return np.kron(b_flat, np.eye(nc)) + np.kron(np.eye(nb), c_flat)


def lift_defect(tensors_, factors_a, factors_b):
    """Max Frobenius gap between rank-m tensors and their claimed factor
    products; the factors can be vectors or matrices."""
    n = tensors_.shape[0]
    best = 0.0
    for j in range(n):
        prod = np.tensordot(factors_a[j], factors_b[j], axes=0)
        best = max(best, float(np.linalg.norm((tensors_[j] - prod).ravel())))
    return best


# -- packing helpers for the flat integrator -------------------------------

def pack_pair(u, v):
    return np.concatenate([np.ravel(u), np.ravel(v)])


def unpack_pair(y, shape_u, shape_v):
    n_u = int(np.prod(shape_u))
    return y[:n_u].reshape(shape_u), y[n_u:].reshape(shape_v)


def make_pair_rhs(rhs, shape_u, shape_v, *args):
    """Adapt a two-factor ``rhs(u, v, *args) -> (du, dv)`` to ``f(t, y)``
    on the packed flat state."""

    def f(t, y):
        u, v = unpack_pair(y, shape_u, shape_v)
        du, dv = rhs(u, v, *args)
        return pack_pair(du, dv)

    return f
