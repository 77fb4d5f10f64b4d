"""Ensembles and right-hand sides for the Lohe tensor ODE.

The model couples N unit-Frobenius-norm rank-m tensors through the cubic
pattern terms of :mod:`lohesim.tensors` plus a per-member block-skew free
flow:

    dT_j/dt = A_j T_j + sum_patterns kappa_p * (gain_p - loss_p),

with the ensemble average as the coupling center.  The Frobenius norm of
every member is a first integral.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensors

__all__ = ["CouplingVector", "LTEnsemble", "lt_rhs", "random_ensemble", "flow_diameter"]


@dataclass
class CouplingVector:
    """Coupling constants per interaction pattern for a rank-m model.

    ``values[p]`` belongs to pattern number p (little-endian bits).  kappa0
    is the all-zeros pattern's constant; kappa_hat0 the plain sum of all the
    others (used by the diameter estimates).
    """

    rank: int
    values: np.ndarray

    @classmethod
    def from_dict(cls, rank, entries):
        """Build from {pattern bits or pattern number: value}; rest zero."""
        values = np.zeros(2 ** rank)
        for key, val in entries.items():
            if isinstance(key, tuple):
                key = tensors.pattern_number(key)
            values[key] = val
        return cls(rank, values)

    @property
    def kappa0(self):
        return float(self.values[0])

    @property
    def kappa_hat0(self):
        return float(np.sum(self.values[1:]))

    def active(self):
        """(pattern, kappa) pairs with nonzero kappa, in pattern order."""
        pats = tensors.index_patterns(self.rank)
        return [(pats[p], float(v)) for p, v in enumerate(self.values) if v != 0.0]


@dataclass
class LTEnsemble:
    """N tensor states plus their couplings and free flows.

    states : (N, *shape) complex, unit Frobenius norm each
    coupling : CouplingVector for rank len(shape)
    flows : (N, D, D) flat skew-hermitian free-flow matrices, or None
    """

    states: np.ndarray
    coupling: CouplingVector
    flows: np.ndarray | None = None
    norm_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=complex)
        norms = np.linalg.norm(self.states.reshape(self.states.shape[0], -1), axis=1)
        if np.max(np.abs(norms - 1.0)) > self.norm_tol:
            raise ValueError(
                f"ensemble states must have unit Frobenius norm (max deviation {np.max(np.abs(norms - 1.0)):.3e})"
            )
        if self.coupling.rank != self.states.ndim - 1:
            raise ValueError("coupling rank does not match state rank")

    @property
    def shape(self):
        return self.states.shape[1:]

    @property
    def size(self):
        return self.states.shape[0]

    def rhs(self):
        """Frozen right-hand-side closure ``f(t, states) -> dstates``."""
        active = self.coupling.active()
        flows = self.flows
        return lambda t, states: lt_rhs(states, active, flows)


def lt_rhs(states, active_couplings, flows=None):
    """Time derivative of an ensemble state array.

    ``active_couplings`` is the list of (pattern, kappa) pairs; ``flows`` the
    optional (N, D, D) free-flow stack.
    """
    center = states.mean(axis=0)
    out = np.zeros_like(states)
    if flows is not None:
        flat = states.reshape(states.shape[0], -1)
        out += np.einsum("nij,nj->ni", flows, flat).reshape(states.shape)
    for pattern, kappa in active_couplings:
        out += tensors.coupling_term(pattern, kappa, center, states)
    return out


def random_ensemble(shape, n, coupling, rng, diameter=None, flows=None):
    """Seeded random unit-norm ensemble, optionally with a target diameter.

    If ``diameter=(lo, hi)`` is given, states are built as a common random
    base plus scaled member perturbations; the scale is bisected so the
    max pairwise Frobenius distance lands inside [lo, hi] (deterministic
    for a fixed rng state).
    """
    if diameter is None:
        states = np.stack([tensors.random_unit_tensor(shape, rng) for _ in range(n)])
        return LTEnsemble(states=states, coupling=coupling, flows=flows)

    lo, hi = diameter
    base = tensors.random_unit_tensor(shape, rng)
    bumps = np.stack(
        [rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for _ in range(n)]
    )

    def build(scale):
        states = base[None] + scale * bumps
        flat = states.reshape(n, -1)
        states = states / np.linalg.norm(flat, axis=1).reshape((n,) + (1,) * len(shape))
        return states

    def diam(states):
        flat = states.reshape(n, -1)
        gram = flat @ flat.conj().T
        sq = np.add.outer(np.diag(gram).real, np.diag(gram).real) - 2 * gram.real
        return float(np.sqrt(np.max(np.maximum(sq, 0.0))))

    s_lo, s_hi = 0.0, 2.0
    target = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (s_lo + s_hi)
        if diam(build(mid)) < target:
            s_lo = mid
        else:
            s_hi = mid
    states = build(0.5 * (s_lo + s_hi))
    got = diam(states)
    if not (lo <= got <= hi):
        raise RuntimeError(f"could not hit requested diameter interval: got {got}")
    return LTEnsemble(states=states, coupling=coupling, flows=flows)


def flow_diameter(flows):
    """Max pairwise Frobenius distance between free-flow matrices."""
    if flows is None:
        return 0.0
    n = flows.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, float(np.linalg.norm(flows[i] - flows[j])))
    return best
