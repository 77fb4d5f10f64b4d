"""Complex tensor primitives for the Lohe tensor model family.

A rank-m state is a complex numpy array of shape ``(d_1, ..., d_m)`` stored in
C order (last index fastest).  Ensembles stack N states along a leading axis.

Free flows are "block skew" rank-2m tensors A with ``A[a*, b*] = -conj(A[b*, a*])``
where a*, b* are m-tuples; flattening the two index groups turns A into an
ordinary skew-hermitian D x D matrix (D = prod(shape)), which is how they are
stored and applied here.

Coupling terms are indexed by *interaction patterns*: length-m bit tuples
``(i_1, ..., i_m)``.  Bit i_k decides, at tensor slot k, whether the ensemble
average or the state itself carries the free output index.  Patterns are
enumerated little-endian: pattern number p has ``i_1 = p & 1``.
"""

from functools import lru_cache

import numpy as np

__all__ = [
    "index_patterns",
    "pattern_number",
    "frobenius",
    "frobenius_norm",
    "tensor_product",
    "random_unit_tensor",
    "random_block_skew",
    "is_block_skew",
    "flow_norm",
    "apply_free_flow",
    "coupling_term",
    "coupling_term_looped",
]

_OUT_LETTERS = "abcdefgh"
_SUM_LETTERS = "mnopqrst"
_BATCH = "z"


def index_patterns(rank):
    """All 2^rank interaction patterns, little-endian in the slot index.

    Pattern number p maps to bits ``(p & 1, (p >> 1) & 1, ...)``; slot 1 is
    the least significant bit.
    """
    return [tuple((p >> k) & 1 for k in range(rank)) for p in range(2 ** rank)]


def pattern_number(pattern):
    """Inverse of :func:`index_patterns`."""
    return sum(b << k for k, b in enumerate(pattern))


def frobenius(a, b):
    """Frobenius inner product <a, b> = sum conj(a) * b (conjugation on the
    first argument, as for tensor states throughout)."""
    return np.vdot(a, b)


def frobenius_norm(a):
    return np.linalg.norm(a.ravel())


def tensor_product(a, b):
    """Tensor (outer) product: rank(a)+rank(b) array with entries a[i*] b[j*]."""
    return np.tensordot(a, b, axes=0)


def random_unit_tensor(shape, rng):
    """Complex standard-normal entries, normalized to unit Frobenius norm."""
    t = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return t / frobenius_norm(t)


def random_block_skew(shape, rng, scale=1.0, real=False):
    """Random block skew-hermitian free flow, returned as a flat D x D matrix.

    The result has Frobenius norm exactly ``scale`` (so flow-ensemble
    diameters can be dialed in directly).  ``real=True`` restricts to real
    antisymmetric matrices (rotation generators), which keep real states
    real.
    """
    dim = int(np.prod(shape))
    m = rng.standard_normal((dim, dim))
    if not real:
        m = m + 1j * rng.standard_normal((dim, dim))
    m = 0.5 * (m - m.conj().T)
    return scale * m / np.linalg.norm(m)


def is_block_skew(flow, tol=1e-12):
    return np.max(np.abs(flow + flow.conj().T)) <= tol


def flow_norm(flow):
    """Frobenius norm of a flat flow matrix (used for flow-ensemble diameters)."""
    return np.linalg.norm(flow)


def apply_free_flow(flow, states):
    """Apply a flat D x D flow matrix to one state or a batch of states.

    ``states`` has shape ``(*shape)`` or ``(N, *shape)``; the trailing m axes
    are flattened, multiplied by ``flow`` and reshaped back.
    """
    shape = states.shape
    if flow.shape[0] == int(np.prod(shape)):
        return (flow @ states.ravel()).reshape(shape)
    flat = states.reshape(shape[0], -1)
    return (flat @ flow.T).reshape(shape)


@lru_cache(maxsize=None)
def _coupling_subscripts(pattern):
    """einsum subscripts for the two cubic terms of one interaction pattern.

    For pattern bits i_k, the gain term contracts, at every slot k:

        i_k = 0:  average tensor carries the output index; conj(state) and
                  state share the dummy index,
        i_k = 1:  average and conj(state) share the dummy index; state
                  carries the output index.

    The loss term swaps which of (average, state) is conjugated/contracted.
    Both terms are batched over a leading ensemble axis on the state operands.
    """
    m = len(pattern)
    out = _OUT_LETTERS[:m]
    dums = _SUM_LETTERS[:m]
    mixed = "".join(out[k] if bit == 0 else dums[k] for k, bit in enumerate(pattern))
    mixed_flip = "".join(dums[k] if bit == 0 else out[k] for k, bit in enumerate(pattern))
    z = _BATCH
    gain = f"{mixed},{z}{dums},{z}{mixed_flip}->{z}{out}"
    loss = f"{z}{mixed},{dums},{z}{mixed_flip}->{z}{out}"
    return gain, loss


def coupling_term(pattern, kappa, center, states):
    """One pattern's cubic coupling contribution, batched over the ensemble.

    Parameters
    ----------
    pattern : tuple of {0, 1}
        Interaction pattern bits (i_1, ..., i_m).
    kappa : float
        Coupling constant attached to this pattern.
    center : ndarray, shape (*shape)
        Ensemble average tensor.
    states : ndarray, shape (N, *shape)
        Ensemble states.

    Returns
    -------
    ndarray, shape (N, *shape)
        kappa * (gain - loss) for every ensemble member.
    """
    gain_sub, loss_sub = _coupling_subscripts(pattern)
    cstates = states.conj()
    gain = np.einsum(gain_sub, center, cstates, states)
    loss = np.einsum(loss_sub, states, center.conj(), states)
    return kappa * (gain - loss)


def coupling_term_looped(pattern, kappa, center, state):
    """Nested-loop reference for :func:`coupling_term` on a single state.

    Deliberately written index-by-index from the definition; used as the
    contraction oracle in the tests.  O(D^2) per output entry -- only for
    tiny shapes.
    """
    shape = state.shape
    m = len(pattern)
    out = np.zeros(shape, dtype=complex)
    for free in np.ndindex(*shape):
        acc = 0.0 + 0.0j
        for dummy in np.ndindex(*shape):
            mixed = tuple(free[k] if pattern[k] == 0 else dummy[k] for k in range(m))
            flipped = tuple(dummy[k] if pattern[k] == 0 else free[k] for k in range(m))
            acc += center[mixed] * np.conj(state[dummy]) * state[flipped]
            acc -= state[mixed] * np.conj(center[dummy]) * state[flipped]
        out[free] = kappa * acc
    return out
