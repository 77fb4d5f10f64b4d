"""Ensemble diagnostics and the closed-form constants of the synchrony theory.

Observables (diameter, order parameter, correlations, variance and
aggregation functionals) operate on (N, *shape) state stacks; wave-field
variants that need grid weights live in :mod:`lohesim.spectral`.  The
second half collects the algebraic thresholds and rates the experiments
compare against: barrier-root radii for practical aggregation, locking
thresholds for the reduced matrix and double-unitary models, network
statistics, and the exponential-rate fit used by every decay check.

All polynomial roots are checked by substitution before being returned;
a root that fails its defining equation at 1e-12 is a bug, not data.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ensemble_diameter",
    "order_parameter",
    "alignment_gap",
    "correlation_matrix",
    "correlation_to_center",
    "variance_functional",
    "pair_functionals",
    "cross_ratio",
    "DegenerateCrossRatio",
    "fit_decay_rate",
    "homogeneous_rate_bracket",
    "practical_aggregation_radii",
    "matrix_aggregation_constants",
    "matrix_practical_threshold",
    "pair_locking_threshold",
    "wave_practical_roots",
    "wave_locking_threshold",
    "aggregation_envelope",
    "network_stats",
    "cooperative_margin",
    "TheoremConstants",
]


def _flat(states):
    states = np.asarray(states)
    return states.reshape(states.shape[0], -1)


def ensemble_diameter(states):
    """Max pairwise Frobenius distance over the ensemble; 0 iff all equal.

    Differences are formed explicitly — the Gram-matrix shortcut loses
    half the mantissa to cancellation and floors near sqrt(eps), which
    would poison decay tails measured down to 1e-8.
    """
    flat = _flat(states)
    diff = flat[:, None, :] - flat[None, :, :]
    return float(np.max(np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))))


def order_parameter(states):
    """Norm of the ensemble centroid; 1 exactly at full alignment.

    For unit-norm members it satisfies
    1 - rho^2 = (1/2N^2) sum_{j,k} ||psi_j - psi_k||^2.
    """
    return float(np.linalg.norm(_flat(states).mean(axis=0)))


def alignment_gap(states):
    """1 - rho computed without cancellation, via the identity
    1 - rho^2 = (1/2N^2) sum_{j,k} ||psi_j - psi_k||^2 and division by
    1 + rho.  Accurate down to machine precision even when rho ~ 1 - 1e-14,
    where ``1 - order_parameter(...)`` has already lost every digit.
    Assumes unit-norm members.
    """
    flat = _flat(states)
    n = flat.shape[0]
    diff = flat[:, None, :] - flat[None, :, :]
    gap_sq = float(np.sum(np.abs(diff) ** 2)) / (2.0 * n * n)
    rho = np.sqrt(max(1.0 - gap_sq, 0.0))
    return gap_sq / (1.0 + rho)


def correlation_matrix(states):
    """Pairwise inner products h[i, j] = <T_i, T_j> (conjugation on the
    first slot, so h is hermitian with the squared norms on the diagonal)."""
    flat = _flat(states)
    return flat.conj() @ flat.T


def correlation_to_center(states):
    """Per-member inner product with the ensemble centroid."""
    flat = _flat(states)
    return flat.conj() @ flat.mean(axis=0)


def variance_functional(states):
    """Mean squared distance to the centroid, (1/N) sum_j ||T_j - T_c||^2.

    Equals 1 - ||T_c||_F^2 for unit-norm members.
    """
    flat = _flat(states)
    center = flat.mean(axis=0)
    return float(np.mean(np.sum(np.abs(flat - center) ** 2, axis=1)))


def pair_functionals(us, vs):
    """Aggregation channels for a double-unitary ensemble {(U_j, V_j)}.

    Returns a dict with the two diameters D_U, D_V, the correlation gaps
    S_U = max_ij |n - <U_i, U_j>_F| (same for S_V with m), and their sum L.
    Unitarity gives D_U^2 <= 2 S_U, so L -> 0 exactly at complete state
    aggregation of both factors.
    """
    out = {}
    total = 0.0
    for key, stack in (("U", np.asarray(us)), ("V", np.asarray(vs))):
        dim = stack.shape[-1]
        flat = stack.reshape(stack.shape[0], -1)
        gram = flat.conj() @ flat.T
        diff = flat[:, None, :] - flat[None, :, :]
        d = float(np.max(np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))))
        s = float(np.max(np.abs(dim - gram)))
        out[f"D_{key}"] = d
        out[f"S_{key}"] = s
        total += d + s
    out["L"] = total
    return out


class DegenerateCrossRatio(ArithmeticError):
    """Cross-ratio denominator vanished (fully aggregated quadruple)."""


def cross_ratio(h, i, j, k, l, tol=1e-12):
    """Cross-ratio (1-h_ij)(1-h_kl) / ((1-h_il)(1-h_kj)) of four members.

    ``h`` is a correlation matrix.  The ratio is invariant along the
    identical-ensemble flow, which makes its drift a sharp integrator
    check.  Degenerate denominators (aggregated states) raise
    DegenerateCrossRatio rather than returning garbage.
    """
    num = (1.0 - h[i, j]) * (1.0 - h[k, l])
    den = (1.0 - h[i, l]) * (1.0 - h[k, j])
    if abs(den) < tol:
        raise DegenerateCrossRatio(f"denominator {abs(den):.3e} below {tol:g} for ({i},{j},{k},{l})")
    return complex(num / den)


def fit_decay_rate(t, values, floor=1e-8, ceiling=1e-2, min_points=5):
    """Least-squares exponential rate of a decaying positive trace.

    Fits log(values) ~ a - rate * t over the window where values lies in
    [floor, ceiling] (dodges both the nonlinear transient and the numerical
    noise floor).  Returns (rate, r_squared).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (values >= floor) & (values <= ceiling)
    if np.count_nonzero(mask) < min_points:
        raise ValueError(
            f"decay window [{floor:g}, {ceiling:g}] holds only {np.count_nonzero(mask)} samples"
        )
    tw, yw = t[mask], np.log(values[mask])
    slope, intercept = np.polyfit(tw, yw, 1)
    resid = yw - (slope * tw + intercept)
    ss_tot = float(np.sum((yw - yw.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return -float(slope), r2


def _check_root(poly, root, tol=1e-12):
    resid = abs(np.polyval(poly, root))
    scale = max(1.0, float(np.max(np.abs(poly))))
    if resid > tol * scale:
        raise AssertionError(f"root {root} misses its polynomial by {resid:.3e}")
    return float(root)


# -- tensor-ensemble thresholds -------------------------------------------

def homogeneous_rate_bracket(kappa0, kappa_hat0, center_norm=1.0):
    """[lo, hi] exponential rate bracket for the identical-flow diameter,
    in terms of the base coupling and the summed remaining couplings."""
    lo = kappa0 - 2.0 * kappa_hat0 * center_norm
    hi = kappa0 + 2.0 * kappa_hat0 * center_norm
    return lo, hi


def practical_aggregation_radii(kappa0, kappa_hat0, flow_diameter, center_norm=1.0):
    """Roots (eta1, eta2) of the quadratic barrier for heterogeneous flows.

    The diameter derivative is dominated by
        -2*kappa0*x^2 + (kappa0 - 2*kappa_hat0*center_norm)*x - flow_diameter,
    whose positive roots bound the dynamics: trajectories entering below
    eta2 are trapped and settle under eta1, and eta1 -> 0 as kappa0 grows.
    Needs flow_diameter < (kappa0 - 2*kappa_hat0*center_norm)^2/(8*kappa0).
    """
    b = kappa0 - 2.0 * kappa_hat0 * center_norm
    if b <= 0:
        raise ValueError("need kappa0 > 2*kappa_hat0*center_norm for a contraction window")
    disc = b * b - 8.0 * kappa0 * flow_diameter
    if disc <= 0:
        raise ValueError(
            f"flow diameter {flow_diameter:g} too large: needs < {b * b / (8 * kappa0):g}"
        )
    root = np.sqrt(disc)
    poly = np.array([-2.0 * kappa0, b, -flow_diameter])
    eta1 = _check_root(poly, (b - root) / (4.0 * kappa0))
    eta2 = _check_root(poly, (b + root) / (4.0 * kappa0))
    return eta1, eta2


def matrix_aggregation_constants(singular_values_sq):
    """(A, B) weights for the reduced right-unitary model whose coupling
    carries D = diag of the common squared singular values: A and B are the
    mean plus/minus the largest deviation; both must be positive for the
    contraction estimates to bite."""
    lam = np.asarray(singular_values_sq, dtype=float)
    mean = float(lam.mean())
    spread = float(np.max(np.abs(lam - mean)))
    return mean + spread, mean - spread


def matrix_practical_threshold(singular_values_sq, kappa1, flow_diameter):
    """Largest positive root alpha2 of A x^3 - 2 B x + flow_diameter/kappa1.

    Initial unitary-stack diameters below alpha2 give practical aggregation
    of the reduced matrix model; requires kappa1 > flow_diameter *
    sqrt(27 A / (32 B^3)).
    """
    big_a, big_b = matrix_aggregation_constants(singular_values_sq)
    if big_a <= 0 or big_b <= 0:
        raise ValueError("spread of squared singular values exceeds their mean")
    kappa_min = flow_diameter * np.sqrt(27.0 * big_a / (32.0 * big_b**3))
    if kappa1 <= kappa_min:
        raise ValueError(f"kappa1={kappa1:g} below coupling threshold {kappa_min:g}")
    poly = np.array([big_a, 0.0, -2.0 * big_b, flow_diameter / kappa1])
    roots = np.roots(poly)
    real = [r.real for r in roots if abs(r.imag) < 1e-10 and r.real > 0]
    return _check_root(poly, max(real))


def pair_locking_threshold(n, m):
    """Positive root of (2n + 8/3) s^2 + (4n + 9) s - 2 (m - 4 sqrt(n)).

    Threshold for the total aggregation functional L of the double-unitary
    model with factor dimensions (n, m); real and positive once
    m > 4*sqrt(n), and L^0 below it forces complete state aggregation.
    """
    if m <= 4.0 * np.sqrt(n):
        raise ValueError("threshold needs m > 4*sqrt(n)")
    poly = np.array([2.0 * n + 8.0 / 3.0, 4.0 * n + 9.0, -2.0 * (m - 4.0 * np.sqrt(n))])
    disc = poly[1] ** 2 - 4.0 * poly[0] * poly[2]
    return _check_root(poly, (-poly[1] + np.sqrt(disc)) / (2.0 * poly[0]))


# -- wave-ensemble thresholds ---------------------------------------------

def wave_practical_roots(potential_diameter, kappa):
    """(alpha1, alpha2) roots of 2 x^3 - x^2 + 2*potential_diameter/kappa.

    Needs kappa > 54 * potential_diameter; then alpha1 < 1/3 < alpha2 < 1/2,
    wave ensembles starting under alpha2 settle under alpha1, and
    alpha1 -> 0, alpha2 -> 1/2 as kappa grows.
    """
    if not kappa > 54.0 * potential_diameter > 0.0:
        raise ValueError("need kappa > 54 * potential_diameter > 0")
    poly = np.array([2.0, -1.0, 0.0, 2.0 * potential_diameter / kappa])
    roots = sorted(r.real for r in np.roots(poly) if abs(r.imag) < 1e-10 and r.real > 0)
    alpha1 = _check_root(poly, roots[0])
    alpha2 = _check_root(poly, roots[-1])
    if not alpha1 < 1.0 / 3.0 < alpha2 < 0.5:
        raise AssertionError(f"roots {alpha1}, {alpha2} violate the bracketing 1/3, 1/2")
    return alpha1, alpha2


def wave_locking_threshold(level_diameter, kappa):
    """Squared-diameter bound for state-locking with shifted potentials:
    needs kappa > 4 * level_diameter, then initial squared diameters below
    (kappa + sqrt(kappa^2 - 4*kappa*level_diameter))/kappa lock the pairwise
    correlations to definite limits."""
    if kappa <= 4.0 * level_diameter:
        raise ValueError("need kappa > 4 * max level gap")
    return (kappa + np.sqrt(kappa * kappa - 4.0 * kappa * level_diameter)) / kappa


def aggregation_envelope(t, d0, kappa):
    """Closed-form decay envelope d0 / (d0 + (1 - 2*d0) e^{kappa t}) for the
    identical wave ensemble started at diameter d0 < 1/2."""
    if not 0.0 < d0 < 0.5:
        raise ValueError("envelope needs 0 < initial diameter < 1/2")
    t = np.asarray(t, dtype=float)
    return d0 / (d0 + (1.0 - 2.0 * d0) * np.exp(kappa * t))


# -- network statistics ----------------------------------------------------

def network_stats(a):
    """(row_spread, min_row_mean, max_entry) of a coupling-weight matrix:
    max_{i,j,k} |a_ik - a_jk|, min_i of the row means, and max_ij a_ij."""
    a = np.asarray(a, dtype=float)
    row_spread = float(np.max(np.abs(a[:, None, :] - a[None, :, :])))
    return row_spread, float(np.min(a.mean(axis=1))), float(np.max(a))


def cooperative_margin(a, initial_diameter):
    """Positive iff an all-positive network satisfies the aggregation
    hypothesis: row spread below the smallest row mean and the initial
    squared diameter below 2*(min_row_mean - row_spread)/max_entry."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("cooperative network needs every weight positive")
    spread, row_min, a_max = network_stats(a)
    if spread >= row_min:
        return -np.inf
    return 2.0 * (row_min - spread) / a_max - initial_diameter**2


@dataclass
class TheoremConstants:
    """Bundle of the threshold constants a run's manifest reports.

    Fields are filled only when the run's model family defines them; every
    value stored here has already passed its defining-polynomial residual
    check at construction time.
    """

    kappa0: float | None = None
    kappa_hat0: float | None = None
    center_norm: float | None = None
    flow_diameter: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    matrix_A: float | None = None
    matrix_B: float | None = None
    matrix_alpha2: float | None = None
    pair_alpha: float | None = None
    potential_diameter: float | None = None
    level_diameter: float | None = None
    wave_alpha1: float | None = None
    wave_alpha2: float | None = None
    network_row_spread: float | None = None
    network_min_row_mean: float | None = None
    network_max_entry: float | None = None

    def as_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}
