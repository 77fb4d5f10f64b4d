"""Fourier pseudospectral solver for synchronizing Schrodinger systems.

Couples N wave functions on a periodic box (1D or 2D) through a norm-
preserving alignment term, with optional cubic (Gross-Pitaevskii style)
nonlinearity and a signed interaction network.  Time stepping is a Strang
splitting: exact kinetic half steps in Fourier space, exact pointwise phase
half steps for potential plus nonlinearity, and an implicit midpoint
(Crank-Nicolson) full step for the coupling solved by fixed-point iteration.
The midpoint stage conserves each component's discrete mass at its fixed
point; the other stages conserve it exactly.

Conventions used throughout this module:

* Discrete inner product ``inner(grid, f, g) = w * sum(f * conj(g))`` where
  ``w`` is the per-node quadrature weight (product of grid spacings).  The
  conjugate sits on the SECOND argument, so ``correlation_matrix`` entries
  are ``h[i, j] = inner(psi_i, psi_j)``.  Note this is opposite to the
  tensor-side convention in :mod:`lohesim.tensors`.
* FFT: numpy's unnormalized forward transform, inverse carries 1/M per axis.
  Mode p carries wavenumber 2*pi*p/(b - a) with p in {-M/2, ..., M/2-1}.
* The kinetic term is ``-c * Laplacian`` with a configurable coefficient
  ``c`` (``SLSystem.kinetic``): 0.5 for the base coupled model, 1.0 for the
  harmonic-trap standing-wave setups whose levels are E_k = 2k + 1.
"""

import numpy as np
from dataclasses import dataclass, replace

from .integrate import IntegrationDiverged, SampledRun


class FixedPointError(RuntimeError):
    """Midpoint coupling solve failed to contract to tolerance."""


class MassSingularityError(RuntimeError):
    """A component's discrete mass fell below the safe-division floor."""


# ---------------------------------------------------------------------------
# periodic grids


@dataclass(frozen=True)
class Grid:
    """Uniform periodic tensor grid on a box, one entry per axis."""

    lo: tuple
    hi: tuple
    m: tuple

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.m)):
            raise ValueError("axis tuples must have equal length")
        if self.dim not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        for a, b, m in zip(self.lo, self.hi, self.m):
            if b <= a:
                raise ValueError("empty interval")
            if m % 2 != 0 or m < 8:
                raise ValueError("point count must be even and at least 8")

    @classmethod
    def line(cls, a, b, m):
        return cls((a,), (b,), (m,))

    @classmethod
    def box(cls, a, b, m):
        """Square 2D grid with the same interval and count on both axes."""
        return cls((a, a), (b, b), (m, m))

    @property
    def dim(self):
        return len(self.m)

    @property
    def shape(self):
        return self.m

    @property
    def dx(self):
        return tuple((b - a) / m for a, b, m in zip(self.lo, self.hi, self.m))

    @property
    def weight(self):
        """Quadrature weight of a single node (product of spacings)."""
        w = 1.0
        for d in self.dx:
            w *= d
        return w

    def axis_nodes(self, axis=0):
        a, m, d = self.lo[axis], self.m[axis], self.dx[axis]
        return a + d * np.arange(m)

    def nodes(self):
        """Node coordinate arrays, broadcast to the full grid shape."""
        axes = [self.axis_nodes(i) for i in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def axis_freqs(self, axis=0):
        """Wavenumbers 2*pi*p/(b-a) in FFT order for one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.m[axis], d=self.dx[axis])

    def laplacian_symbol(self):
        """|mu|^2 on the full grid: the Fourier symbol of -Laplacian."""
        sym = np.zeros(self.shape)
        for axis in range(self.dim):
            mu = self.axis_freqs(axis)
            shape = [1] * self.dim
            shape[axis] = self.m[axis]
            sym = sym + (mu**2).reshape(shape)
        return sym

    def radius_sq(self):
        """|x|^2 on the full grid (harmonic-trap profile)."""
        r2 = np.zeros(self.shape)
        for x in self.nodes():
            r2 = r2 + x**2
        return r2


# ---------------------------------------------------------------------------
# discrete field functionals


def inner(grid, f, g):
    """Weighted discrete inner product with the conjugate on ``g``."""
    return grid.weight * np.sum(f * np.conj(g))


def mass(grid, f):
    return grid.weight * np.sum(np.abs(f) ** 2)


def normalize(grid, f):
    return f / np.sqrt(mass(grid, f))


def distance(grid, f, g):
    return np.sqrt(mass(grid, f - g))


def correlation_matrix(grid, psis):
    """Pairwise overlaps h[i, j] = <psi_i, psi_j> (conjugate on j)."""
    flat = np.asarray(psis).reshape(len(psis), -1)
    return grid.weight * (flat @ flat.conj().T)


def field_diameter(grid, psis):
    """Largest pairwise L2 distance, from explicit differences.

    Computing distances via overlaps loses half the significant digits to
    cancellation; forming the differences keeps deep decay tails honest.
    """
    flat = np.asarray(psis).reshape(len(psis), -1)
    diffs = flat[:, None, :] - flat[None, :, :]
    dist_sq = grid.weight * np.sum(np.abs(diffs) ** 2, axis=-1)
    return float(np.sqrt(np.max(dist_sq)))


def field_order_parameter(grid, psis):
    """L2 norm of the ensemble-average field (1 at consensus)."""
    return float(np.sqrt(mass(grid, np.mean(psis, axis=0))))


def field_alignment_gap(grid, psis):
    """Cancellation-free 1 - rho via the pairwise-difference identity."""
    flat = np.asarray(psis).reshape(len(psis), -1)
    n = len(flat)
    diffs = flat[:, None, :] - flat[None, :, :]
    gap_sq = grid.weight * np.sum(np.abs(diffs) ** 2) / (2.0 * n * n)
    rho = float(np.sqrt(max(0.0, 1.0 - gap_sq)))
    return gap_sq / (1.0 + rho)


def center_of_mass(grid, psi):
    """Density-weighted mean position, one entry per axis."""
    dens = np.abs(psi) ** 2
    return np.array([grid.weight * np.sum(x * dens) for x in grid.nodes()])


def gradient_norm_sq(grid, psi):
    """Integral of |grad psi|^2 via spectral differentiation."""
    total = 0.0
    for axis in range(grid.dim):
        mu = grid.axis_freqs(axis)
        shape = [1] * grid.dim
        shape[axis] = grid.m[axis]
        hat = np.fft.fft(psi, axis=axis)
        dpsi = np.fft.ifft(1j * mu.reshape(shape) * hat, axis=axis)
        total += grid.weight * np.sum(np.abs(dpsi) ** 2)
    return float(total)


# ---------------------------------------------------------------------------
# the coupled system and its splitting steps


@dataclass
class SLSystem:
    """N coupled wave functions plus all model coefficients.

    ``psis`` has shape (N, *grid.shape); ``potentials`` matches it.
    ``beta[j, k]`` weights component k's density in component j's cubic
    term; ``adjacency[j, k]`` signs and weights the alignment coupling.
    ``kinetic`` is the coefficient c in the -c*Laplacian term.
    """

    grid: Grid
    psis: np.ndarray
    potentials: np.ndarray
    beta: np.ndarray
    adjacency: np.ndarray
    kappa: float
    dt: float
    kinetic: float = 0.5

    def __post_init__(self):
        self.psis = np.asarray(self.psis, dtype=complex)
        self.potentials = np.asarray(self.potentials, dtype=float)
        n = self.n
        self.beta = np.asarray(self.beta, dtype=float).reshape(n, n)
        self.adjacency = np.asarray(self.adjacency, dtype=float).reshape(n, n)
        if self.psis.shape[1:] != self.grid.shape:
            raise ValueError("field shape does not match grid")
        if self.potentials.shape != self.psis.shape:
            raise ValueError("need one potential array per component")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")

    @property
    def n(self):
        return len(self.psis)

    def masses(self):
        flat = self.psis.reshape(self.n, -1)
        return self.grid.weight * np.sum(np.abs(flat) ** 2, axis=1)


def kinetic_factor(grid, dt, coefficient=0.5):
    """Fourier multiplier advancing the kinetic term by dt/2."""
    return np.exp(-0.5j * dt * coefficient * grid.laplacian_symbol())


def kinetic_half_step(grid, psis, dt, coefficient=0.5, factor=None):
    """Advance -c*Laplacian by half of ``dt``, exactly, in Fourier space.

    Works on a single field or a stacked (N, *grid.shape) array.
    """
    if factor is None:
        factor = kinetic_factor(grid, dt, coefficient)
    axes = tuple(range(-grid.dim, 0))
    hat = np.fft.fftn(psis, axes=axes)
    return np.fft.ifftn(factor * hat, axes=axes)


def phase_step(psis, potentials, beta, dt):
    """Advance potential plus cubic terms by ``dt`` as a pointwise phase.

    Densities are frozen at entry, which makes the map an exact rotation:
    the pointwise modulus of every component is unchanged.
    """
    dens = np.abs(psis) ** 2
    nonlinear = np.tensordot(beta, dens, axes=1)
    return np.exp(-1j * dt * (potentials + nonlinear)) * psis


def coupling_rhs(grid, psis, adjacency, kappa):
    """Alignment drift: (kappa/2N) sum_k a_jk (psi_k - (h_jk/m_j) psi_j)."""
    n = len(psis)
    flat = psis.reshape(n, -1)
    h = grid.weight * (flat @ flat.conj().T)
    msk = np.real(np.diag(h))
    if np.min(msk) < 1e-8:
        raise MassSingularityError(f"component mass fell to {np.min(msk):.3e}")
    gain = np.tensordot(adjacency, psis, axes=1)
    drain = np.sum(adjacency * h, axis=1) / msk
    coef = kappa / (2.0 * n)
    shape = (n,) + (1,) * grid.dim
    return coef * (gain - drain.reshape(shape) * psis)


def lohe_cn_step(grid, psis, adjacency, kappa, dt, tol=1e-12, max_iters=100):
    """Implicit midpoint step of the coupling term by fixed-point iteration.

    Solves y = psis + dt * F((y + psis)/2) where F is ``coupling_rhs``.
    At the fixed point each component's discrete mass is conserved, because
    the drift is orthogonal to the midpoint state.
    """
    if kappa == 0.0:
        return psis.copy()
    y = psis + dt * coupling_rhs(grid, psis, adjacency, kappa)
    for _ in range(max_iters):
        mid = 0.5 * (y + psis)
        y_next = psis + dt * coupling_rhs(grid, mid, adjacency, kappa)
        residual = np.max(np.abs(y_next - y))
        y = y_next
        if residual <= tol:
            return y
    raise FixedPointError(
        f"midpoint iteration stalled at residual {residual:.3e} "
        f"after {max_iters} iterations"
    )


def tscn_fp_step(system, factor=None):
    """One full Strang step of the coupled system, returning a new system.

    Order: kinetic half, phase half, implicit-midpoint coupling (full),
    phase half, kinetic half.
    """
    g, dt = system.grid, system.dt
    if factor is None:
        factor = kinetic_factor(g, dt, system.kinetic)
    psis = kinetic_half_step(g, system.psis, dt, factor=factor)
    psis = phase_step(psis, system.potentials, system.beta, 0.5 * dt)
    psis = lohe_cn_step(g, psis, system.adjacency, system.kappa, dt)
    psis = phase_step(psis, system.potentials, system.beta, 0.5 * dt)
    psis = kinetic_half_step(g, psis, dt, factor=factor)
    return replace(system, psis=psis)


def evolve(system, t_end, observers=None, sample_every=1, callback=None,
           callback_times=()):
    """March the system to ``t_end``, sampling scalar observers.

    ``observers`` maps channel names to callables of the system.  Samples
    are recorded at t=0, every ``sample_every``-th step, and at the end.
    ``callback(t, system)`` fires at the steps nearest ``callback_times``
    (used for field snapshots).  Returns a :class:`SampledRun` whose
    ``final_state`` is the evolved system.
    """
    observers = observers or {}
    steps_float = t_end / system.dt
    n_steps = int(round(steps_float))
    if n_steps < 1 or abs(steps_float - n_steps) > 1e-9 * max(1, n_steps):
        raise ValueError("t_end must be a positive multiple of dt")
    callback_steps = sorted({int(round(tc / system.dt)) for tc in callback_times})
    factor = kinetic_factor(system.grid, system.dt, system.kinetic)

    times = [0.0]
    observed = {name: [fn(system)] for name, fn in observers.items()}
    if callback is not None and callback_steps and callback_steps[0] == 0:
        callback(0.0, system)
    for step in range(1, n_steps + 1):
        system = tscn_fp_step(system, factor=factor)
        t = step * system.dt
        if step % sample_every == 0 or step == n_steps:
            if not np.all(np.isfinite(system.psis.view(float))):
                raise IntegrationDiverged(f"non-finite field at t={t:g}")
            times.append(t)
            for name, fn in observers.items():
                observed[name].append(fn(system))
        if callback is not None and step in callback_steps:
            callback(t, system)
    observed = {k: np.asarray(v) for k, v in observed.items()}
    return SampledRun(t=np.asarray(times), observed=observed, final_state=system)


def energy(system):
    """Total field energy: kinetic + potential + half the cubic terms.

    Conserved by the continuum flow when the coupling is off; the splitting
    preserves it to second order in dt.
    """
    g = system.grid
    total = 0.0
    dens = np.abs(system.psis) ** 2
    for j in range(system.n):
        total += system.kinetic * gradient_norm_sq(g, system.psis[j])
        total += g.weight * np.sum(system.potentials[j] * dens[j])
        cross = np.tensordot(system.beta[j], dens, axes=1)
        total += 0.5 * g.weight * np.sum(cross * dens[j])
    return float(total)


# ---------------------------------------------------------------------------
# harmonic-trap eigenfunctions and ready-made systems


def hermite_levels(k_max, grid):
    """Orthonormal harmonic-trap eigenfunctions u_0..u_kmax on a 1D grid.

    Uses the stable normalized recurrence
    u_k = sqrt(2/k) x u_{k-1} - sqrt((k-1)/k) u_{k-2}, which keeps every
    level at unit L2 norm without factorial overflow.  They satisfy
    -u'' + x^2 u = (2k+1) u.
    """
    if grid.dim != 1:
        raise ValueError("trap eigenfunctions are generated on 1D grids")
    x = grid.axis_nodes(0)
    out = np.empty((k_max + 1, grid.m[0]))
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if k_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(2, k_max + 1):
        out[k] = np.sqrt(2.0 / k) * x * out[k - 1] \
            - np.sqrt((k - 1.0) / k) * out[k - 2]
    return out


def hermite_function(k, grid):
    """Single trap eigenfunction u_k; warns if the box truncates it."""
    u = hermite_levels(k, grid)[k]
    edge = max(abs(u[0]), abs(u[-1]))
    if edge > 1e-12:
        import warnings

        warnings.warn(
            f"level {k} reaches {edge:.2e} at the box edge; enlarge the domain",
            stacklevel=2,
        )
    return u


def hermite_energy(k):
    """Trap level of u_k under -d^2/dx^2 + x^2."""
    return 2 * k + 1


def standing_wave_system(family, k, n, grid, kappa, dt):
    """Trap system whose components all sit on level k.

    Family "I" aligns every component on +u_k; family "II" flips the first
    component's sign.  Both are exact solutions of the coupled flow with
    the kinetic coefficient 1 and potential |x|^2 used here.
    """
    u = hermite_function(k, grid).astype(complex)
    psis = np.repeat(u[None, :], n, axis=0)
    if family == "II":
        psis[0] = -psis[0]
    elif family != "I":
        raise ValueError("family must be 'I' or 'II'")
    potentials = np.repeat(grid.radius_sq()[None], n, axis=0)
    return SLSystem(
        grid=grid,
        psis=psis,
        potentials=potentials,
        beta=np.zeros((n, n)),
        adjacency=np.ones((n, n)),
        kappa=kappa,
        dt=dt,
        kinetic=1.0,
    )


def gaussian_fields(grid, centers, widths):
    """Unit-mass Gaussian bumps exp(-a_j |x - c_j|^2), one per row.

    The analytic prefactor sqrt(a/pi) does not give unit L2 mass, so each
    field is renormalized on the grid; the coupled model assumes mass one.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    widths = np.asarray(widths, dtype=float)
    if centers.shape[1] != grid.dim:
        raise ValueError("center dimension does not match grid")
    nodes = grid.nodes()
    out = np.empty((len(centers),) + grid.shape, dtype=complex)
    for j, (c, a) in enumerate(zip(centers, widths)):
        r2 = np.zeros(grid.shape)
        for x, ci in zip(nodes, c):
            r2 = r2 + (x - ci) ** 2
        out[j] = normalize(grid, np.exp(-a * r2))
    return out


def trapped_pair_system(grid, centers, widths, trap_scales, beta, kappa, dt,
                        adjacency=None):
    """Gaussian components in per-component traps pi^2 alpha_j^2 |x|^2."""
    psis = gaussian_fields(grid, centers, widths)
    n = len(psis)
    trap_scales = np.asarray(trap_scales, dtype=float)
    r2 = grid.radius_sq()
    potentials = np.array([np.pi**2 * a**2 * r2 for a in trap_scales])
    if adjacency is None:
        adjacency = np.ones((n, n))
    return SLSystem(
        grid=grid,
        psis=psis,
        potentials=potentials,
        beta=beta,
        adjacency=adjacency,
        kappa=kappa,
        dt=dt,
        kinetic=0.5,
    )


def correlated_trap_system(grid, overlaps, kappa, dt, adjacency=None,
                           shifts=None, kinetic=0.5):
    """Trap system whose initial overlap matrix equals ``overlaps``.

    Components are built as combinations of trap eigenfunctions via a
    Cholesky factor, so <psi_i, psi_j> hits the requested (positive
    semidefinite, unit diagonal) matrix exactly up to quadrature error.
    ``shifts`` adds a constant nu_j to component j's potential.
    """
    overlaps = np.asarray(overlaps)
    n = len(overlaps)
    factor = np.linalg.cholesky(overlaps)
    modes = hermite_levels(n - 1, grid).astype(complex)
    psis = np.tensordot(factor, modes, axes=1)
    base = 0.5 * grid.radius_sq() if kinetic == 0.5 else grid.radius_sq()
    potentials = np.repeat(base[None], n, axis=0)
    if shifts is not None:
        shifts = np.asarray(shifts, dtype=float)
        potentials = potentials + shifts.reshape((n,) + (1,) * grid.dim)
    if adjacency is None:
        adjacency = np.ones((n, n))
    return SLSystem(
        grid=grid,
        psis=psis,
        potentials=potentials,
        beta=np.zeros((n, n)),
        adjacency=adjacency,
        kappa=kappa,
        dt=dt,
        kinetic=kinetic,
    )


# ---------------------------------------------------------------------------
# correlation-matrix reference dynamics (closed ODEs used as oracles)


def pair_correlation_rhs(h, detuning, kappa):
    """Two-component overlap ODE: dh/dt = -i*nu*h + (kappa/2)(1 - h^2)."""
    return -1j * detuning * h + 0.5 * kappa * (1.0 - h * h)


def pair_equilibrium(detuning, kappa):
    """Stable overlap limit for strong coupling (kappa >= |detuning|)."""
    if kappa < abs(detuning):
        raise ValueError("no equilibrium below the critical coupling")
    ratio = detuning / kappa
    return -1j * ratio + np.sqrt(1.0 - ratio * ratio)


def network_correlation_rhs(h, kappa, adjacency=None, shifts=None):
    """Closed overlap-matrix dynamics for identical-potential ensembles.

    dh_ij/dt = -i(nu_i - nu_j) h_ij + (kappa/2N) *
      [sum_k a_ik (h_kj - h_ik h_ij) + sum_k a_jk (h_ik - h_kj h_ij)]

    Valid whenever the potentials share a common profile (constant shifts
    ``nu`` allowed) and any cubic weights are uniform across components, so
    the nonlinearity acts as one common phase.
    """
    n = len(h)
    if adjacency is None:
        adjacency = np.ones((n, n))
    gain = adjacency @ h + h @ adjacency.T
    row = np.sum(adjacency * h, axis=1)
    col = np.sum(adjacency * h.T, axis=1)
    out = (kappa / (2.0 * n)) * (gain - (row[:, None] + col[None, :]) * h)
    if shifts is not None:
        shifts = np.asarray(shifts, dtype=float)
        out = out - 1j * (shifts[:, None] - shifts[None, :]) * h
    return out
