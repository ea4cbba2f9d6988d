"""Pseudospectral integrator for the perturbation system on a periodic box.

Unknowns are the rescaled perturbations ``rho`` (density), ``v`` (velocity,
scaled by ``rho_bar / a``) and ``phi`` (chemoattractant).  Per Fourier mode
the velocity splits into a compressible scalar ``d = i k_hat . v_hat`` that
couples to ``(rho, phi)`` through the symbol ``A(|k|)``, and a transverse
remainder damped at rate ``alpha``.  The linear part is applied exactly
(integrating factor); the quadratic-and-higher terms are explicit, formed in
real space and dealiased with the 2/3 rule.

Only the rfft half-spectrum is stored, so real fields stay real by
construction.  Nyquist planes are kept at zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft as sfft

from .dispersion import GrowthSummary, find_growth_max, solve_cubic, char_coeffs
from .model import DerivedCoeffs, ModelParams, Stability, classify_stability
from .ratefit import RateFit, fit_exponential, fit_power
from .semigroup import mode_exp_many


class VacuumError(FloatingPointError):
    """Density came too close to zero for the pressure law."""


class StepFailure(FloatingPointError):
    pass


class ResonanceError(ValueError):
    pass


# -- grid -------------------------------------------------------------------

class TorusGrid:
    """``[0, L)^dim`` with ``n`` points per axis; rfft layout along the last axis."""

    def __init__(self, dim=1, n=1024, L=2 * math.pi):
        if dim not in (1, 3):
            raise ValueError("dim must be 1 or 3")
        if n < 4 or n & (n - 1):
            raise ValueError("n must be a power of two >= 4")
        if L <= 0:
            raise ValueError("L must be positive")
        self.dim, self.n, self.L = dim, n, float(L)
        k_full = 2 * math.pi * np.fft.fftfreq(n, d=L / n)
        k_half = 2 * math.pi * np.fft.rfftfreq(n, d=L / n)
        m_full = np.fft.fftfreq(n, d=1.0 / n)
        m_half = np.fft.rfftfreq(n, d=1.0 / n)
        if dim == 1:
            self.k = [k_half]
            self.m = [m_half]
        else:
            kx, ky, kz = np.meshgrid(k_full, k_full, k_half, indexing="ij")
            mx, my, mz = np.meshgrid(m_full, m_full, m_half, indexing="ij")
            self.k = [kx, ky, kz]
            self.m = [mx, my, mz]
        self.kvec = np.stack(self.k)
        self.kmag = np.sqrt((self.kvec ** 2).sum(axis=0))
        with np.errstate(invalid="ignore", divide="ignore"):
            self.khat = np.where(self.kmag > 0, self.kvec / np.where(self.kmag > 0, self.kmag, 1), 0)
        self.spectral_shape = self.kmag.shape
        self.shape = (n,) * dim
        self.dealias = np.all([np.abs(m) < n / 3.0 for m in self.m], axis=0)
        self.nyquist = np.any([np.abs(m) == n // 2 for m in self.m], axis=0)
        # rfft storage multiplicity for Parseval sums
        mult = np.full(self.spectral_shape, 2.0)
        last = self.m[-1]
        mult[(last == 0) | (last == n // 2)] = 1.0
        self.multiplicity = mult
        self.k_max = float(np.abs(self.kvec).max()) if dim == 1 else float(
            max(np.abs(k).max() for k in self.k))

    @property
    def volume(self):
        return self.L ** self.dim

    @property
    def npoints(self):
        return self.n ** self.dim

    def x(self):
        axis = np.arange(self.n) * self.L / self.n
        if self.dim == 1:
            return [axis]
        return list(np.meshgrid(axis, axis, axis, indexing="ij"))

    def fft(self, f):
        return sfft.rfftn(f) if self.dim == 3 else sfft.rfft(f)

    def ifft(self, f_h):
        return sfft.irfftn(f_h, s=self.shape) if self.dim == 3 else sfft.irfft(f_h, n=self.n)

    def l2_norm(self, f_h, k=0):
        """L2(box) norm of ``grad^k f`` from rfft coefficients (vector fields summed)."""
        f_h = np.asarray(f_h)
        w = self.multiplicity * self.kmag ** (2 * k)
        power = np.abs(f_h) ** 2
        if power.ndim > len(self.spectral_shape):
            power = power.sum(axis=0)
        total = float(np.sum(w * power))
        return math.sqrt(total * self.volume) / self.npoints

    def lattice_wavenumbers(self):
        return np.unique(np.round(self.kmag[self.dealias & ~self.nyquist], 12))

    def check_resonant(self, xi0, zeta_bar):
        ks = self.lattice_wavenumbers()
        if np.min(np.abs(ks - xi0)) > zeta_bar:
            raise ResonanceError(f"no lattice wavenumber within {zeta_bar:.3g} of xi0={xi0:.6g}")

    @classmethod
    def resonant(cls, xi0, dim=1, n=1024, mode=8):
        """Box whose ``mode``-th lattice wavenumber equals ``xi0`` exactly."""
        return cls(dim=dim, n=n, L=2 * math.pi * mode / xi0)


# -- state ------------------------------------------------------------------

@dataclass
class TorusField:
    grid: TorusGrid
    rho_h: np.ndarray
    v_h: np.ndarray
    phi_h: np.ndarray
    t: float = 0.0

    @classmethod
    def from_real(cls, grid, rho, v, phi, t=0.0):
        v = np.asarray(v, dtype=float).reshape((grid.dim,) + grid.shape)
        field = cls(grid, grid.fft(np.asarray(rho, float)),
                    np.stack([grid.fft(c) for c in v]), grid.fft(np.asarray(phi, float)), t)
        field.zero_nyquist()
        return field

    @classmethod
    def zeros(cls, grid):
        z = np.zeros(grid.spectral_shape, dtype=complex)
        return cls(grid, z.copy(), np.zeros((grid.dim,) + grid.spectral_shape, complex), z.copy())

    def copy(self):
        return TorusField(self.grid, self.rho_h.copy(), self.v_h.copy(), self.phi_h.copy(), self.t)

    def zero_nyquist(self):
        ny = self.grid.nyquist
        self.rho_h[ny] = 0
        self.phi_h[ny] = 0
        self.v_h[:, ny] = 0

    @property
    def rho(self):
        return self.grid.ifft(self.rho_h)

    @property
    def phi(self):
        return self.grid.ifft(self.phi_h)

    @property
    def v(self):
        return np.stack([self.grid.ifft(c) for c in self.v_h])

    def mean_rho(self):
        return float(self.rho_h.flat[0].real) / self.grid.npoints

    def norms(self, k=0):
        g = self.grid
        return {"rho": g.l2_norm(self.rho_h, k), "v": g.l2_norm(self.v_h, k),
                "phi": g.l2_norm(self.phi_h, k)}

    def hermitian_defect(self):
        """Largest violation of ``f(-k) = conj f(k)`` in the stored half-spectrum."""
        worst = 0.0
        for arr in [self.rho_h, self.phi_h, *self.v_h]:
            scale = max(np.abs(arr).max(), 1e-300)
            plane = arr[..., 0]
            if self.grid.dim == 1:
                defect = abs(plane.imag)
            else:
                mirrored = np.conj(np.roll(plane[::-1, ::-1], 1, axis=(0, 1)))
                defect = np.abs(plane - mirrored).max()
            worst = max(worst, float(defect) / scale)
        return worst


# -- splitting --------------------------------------------------------------

def split_velocity(grid: TorusGrid, v_h):
    """``(d_h, w_h)``: compressible scalar and transverse remainder of ``v_h``.

    At ``k = 0`` the whole mean velocity goes to the remainder.
    """
    kv = (grid.khat * v_h).sum(axis=0)
    d_h = 1j * kv
    w_h = v_h - grid.khat * kv
    return d_h, w_h


def join_velocity(grid: TorusGrid, d_h, w_h):
    return -1j * grid.khat * d_h + w_h


# -- nonlinear terms --------------------------------------------------------

def _pressure_factor(params: ModelParams, coeffs, rho):
    rho_bar = params.rho_bar
    dens = rho + rho_bar
    if np.any(dens <= 0.01 * rho_bar):
        raise VacuumError("rho + rho_bar fell below 0.01 * rho_bar")
    p = params.pressure
    return (rho_bar / coeffs.a) * (p.derivative(dens) / dens - p.derivative(rho_bar) / rho_bar)


def nonlinear_terms(state: TorusField, params: ModelParams, coeffs: DerivedCoeffs,
                    dealias=True):
    """Spectral ``N1`` (scalar) and ``N2`` (vector), dealiased with the 2/3 mask.

    N1 = -(a / rho_bar) div(rho v)
    N2 = -(a / rho_bar) (v . grad) v
         - (rho_bar / a) (P'(rho + rho_bar) / (rho + rho_bar) - P'(rho_bar) / rho_bar) grad rho
    """
    g = state.grid
    ik = 1j * g.kvec
    rho = state.rho
    v = state.v
    adv = coeffs.a / params.rho_bar
    n1_h = -adv * sum(ik[i] * g.fft(rho * v[i]) for i in range(g.dim))
    grad_rho = [g.ifft(ik[i] * state.rho_h) for i in range(g.dim)]
    factor = _pressure_factor(params, coeffs, rho)
    n2_h = np.empty_like(state.v_h)
    grads = [[g.ifft(ik[j] * state.v_h[i]) for j in range(g.dim)] for i in range(g.dim)]
    for i in range(g.dim):
        conv = sum(v[j] * grads[i][j] for j in range(g.dim))
        n2_h[i] = g.fft(-adv * conv - factor * grad_rho[i])
    if dealias:
        n1_h *= g.dealias
        n2_h *= g.dealias
    n1_h[g.nyquist] = 0
    n2_h[:, g.nyquist] = 0
    return n1_h, n2_h


# -- stepping ---------------------------------------------------------------

@dataclass
class StepperConfig:
    dt: float
    scheme: str = "midpoint"
    dealias: bool = True
    cfl_limit: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("midpoint", "euler"):
            raise ValueError("scheme must be 'midpoint' or 'euler'")

    def check_cfl(self, grid: TorusGrid, coeffs: DerivedCoeffs):
        cfl = self.dt * coeffs.a * grid.k_max
        if cfl > self.cfl_limit:
            raise ValueError(f"CFL number {cfl:.3g} exceeds {self.cfl_limit}")
        return cfl


def _zero_mode_exp(params: ModelParams, t):
    """Closed form of ``exp(t A(0))``; keeps the density mean exactly fixed."""
    al, nu, ga = params.alpha, params.nu, params.gamma
    m = np.zeros((3, 3))
    m[0, 0] = 1.0
    m[1, 1] = math.exp(-al * t)
    m[2, 0] = ga / nu * (1.0 - math.exp(-nu * t))
    m[2, 2] = math.exp(-nu * t)
    return m


class LinearOperator:
    """Exact per-mode propagators for a fixed time step."""

    def __init__(self, grid: TorusGrid, params: ModelParams, coeffs: DerivedCoeffs):
        self.grid, self.params, self.coeffs = grid, params, coeffs
        kmag = grid.kmag.ravel()
        self._uniq, self._inverse = np.unique(np.round(kmag, 12), return_inverse=True)
        self._cache = {}

    def propagator(self, t):
        """``(E, damp)``: (n_modes, 3, 3) matrices and the transverse factor."""
        key = float(t)
        if key not in self._cache:
            uniq = self._uniq
            mats = np.empty((uniq.size, 3, 3))
            pos = uniq > 0
            if np.any(pos):
                mats[pos] = mode_exp_many(self.coeffs, self.params, uniq[pos], t).real
            mats[~pos] = _zero_mode_exp(self.params, t)
            E = mats[self._inverse].reshape(self.grid.spectral_shape + (3, 3))
            self._cache[key] = (E, math.exp(-self.params.alpha * t))
        return self._cache[key]

    def apply(self, t, y):
        E, damp = self.propagator(t)
        out = tuple(E[..., j, 0] * y[0] + E[..., j, 1] * y[1] + E[..., j, 2] * y[2]
                    for j in range(3))
        return out + (damp * y[3],)


def _to_y(state: TorusField):
    d_h, w_h = split_velocity(state.grid, state.v_h)
    return (state.rho_h, d_h, state.phi_h, w_h)


def _from_y(grid, y, t):
    f = TorusField(grid, y[0], join_velocity(grid, y[1], y[3]), y[2], t)
    f.zero_nyquist()
    return f


def _forcing(state, params, coeffs, dealias):
    n1_h, n2_h = nonlinear_terms(state, params, coeffs, dealias=dealias)
    d_n, w_n = split_velocity(state.grid, n2_h)
    return (n1_h, d_n, np.zeros_like(n1_h), w_n)


def _axpy(a, x, y):
    return tuple(xi + a * yi for xi, yi in zip(x, y))


class Stepper:
    def __init__(self, grid, params, coeffs, config: StepperConfig):
        self.grid, self.params, self.coeffs, self.config = grid, params, coeffs, config
        config.check_cfl(grid, coeffs)
        self.linear = LinearOperator(grid, params, coeffs)

    def step(self, state: TorusField) -> TorusField:
        dt = self.config.dt
        y = _to_y(state)
        f0 = _forcing(state, self.params, self.coeffs, self.config.dealias)
        if self.config.scheme == "euler":
            y_new = self.linear.apply(dt, _axpy(dt, y, f0))
        else:
            y_half = self.linear.apply(0.5 * dt, _axpy(0.5 * dt, y, f0))
            mid = _from_y(self.grid, y_half, state.t + 0.5 * dt)
            f_half = _forcing(mid, self.params, self.coeffs, self.config.dealias)
            y_new = _axpy(dt, self.linear.apply(dt, y), self.linear.apply(0.5 * dt, f_half))
        new = _from_y(self.grid, y_new, state.t + dt)
        if not all(np.all(np.isfinite(a)) for a in (new.rho_h, new.v_h, new.phi_h)):
            raise StepFailure(f"non-finite values at t={new.t:.6g}")
        return new


def step(state: TorusField, config: StepperConfig, params: ModelParams,
         coeffs: DerivedCoeffs) -> TorusField:
    """One step; builds a throwaway :class:`Stepper` (use the class in loops)."""
    return Stepper(state.grid, params, coeffs, config).step(state)


def default_dt(grid, coeffs, cfl=0.4):
    return cfl / (coeffs.a * grid.k_max)


# -- initial data -----------------------------------------------------------

def eigenmode_components(coeffs, params, r, lam):
    """``(rho, d, phi)`` amplitudes of the eigen-solution with eigenvalue ``lam``."""
    return (1.0 + 0j, -lam / (coeffs.a * r), params.gamma / (lam + params.nu + params.mu * r * r))


def resonant_mode(grid: TorusGrid, coeffs, params, k_index, lam, norm=1.0):
    """Single lattice mode along x with the eigen-solution component ratios.

    Scaled so the density perturbation has L2(box) norm ``norm``.
    """
    state = TorusField.zeros(grid)
    idx = (k_index,) if grid.dim == 1 else (k_index, 0, 0)
    r = float(grid.kmag[idx])
    rho_a, d_a, phi_a = eigenmode_components(coeffs, params, r, lam)
    amp = 1.0 + 0j
    state.rho_h[idx] = amp * rho_a
    state.phi_h[idx] = amp * phi_a
    d_h = np.zeros(grid.spectral_shape, complex)
    d_h[idx] = amp * d_a
    state.v_h = join_velocity(grid, d_h, np.zeros_like(state.v_h))
    if grid.dim == 3:
        # mirror partner on the kz = 0 plane
        mirror = (-k_index % grid.n, 0, 0)
        state.rho_h[mirror] = np.conj(state.rho_h[idx])
        state.phi_h[mirror] = np.conj(state.phi_h[idx])
        state.v_h[(slice(None),) + mirror] = np.conj(state.v_h[(slice(None),) + idx])
    scale = norm / grid.l2_norm(state.rho_h)
    state.rho_h *= scale
    state.v_h *= scale
    state.phi_h *= scale
    return state


def random_perturbation(grid: TorusGrid, amplitude, seed=0, max_mode=8, mean_rho=0.0):
    """Smooth zero-mean random data on the lowest lattice modes, max |field| = amplitude."""
    rng = np.random.default_rng(seed)
    keep = np.all([np.abs(m) <= max_mode for m in grid.m], axis=0) & (grid.kmag > 0)

    def draw():
        z = (rng.standard_normal(grid.spectral_shape)
             + 1j * rng.standard_normal(grid.spectral_shape)) * keep
        f = grid.ifft(z)
        return f * (amplitude / np.abs(f).max())

    rho = draw() + mean_rho
    v = np.stack([draw() for _ in range(grid.dim)])
    phi = draw()
    return TorusField.from_real(grid, rho, v, phi)


# -- runs -------------------------------------------------------------------

@dataclass
class NormRecord:
    t: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def add(self, state: TorusField, orders=range(4)):
        self.t.append(state.t)
        for k in orders:
            for name, value in state.norms(k).items():
                self.rows.append((state.t, name, k, value))

    def series(self, name, k):
        return (np.array([r[0] for r in self.rows if r[1] == name and r[2] == k]),
                np.array([r[3] for r in self.rows if r[1] == name and r[2] == k]))


def run(state: TorusField, stepper: Stepper, t_max, record_every=1, orders=(0,),
        stop=None, record=None):
    """Integrate to ``t_max``; ``stop(state)`` returning True ends the run early."""
    record = NormRecord() if record is None else record
    record.add(state, orders)
    nsteps = int(round((t_max - state.t) / stepper.config.dt))
    for i in range(1, nsteps + 1):
        state = stepper.step(state)
        if i % record_every == 0 or i == nsteps:
            record.add(state, orders)
        if stop is not None and stop(state):
            if record.t[-1] != state.t:
                record.add(state, orders)
            break
    return state, record


@dataclass
class EscapeResult:
    delta: float
    T_delta: float | None
    crossed: bool
    predicted: float
    norms_at_escape: dict
    linear_tracking_error: float


@dataclass
class EscapeExperiment:
    Theta: float
    xi0: float
    lattice_growth: float
    epsilon0: float
    results: list
    slope: float | None
    grid: dict
    records: dict = field(default_factory=dict, repr=False)

    def as_dict(self):
        return {
            "Theta": self.Theta, "xi0": self.xi0, "lattice_growth": self.lattice_growth,
            "epsilon0": self.epsilon0, "slope": self.slope,
            "slope_expected": 1.0 / self.lattice_growth, "grid": self.grid,
            "runs": [asdict(r) for r in self.results],
        }


def _crossing_time(t0, n0, t1, n1, level):
    """Interpolate the first crossing in log-norm between two samples."""
    if n1 <= n0:
        return t1
    frac = (math.log(level) - math.log(n0)) / (math.log(n1) - math.log(n0))
    return t0 + frac * (t1 - t0)


def run_escape_experiment(params: ModelParams, coeffs: DerivedCoeffs, deltas,
                          epsilon0=None, growth: GrowthSummary = None, n=1024, mode=8,
                          dt=None, t_max=None, stepper_config=None, record_every=None):
    """Measure the first time ``||rho||`` reaches ``epsilon0`` from ``delta``-sized data.

    With ``record_every`` set, the norms of every run are kept in
    ``records[delta]`` (every ``record_every`` steps, derivative orders 0..3).
    """
    if classify_stability(coeffs, params.nu) is not Stability.UNSTABLE:
        raise ValueError("escape experiments need the unstable regime")
    if growth is None:
        growth = find_growth_max(coeffs, params)
    if epsilon0 is None:
        epsilon0 = 0.05 * params.rho_bar
    grid = TorusGrid.resonant(growth.xi0, dim=1, n=n, mode=mode)
    k_index = mode
    r = float(grid.kmag[k_index])
    lam = solve_cubic(*char_coeffs(coeffs, params, r))[0]
    lam0 = lam[np.argmax(lam.real)]
    growth_rate = float(lam0.real)
    if dt is None:
        dt = min(default_dt(grid, coeffs), 0.05 / growth_rate)
    config = stepper_config or StepperConfig(dt=dt)
    stepper = Stepper(grid, params, coeffs, config)
    results = []
    records = {}
    for delta in deltas:
        predicted = math.log(2 * epsilon0 / delta) / growth.Theta
        horizon = t_max if t_max is not None else 3.0 * predicted + 10.0 / growth_rate
        state = resonant_mode(grid, coeffs, params, k_index, lam0, norm=delta)
        n0 = state.norms()["rho"]
        prev = (state.t, n0)
        crossed = None
        worst_track = 0.0
        steps = int(math.ceil(horizon / config.dt))
        record = None
        if record_every:
            record = records[float(delta)] = NormRecord()
            record.add(state)
        for i in range(1, steps + 1):
            state = stepper.step(state)
            nr = state.norms()["rho"]
            if record is not None and i % record_every == 0:
                record.add(state)
            # linear phase: amplitude well below the threshold
            if nr < 0.1 * epsilon0:
                expected = n0 * math.exp(growth_rate * state.t)
                worst_track = max(worst_track, abs(nr / expected - 1.0))
            if nr >= epsilon0:
                crossed = _crossing_time(prev[0], prev[1], state.t, nr, epsilon0)
                if record is not None and record.t[-1] != state.t:
                    record.add(state)
                break
            prev = (state.t, nr)
        results.append(EscapeResult(
            delta=float(delta), T_delta=crossed, crossed=crossed is not None,
            predicted=predicted, norms_at_escape=state.norms(),
            linear_tracking_error=worst_track))
    slope = None
    done = [res for res in results if res.crossed]
    if len(done) >= 2:
        x = np.log(1.0 / np.array([res.delta for res in done]))
        y = np.array([res.T_delta for res in done])
        slope = float(np.polyfit(x, y, 1)[0])
    return EscapeExperiment(Theta=growth.Theta, xi0=growth.xi0, lattice_growth=growth_rate,
                            epsilon0=epsilon0, results=results, slope=slope,
                            grid={"dim": 1, "n": n, "L": grid.L, "mode": mode,
                                  "dt": config.dt},
                            records=records)


@dataclass
class DecayExperiment:
    record: NormRecord
    fit: RateFit
    expected_rate: float
    slowest_wavenumber: float
    M: np.ndarray
    t_transient: float

    @property
    def rel_error(self):
        return abs(self.fit.rate - self.expected_rate) / abs(self.expected_rate)

    def as_dict(self):
        return {"measured_rate": self.fit.rate, "expected_rate": self.expected_rate,
                "rel_error": self.rel_error, "slowest_wavenumber": self.slowest_wavenumber,
                "r2": self.fit.r_squared, "window": list(self.fit.window),
                "M_final": float(self.M[-1]) if self.M.size else None}


def least_damped_rate(grid: TorusGrid, coeffs, params, max_mode=None):
    """``max`` over nonzero lattice modes of ``max_i Re lambda_i`` (and where)."""
    ks = grid.lattice_wavenumbers()
    ks = ks[ks > 0]
    if max_mode is not None:
        ks = ks[ks <= 2 * math.pi * max_mode / grid.L * math.sqrt(grid.dim) + 1e-12]
    lam = solve_cubic(*char_coeffs(coeffs, params, ks))
    re = lam.real.max(axis=1)
    i = int(np.argmax(re))
    return float(re[i]), float(ks[i])


def run_decay_experiment(params: ModelParams, coeffs: DerivedCoeffs, amplitude=1e-3,
                         t_max=120.0, L=20.0, n=128, dim=1, seed=0, dt=None,
                         record_every=10, fit_from=None):
    """Decay of a small random perturbation in the stable regime."""
    if classify_stability(coeffs, params.nu) is not Stability.STABLE:
        raise ValueError("decay experiments need the stable regime")
    grid = TorusGrid(dim=dim, n=n, L=L)
    if dt is None:
        dt = default_dt(grid, coeffs)
    stepper = Stepper(grid, params, coeffs, StepperConfig(dt=dt))
    state = random_perturbation(grid, amplitude, seed=seed)
    state, record = run(state, stepper, t_max, record_every=record_every, orders=range(4))
    t, rho = record.series("rho", 0)
    if rho[-1] > rho[0]:
        raise AssertionError("perturbation grew in the stable regime")
    t_transient = 5.0 / params.alpha
    lo = fit_from if fit_from is not None else max(t_transient, 0.5 * t_max)
    fit = fit_exponential(t, rho, window=(lo, t_max))
    expected, k_slow = least_damped_rate(grid, coeffs, params)
    M = torus_weighted_sup(record)
    return DecayExperiment(record=record, fit=fit, expected_rate=-expected,
                           slowest_wavenumber=k_slow, M=M, t_transient=t_transient)


def torus_weighted_sup(record: NormRecord):
    from .ratefit import combine_pair, weighted_sup

    t, _ = record.series("rho", 0)
    series = {}
    for k in range(4):
        series[("rho_phi", k)] = combine_pair(record.series("rho", k)[1],
                                              record.series("phi", k)[1])
        series[("v", k)] = record.series("v", k)[1]
    return weighted_sup(t, series)


def fit_power_tail(record: NormRecord, name="rho", k=0):
    t, y = record.series(name, k)
    return fit_power(t, y, window=(t[-1] / 100, t[-1]))


def meta_json(**kw):
    return json.dumps(kw, sort_keys=True, indent=2, default=str)
