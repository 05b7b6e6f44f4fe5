"""Finite-difference time-domain simulation of the oscillator + string.

The string is a uniform grid with an odd number of nodes so that the middle
node sits at the attachment point.  The point coupling is collocated on that
node with weight ``1/dx``.  Time stepping is velocity Verlet
(kick-drift-kick), which is symplectic and time reversible, so the discrete
energy of :func:`springstring.model.total_energy` is conserved up to a
bounded O(dt^2) oscillation on a closed (Dirichlet) string.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLError, ParameterError
from .model import FieldState, ModelParams, oscillator_energy, total_energy, trapezoid_weights
from .spectral import bound_mode

__all__ = [
    "Sponge",
    "GridSpec",
    "FieldState",
    "TimeSeries",
    "Simulator",
    "step",
    "zero_state",
    "bound_state",
    "simulate_radiation",
    "simulate_bound",
    "simulate_cavity",
    "DecayFit",
    "fit_decay_rate",
    "WavepacketResult",
    "discrete_omega",
    "wavepacket_state",
    "simulate_wavepacket",
    "Peak",
    "spectrum_from_timeseries",
    "write_timeseries_csv",
    "write_snapshot_csv",
]

MAX_COURANT = 0.5


@dataclass(frozen=True)
class Sponge:
    """Absorbing layer of ``width`` at both ends of the string.

    Each step multiplies ``xi`` and ``pi`` by ``exp(-strength * dt * s(d))``
    where ``s`` rises as ``cos^2`` from 0 at the inner edge of the layer to 1
    at the wall.  With the default strength a layer thirty units wide
    reflects less than 1e-3 of the amplitude for wavenumbers k >= 1; longer
    waves need a proportionally wider layer.
    """

    width: float
    strength: float = 0.5


@dataclass(frozen=True)
class GridSpec:
    n_nodes: int
    dx: float
    dt: float
    sponge: Sponge | None = None

    def __post_init__(self):
        if self.n_nodes < 3 or self.n_nodes % 2 == 0:
            raise ParameterError(f"n_nodes must be odd and >= 3, got {self.n_nodes}")
        if not (self.dx > 0 and self.dt > 0):
            raise ParameterError("dx and dt must be positive")
        if self.dt > MAX_COURANT * self.dx * (1 + 1e-12):
            raise CFLError(f"dt={self.dt} exceeds {MAX_COURANT} * dx = {MAX_COURANT * self.dx}")
        if self.sponge is not None:
            if self.sponge.width < 10 * self.dx:
                raise ParameterError("sponge must be at least 10 cells wide")
            if 2 * self.sponge.width >= self.length:
                raise ParameterError("sponges overlap: string too short")

    @classmethod
    def from_length(cls, length: float, dx: float, dt: float | None = None,
                    sponge: Sponge | None = None) -> GridSpec:
        cells = int(round(length / dx))
        cells += cells % 2
        return cls(cells + 1, dx, MAX_COURANT * dx if dt is None else dt, sponge)

    @property
    def length(self) -> float:
        return (self.n_nodes - 1) * self.dx

    @property
    def center(self) -> int:
        return self.n_nodes // 2

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_nodes) - self.center) * self.dx

    def damping_factors(self) -> np.ndarray | None:
        if self.sponge is None:
            return None
        d = self.length / 2 - np.abs(self.x)  # distance to the nearest wall
        s = np.where(d < self.sponge.width,
                     np.cos(0.5 * math.pi * d / self.sponge.width) ** 2, 0.0)
        return np.exp(-self.sponge.strength * self.dt * s)


@dataclass
class TimeSeries:
    times: np.ndarray
    x_osc: np.ndarray
    p_osc: np.ndarray
    e_osc: np.ndarray
    e_total: np.ndarray
    probes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)


class Simulator:
    """Owns one trajectory; not shared between threads."""

    def __init__(self, state: FieldState, grid: GridSpec, p: ModelParams):
        if state.xi.size != grid.n_nodes:
            raise ParameterError(f"state has {state.xi.size} nodes, grid has {grid.n_nodes}")
        self.grid = grid
        self.p = p
        self.xi = state.xi.astype(float, copy=True)
        self.pi = state.pi.astype(float, copy=True)
        self.X = float(state.x_osc)
        self.P = float(state.p_osc)
        self.t = float(state.t)
        self.nsteps = 0
        self._c = grid.center
        self._damp = grid.damping_factors()
        self._inv_dx2 = 1 / grid.dx**2
        self._lap = np.zeros(grid.n_nodes)
        self.xi[0] = self.xi[-1] = 0.0
        self.pi[0] = self.pi[-1] = 0.0
        self._a = np.empty(grid.n_nodes)
        self._A = 0.0
        self._accelerations()

    def _accelerations(self):
        xi, a, c, p = self.xi, self._a, self._c, self.p
        np.subtract(xi[2:] + xi[:-2], 2 * xi[1:-1], out=a[1:-1])
        a[1:-1] *= self._inv_dx2
        if p.omega0:
            a[1:-1] -= p.omega0**2 * xi[1:-1]
        a[c] -= (p.kappa / self.grid.dx) * (xi[c] - self.X)
        a[0] = a[-1] = 0.0
        self._A = -p.Omega_kappa**2 * self.X + p.kappa * xi[c]

    def step(self, n: int = 1) -> None:
        dt = self.grid.dt
        h = 0.5 * dt
        for _ in range(n):
            self.pi += h * self._a
            self.P += h * self._A
            self.xi += dt * self.pi
            self.X += dt * self.P
            self._accelerations()
            self.pi += h * self._a
            self.P += h * self._A
            if self._damp is not None:
                self.xi *= self._damp
                self.pi *= self._damp
                self._accelerations()
            self.nsteps += 1
        self.t += n * dt

    def state(self) -> FieldState:
        return FieldState(self.xi.copy(), self.pi.copy(), self.X, self.P, self.t)

    def oscillator_energy(self) -> float:
        return oscillator_energy(self.X, self.P, self.xi[self._c], self.p)

    def total_energy(self) -> float:
        return total_energy(FieldState(self.xi, self.pi, self.X, self.P, self.t), self.p, self.grid.dx)

    def run(self, duration: float, record_every: int = 1,
            probes: dict[str, int] | None = None) -> TimeSeries:
        """Advance by ``duration`` and record every ``record_every`` steps."""
        n_steps = int(round(duration / self.grid.dt))
        n_rec = n_steps // record_every + 1
        rec = {key: np.empty(n_rec) for key in ("t", "x", "p", "eo", "et")}
        probe_rec = {name: np.empty(n_rec) for name in (probes or {})}

        def record(i):
            rec["t"][i] = self.t
            rec["x"][i] = self.X
            rec["p"][i] = self.P
            rec["eo"][i] = self.oscillator_energy()
            rec["et"][i] = self.total_energy()
            for name, node in (probes or {}).items():
                probe_rec[name][i] = self.xi[node]

        record(0)
        for i in range(1, n_rec):
            self.step(record_every)
            record(i)
        return TimeSeries(rec["t"], rec["x"], rec["p"], rec["eo"], rec["et"], probe_rec)


def step(state: FieldState, grid: GridSpec, p: ModelParams) -> FieldState:
    """Advance a state by one time step (pure: the input is not modified)."""
    sim = Simulator(state, grid, p)
    sim.step()
    return sim.state()


def zero_state(grid: GridSpec) -> FieldState:
    return FieldState(np.zeros(grid.n_nodes), np.zeros(grid.n_nodes))


def simulate_radiation(p: ModelParams, x0: float, duration: float, grid: GridSpec,
                       record_every: int = 1) -> TimeSeries:
    """String at rest, all the energy initially in the displaced oscillator."""
    if grid.sponge is None and duration > grid.length:
        raise ParameterError(
            f"duration {duration} exceeds the echo time {grid.length} of an unsponged string")
    state = zero_state(grid)
    state.x_osc = x0
    return Simulator(state, grid, p).run(duration, record_every)


def bound_state(grid: GridSpec, p: ModelParams, amplitude: float = 1.0) -> FieldState:
    """Real part of the bound mode at ``t = 0`` sampled on the grid."""
    bm = bound_mode(p)
    if bm is None:
        raise ParameterError("no bound mode for these parameters (needs omega0 > Omega0)")
    xi = amplitude * bm.c_b * np.exp(-np.abs(grid.x) / bm.decay_length)
    xi[0] = xi[-1] = 0.0
    return FieldState(xi, np.zeros(grid.n_nodes), amplitude * bm.x_amplitude, 0.0)


def simulate_bound(p: ModelParams, duration: float, grid: GridSpec,
                   record_every: int = 1) -> TimeSeries:
    return Simulator(bound_state(grid, p), grid, p).run(duration, record_every)


def simulate_cavity(p: ModelParams, duration: float, grid: GridSpec, kick: str = "oscillator",
                    record_every: int = 1) -> TimeSeries:
    """Closed string (Dirichlet at both ends, no sponge) excited at ``t = 0``.

    ``kick="oscillator"`` displaces the oscillator only and excites the even
    spectrum; ``kick="odd"`` starts an antisymmetric string pulse, which never
    moves the oscillator.  A probe at a quarter of the string is recorded as
    ``"quarter"``.
    """
    if grid.sponge is not None:
        raise ParameterError("a cavity run needs a closed string (no sponge)")
    state = zero_state(grid)
    x = grid.x
    if kick == "oscillator":
        state.x_osc = 1.0
    elif kick == "odd":
        # broad enough to stay clear of the grid-dispersion regime
        width = max(4 * grid.dx, grid.length / 20)
        centre = grid.length / 8
        state.xi = (np.exp(-((x - centre) / width) ** 2) - np.exp(-((x + centre) / width) ** 2))
        state.xi[0] = state.xi[-1] = 0.0
    else:
        raise ParameterError(f"unknown kick {kick!r}")
    probes = {"quarter": grid.center + (grid.n_nodes - 1) // 4 - 1}
    return Simulator(state, grid, p).run(duration, record_every, probes)


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    r_squared: float
    n_points: int
    decaying: bool
    method: str  # "maxima" or "samples"


def fit_decay_rate(times, energy, skip_fraction: float = 0.1, min_maxima: int = 20,
                   non_decaying_below: float = 1e-4) -> DecayFit:
    """Exponential decay rate of an energy trace.

    Fits ``log E`` at its local maxima, after discarding the first
    ``skip_fraction`` of the samples, by least squares.  A trace that
    barely oscillates (a d'Alembert string radiates at every instant) has
    too few maxima; it is fitted on all the retained samples instead.
    """
    times = np.asarray(times, dtype=float)
    energy = np.asarray(energy, dtype=float)
    start = int(skip_fraction * len(times))
    t, e = times[start:], energy[start:]
    interior = (e[1:-1] > e[:-2]) & (e[1:-1] >= e[2:])
    idx = np.nonzero(interior)[0] + 1
    method = "maxima"
    if len(idx) < min_maxima:
        if len(t) >= 2 * min_maxima and e[-1] < e[0]:
            idx, method = np.arange(len(t)), "samples"
        else:
            raise ParameterError(
                f"only {len(idx)} energy maxima after the transient, need {min_maxima}")
    if np.any(e[idx] <= 0):
        raise ParameterError("energy must stay positive to fit a decay rate")
    tm, le = t[idx], np.log(e[idx])
    slope, intercept = np.polyfit(tm, le, 1)
    fitted = slope * tm + intercept
    ss_res = float(np.sum((le - fitted) ** 2))
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    gamma = -float(slope)
    return DecayFit(gamma, r2, len(idx), gamma >= non_decaying_below, method)


@dataclass(frozen=True)
class WavepacketResult:
    reflected_fraction: float
    transmitted_fraction: float
    oscillator_fraction: float
    initial_energy: float
    duration: float

    @property
    def balance(self) -> float:
        return self.reflected_fraction + self.transmitted_fraction


def discrete_omega(k, p: ModelParams, dx: float):
    """Dispersion relation of the centred three-point Laplacian."""
    return np.sqrt(p.omega0**2 + (2 / dx * np.sin(0.5 * np.asarray(k) * dx)) ** 2)


def wavepacket_state(grid: GridSpec, p: ModelParams, k0: float, sigma_x: float,
                     x_center: float) -> FieldState:
    """Right-moving Gaussian packet on an otherwise quiet system.

    The velocity field is built in Fourier space from the grid dispersion
    relation, so the packet carries no left-moving component.
    """
    x = grid.x
    psi = np.exp(-0.5 * ((x - x_center) / sigma_x) ** 2 + 1j * k0 * (x - x_center))
    ks = 2 * math.pi * np.fft.fftfreq(grid.n_nodes, d=grid.dx)
    spec = np.fft.fft(psi)
    spec[ks < 0] = 0.0  # keep only positive wavenumbers: a purely right-moving analytic signal
    analytic = np.fft.ifft(spec)
    xi = np.real(analytic)
    pi = np.real(np.fft.ifft(-1j * discrete_omega(ks, p, grid.dx) * spec))
    xi[0] = xi[-1] = pi[0] = pi[-1] = 0.0
    return FieldState(xi, pi)


def _energy_density(sim: Simulator) -> np.ndarray:
    """Per-node share of the string energy (edge terms split between endpoints)."""
    dx, p = sim.grid.dx, sim.p
    w = trapezoid_weights(sim.grid.n_nodes)
    node = 0.5 * dx * w * (sim.pi**2 + p.omega0**2 * sim.xi**2)
    edge = 0.5 * dx * (np.diff(sim.xi) / dx) ** 2
    node[:-1] += 0.5 * edge
    node[1:] += 0.5 * edge
    return node


def simulate_wavepacket(p: ModelParams, k0: float, sigma_x: float, grid: GridSpec,
                        x_center: float | None = None) -> WavepacketResult:
    """Send a narrow-band packet at the oscillator and split the energy.

    The run stops once the packet has cleared the origin; the string energy
    on each side, over the initial total, gives the reflected and transmitted
    fractions.
    """
    if not k0 > 0:
        raise ParameterError("k0 must be positive")
    omega = math.hypot(p.omega0, k0)
    if sigma_x < 10 / k0:
        raise ParameterError("packet too short for a narrow-band measurement (need sigma_x >= 10/k0)")
    if x_center is None:
        x_center = -6 * sigma_x
    if x_center > -5 * sigma_x:
        raise ParameterError("packet must start at x_c < -5 sigma_x")
    v_g = k0 / omega
    travel = (abs(x_center) + 6 * sigma_x) / v_g
    reach = abs(x_center) + 7 * sigma_x
    margin = grid.length / 2 - (grid.sponge.width if grid.sponge else 0.0)
    if reach + 2 * sigma_x > margin or abs(x_center) + 6 * sigma_x > margin:
        raise ParameterError(f"grid half-length {margin} too short for the packet (need > {reach + 2 * sigma_x})")

    sim = Simulator(wavepacket_state(grid, p, k0, sigma_x, x_center), grid, p)
    e0 = sim.total_energy()
    sim.step(int(math.ceil(travel / grid.dt)))
    dens = _energy_density(sim)
    c = grid.center
    left = dens[:c].sum() + 0.5 * dens[c]
    right = dens[c + 1:].sum() + 0.5 * dens[c]
    osc = sim.oscillator_energy()
    return WavepacketResult(left / e0, right / e0, osc / e0, e0, sim.t)


@dataclass(frozen=True)
class Peak:
    frequency: float
    amplitude: float


def spectrum_from_timeseries(times, values, rel_threshold: float = 0.05,
                             min_samples: int = 2**12) -> list[Peak]:
    """Angular frequencies of the spectral peaks of a uniformly sampled signal.

    A Hann window suppresses leakage; each local maximum of the magnitude
    above ``rel_threshold`` times the largest one is refined by a parabola
    through the log magnitudes of the neighbouring bins.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < min_samples:
        raise ParameterError(f"need at least {min_samples} samples, got {len(times)}")
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0):
        raise ParameterError("samples must be uniformly spaced")
    v = values - values.mean()
    spec = np.abs(np.fft.rfft(v * np.hanning(len(v))))
    freqs = 2 * math.pi * np.fft.rfftfreq(len(v), d=dt[0])
    if spec.max() == 0:
        return []
    floor = rel_threshold * spec.max()
    peaks = []
    for i in range(1, len(spec) - 1):
        if spec[i] >= floor and spec[i] > spec[i - 1] and spec[i] >= spec[i + 1]:
            a, b, c = np.log(spec[i - 1:i + 2] + 1e-300)
            denom = a - 2 * b + c
            shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
            df = freqs[1] - freqs[0]
            peaks.append(Peak(float(freqs[i] + shift * df), float(spec[i])))
    return peaks


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_timeseries_csv(series: TimeSeries, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    names = list(series.probes)
    writer.writerow(["t", "x_osc", "p_osc", "e_osc", "e_total"] + names)
    cols = [series.times, series.x_osc, series.p_osc, series.e_osc, series.e_total]
    cols += [series.probes[n] for n in names]
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])


def write_snapshot_csv(state: FieldState, grid: GridSpec, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x", "xi", "pi"])
    for x, xi, pi in zip(grid.x, state.xi, state.pi):
        writer.writerow([_fmt(x), _fmt(xi), _fmt(pi)])
