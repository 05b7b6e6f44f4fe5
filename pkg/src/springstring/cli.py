"""Command-line interface: ``springstring <command> [options]``.

Every command prints ``key=value`` summary lines.  Tables go to ``--output``
as CSV (standard output when the option is ``-``; the summary then moves to
standard error).  Options may also come from a ``key = value`` file passed
with ``--config``; flags given on the command line win.

Exit status is 0 on success, 2 for invalid input and 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import os
import sys

import numpy as np

from .cavity import cavity_spectrum, count_levels, graphical_curves, write_cavity_csv
from .errors import ParameterError, ResonanceError, SpringStringError
from .model import ModelParams, dispersion_omega
from .modes import (check_coefficient_identities, check_pv_identity, check_pv_identity_cross,
                    r_matrix)
from .scattering import (coefficients, reflection_probability, resonance_quality, s_matrix,
                         sweep, t_matrix,
                         write_sweep_csv)
from .spectral import (bound_mode, dalembert_poles, kg_poles, perturbative_dalembert,
                       perturbative_kg, perturbative_omega_b)
from .timedomain import (GridSpec, Sponge, fit_decay_rate, simulate_bound, simulate_cavity,
                         simulate_radiation, simulate_wavepacket, spectrum_from_timeseries,
                         write_timeseries_csv)

THREADS_ENV = "SPRING_STRING_THREADS"

# per-command model defaults, used when neither a flag nor the config file sets them
MODEL_DEFAULTS = {
    "scatter": (0.5, 1.0, 0.3),
    "poles": (0.1, 1.0, 0.0),
    "radiation": (0.2, 1.0, 0.0),
    "wavepacket": (4.0, 1.0, 0.5),
    "cavity": (0.477, 1.0, 0.3),
    "bound": (0.3, 1.0, 1.5),
    "identities": (0.5, 1.0, 0.3),
}

GRID_DEFAULTS = {
    # length, dx, sponge width, duration, record_every
    "radiation": (100.0, 0.02, 30.0, 250.0, 5),
    "wavepacket": (None, 0.05, 15.0, None, 1),
    "cavity": (20.0, 0.02, 0.0, 1000.0, 4),
    "bound": (60.0, 0.02, 20.0, 500.0, 5),
}


def parse_range(text: str) -> tuple[float, float, int]:
    """``"start:stop:count"`` -> ``(start, stop, count)``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if n < 2 or not hi > lo:
        raise argparse.ArgumentTypeError(f"range needs stop > start and count >= 2, got {text!r}")
    return lo, hi, n


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class Report:
    """Collects ``key=value`` lines for one run."""

    def __init__(self, stream):
        self.stream = stream

    def __call__(self, **items):
        for key, value in items.items():
            print(f"{key}={_fmt(value)}", file=self.stream)

    def note(self, text: str):
        print(f"# {text}", file=self.stream)


@contextlib.contextmanager
def _open_output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _report_for(args) -> Report:
    to_stdout = getattr(args, "output", None) not in (None, "-")
    return Report(sys.stdout if to_stdout else sys.stderr)


def _params(args, scenario: str) -> ModelParams:
    kd, od, gd = MODEL_DEFAULTS[scenario]
    return ModelParams(kd if args.kappa is None else args.kappa,
                       od if args.Omega0 is None else args.Omega0,
                       gd if args.omega0 is None else args.omega0)


def _threads(requested: int | None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = requested or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return n


# ---------------------------------------------------------------- commands

def cmd_scatter(args) -> int:
    p = _params(args, "scatter")
    lo, hi, n = args.omega if args.omega else (p.omega0 + 0.01, 5.0, 2000)
    rows = sweep(lo, hi, n, p, workers=_threads(args.workers))
    report = _report_for(args)
    with _open_output(args.output) as fh:
        write_sweep_csv(rows, fh)
    unit = max(abs(abs(r.coeffs.rho) ** 2 + abs(r.coeffs.tau) ** 2 - 1) for r in rows)
    report(rows=len(rows), shifted=sum(r.shifted for r in rows), max_unitarity_residual=unit)
    report(Omega_kappa=p.Omega_kappa)
    if p.kappa == 0:
        report(resonance="none")
        report.note("no coupling: no resonance")
    elif p.Omega_kappa <= p.omega0:
        report(resonance="none")
        report.note("no resonance: Omega_kappa below the gap omega0")
    elif p.omega0 >= p.Omega0:
        report(resonance="soft")
        report.note("omega0 between Omega0 and Omega_kappa: maximum of |rho| too soft to be a resonance")
    else:
        q = resonance_quality(p)
        report(resonance="sharp", q_numeric=q["q_numeric"], q_perturbative=q["q_perturbative"],
               width=q["width"], antiresonance_abs_rho=abs(coefficients(p.Omega0, p).rho))
    return 0


def cmd_poles(args) -> int:
    p = _params(args, "poles")
    report = Report(sys.stdout)
    report(kappa=p.kappa, Omega0=p.Omega0, omega0=p.omega0, Omega_kappa=p.Omega_kappa)
    if p.omega0 == 0:
        ps = dalembert_poles(p)
        z0p, zpp = perturbative_dalembert(p)
        report(kind=ps.kind, z0=ps.root0, z_plus=ps.root_plus, z_minus=ps.root_minus)
        report(z0_perturbative=z0p, z_plus_perturbative=zpp,
               z0_diff=abs(ps.root0 - z0p), z_plus_diff=abs(ps.root_plus - zpp))
        report(all_real_parts_negative=all(z.real < 0 for z in ps.roots) if p.kappa > 0 else False)
    else:
        ps = kg_poles(p)
        report(kind=ps.kind, Z0=ps.root0, Z_plus=ps.root_plus, Z_minus=ps.root_minus)
        for name, w, ok in zip(("omega_0", "omega_plus", "omega_minus"), ps.frequencies, ps.physical):
            report(**{name: w, f"{name}_physical": ok})
        if p.omega0 < p.Omega0:
            z0p, zpp = perturbative_kg(p)
            report(Z0_perturbative=z0p, Z_plus_perturbative=zpp,
                   Z0_diff=abs(ps.root0 - z0p), Z_plus_diff=abs(ps.root_plus - zpp))
    report(max_cubic_residual=max(ps.residuals), gamma=ps.gamma)
    if p.omega0 < p.Omega0 and p.kappa > 0:
        report(gamma_leading=p.kappa**2 / (2 * p.Omega0 * math.sqrt(p.Omega0**2 - p.omega0**2)))
    bm = bound_mode(p)
    report(bound_mode=bm is not None)
    if bm is not None:
        report(omega_b=bm.omega_b, omega_b_perturbative=perturbative_omega_b(p), u_b=bm.u_b,
               C_b=bm.c_b, X_b=bm.x_amplitude, decay_length=bm.decay_length,
               u_residual=bm.u_residual)
    return 0


def _grid(args, scenario: str, length: float | None = None) -> GridSpec:
    d_len, d_dx, d_sponge, _, _ = GRID_DEFAULTS[scenario]
    dx = args.dx or d_dx
    dt = args.dt or 0.5 * dx
    length = args.length or length or d_len
    width = d_sponge if args.sponge_width is None else args.sponge_width
    sponge = Sponge(width, args.sponge_strength) if width > 0 else None
    return GridSpec.from_length(length, dx, dt, sponge)


def _duration(args, scenario):
    return args.duration or GRID_DEFAULTS[scenario][3]


def _record_every(args, scenario):
    return args.record_every or GRID_DEFAULTS[scenario][4]


def sim_radiation(args, report) -> int:
    p = _params(args, "radiation")
    grid = _grid(args, "radiation")
    series = simulate_radiation(p, args.x0, _duration(args, "radiation"), grid,
                                _record_every(args, "radiation"))
    with _open_output(args.output) as fh:
        write_timeseries_csv(series, fh)
    fit = fit_decay_rate(series.times, series.e_osc)
    exact = dalembert_poles(p).gamma if p.omega0 == 0 else kg_poles(p).gamma
    rel = abs(fit.gamma - exact) / exact if exact > 0 else float("nan")
    report(gamma_fdtd=fit.gamma, gamma_exact=exact, rel_err=rel, r_squared=fit.r_squared,
           fit_method=fit.method, decaying=fit.decaying)
    return 0


def sim_wavepacket(args, report) -> int:
    p = _params(args, "wavepacket")
    if args.k0 is not None:
        k0 = args.k0
    elif args.omega_carrier is not None:
        if not args.omega_carrier > p.omega0:
            raise ParameterError("carrier frequency must exceed omega0")
        k0 = math.sqrt(args.omega_carrier**2 - p.omega0**2)
    else:
        k0 = math.sqrt(p.Omega0**2 - p.omega0**2) if p.Omega0 > p.omega0 else 1.0
    sigma = args.sigma or 20 / k0
    width = GRID_DEFAULTS["wavepacket"][2] if args.sponge_width is None else args.sponge_width
    grid = _grid(args, "wavepacket", length=2 * (16 * sigma + width))
    res = simulate_wavepacket(p, k0, sigma, grid)
    omega = dispersion_omega(k0, p)
    rho2 = reflection_probability(omega, p)
    report(k0=k0, omega=omega, sigma_x=sigma, reflected=res.reflected_fraction,
           transmitted=res.transmitted_fraction, balance=res.balance,
           abs_rho_squared=rho2, abs_err=abs(res.reflected_fraction - rho2))
    return 0


def _match_peaks(peaks, levels, bin_width, report):
    levels = np.asarray(levels)
    worst = 0.0
    for i, pk in enumerate(peaks):
        j = int(np.argmin(np.abs(levels - pk.frequency)))
        off = abs(levels[j] - pk.frequency) / bin_width
        worst = max(worst, off)
        report(**{f"peak_{i}": pk.frequency, f"level_{i}": levels[j], f"bins_off_{i}": off})
    return worst


def sim_cavity(args, report) -> int:
    p = _params(args, "cavity")
    grid = _grid(args, "cavity")
    duration = _duration(args, "cavity")
    series = simulate_cavity(p, duration, grid, kick=args.kick,
                             record_every=_record_every(args, "cavity"))
    with _open_output(args.output) as fh:
        write_timeseries_csv(series, fh)
    signal = series.x_osc if args.kick == "oscillator" else series.probes["quarter"]
    peaks = spectrum_from_timeseries(series.times, signal, rel_threshold=args.threshold)
    top = max(pk.frequency for pk in peaks) if peaks else 1.0
    n_max = int(top * grid.length / (2 * math.pi)) + 4
    spec = cavity_spectrum(grid.length, n_max, p)
    levels = spec.even_omega if args.kick == "oscillator" else spec.odd_omega
    bin_width = 2 * math.pi / duration
    report(length=grid.length, kick=args.kick, n_peaks=len(peaks), bin_width=bin_width)
    worst = _match_peaks(peaks, levels, bin_width, report)
    report(max_bins_off=worst, matched=worst <= 1.0)
    return 0


def sim_bound(args, report) -> int:
    p = _params(args, "bound")
    bm = bound_mode(p)
    if bm is None:
        raise ParameterError("no bound mode: needs omega0 > Omega0 and kappa > 0")
    grid = _grid(args, "bound")
    duration = _duration(args, "bound")
    series = simulate_bound(p, duration, grid, _record_every(args, "bound"))
    with _open_output(args.output) as fh:
        write_timeseries_csv(series, fh)
    loss = 1 - series.e_total[-1] / series.e_total[0]
    fit = fit_decay_rate(series.times, series.e_total)
    peaks = spectrum_from_timeseries(series.times, series.x_osc)
    bin_width = 2 * math.pi / duration
    report(energy_loss=loss, gamma_fdtd=fit.gamma, decaying=fit.decaying, omega_b=bm.omega_b)
    worst = _match_peaks(peaks, [bm.omega_b], bin_width, report)
    report(max_bins_off=worst, matched=worst <= 1.0)
    return 0


SIMULATIONS = {"radiation": sim_radiation, "wavepacket": sim_wavepacket,
               "cavity": sim_cavity, "bound": sim_bound}


def cmd_simulate(args) -> int:
    return SIMULATIONS[args.scenario](args, _report_for(args))


def cmd_cavity(args) -> int:
    p = _params(args, "cavity")
    spec = cavity_spectrum(args.length, args.n_max, p)
    report = _report_for(args)
    with _open_output(args.output) as fh:
        write_cavity_csv(spec, fh)
    if args.curves:
        ks = np.linspace(1e-3, spec.even_k[-1], args.curve_points)
        cur = graphical_curves(args.length, p, ks)
        with open(args.curves, "w") as fh:
            fh.write("k,omega,tan_eta,tan_wall\n")
            for row in zip(cur["k"], cur["omega"], cur["tan_eta"], cur["tan_wall"]):
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    even = spec.even_omega
    top = min(even[-1], spec.free_omega[-1])
    report(length=args.length, n_even=len(even), max_residual=max(spec.residuals),
           missing_branches=len(spec.missing_branches))
    report(even_below=count_levels(even, 0.0, top), free_below=count_levels(spec.free_omega, 0.0, top))
    if p.kappa > 0 and p.omega0 < p.Omega_kappa < top:
        half = args.window or 4 * math.pi / args.length
        w = p.Omega_kappa
        report(window_low=w - half, window_high=w + half,
               even_in_window=count_levels(even, w - half, w + half),
               free_in_window=count_levels(spec.free_omega, w - half, w + half))
    return 0


def cmd_identities(args) -> int:
    p = _params(args, "identities")
    rng = np.random.default_rng(args.seed)
    report = Report(sys.stdout)
    k_res = math.sqrt(max(p.Omega_kappa**2 - p.omega0**2, 0.0))
    worst = {"coefficients": 0.0, "pv": 0.0, "pv_cross": 0.0, "r_unitarity": 0.0,
             "s_unitarity": 0.0, "t_det": 0.0}
    for _ in range(args.samples):
        k1, k2 = rng.uniform(0.05, 2 * k_res + 2, size=2)
        if k1 == k2 or dispersion_omega(k1, p) == p.Omega_kappa:
            continue
        omega = dispersion_omega(k1, p)
        worst["coefficients"] = max(worst["coefficients"],
                                    max(check_coefficient_identities(omega, p).values()))
        worst["pv"] = max(worst["pv"], check_pv_identity(k1, k2, p))
        worst["pv_cross"] = max(worst["pv_cross"], check_pv_identity_cross(k1, k2, p))
        r = r_matrix(omega, p)
        worst["r_unitarity"] = max(worst["r_unitarity"],
                                   float(np.abs(r.conj().T @ r - np.eye(2)).max()))
        s = s_matrix(omega, p)
        worst["s_unitarity"] = max(worst["s_unitarity"],
                                   float(np.abs(s.conj().T @ s - np.eye(2)).max()))
        if p.kappa > 0:
            worst["t_det"] = max(worst["t_det"], abs(np.linalg.det(t_matrix(omega, p)) - 1))
    report(samples=args.samples, seed=args.seed)
    report(**{f"max_{k}": v for k, v in worst.items()})
    ok = max(worst.values()) < args.tol
    report(passed=ok)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser

def _add_model(p: argparse.ArgumentParser, scenario: str):
    kappa, Omega0, omega0 = MODEL_DEFAULTS[scenario]
    g = p.add_argument_group("model")
    g.add_argument("--kappa", type=float, default=None, help=f"coupling stiffness (default {kappa})")
    g.add_argument("--Omega0", type=float, default=None,
                   help=f"bare oscillator frequency (default {Omega0})")
    g.add_argument("--omega0", type=float, default=None,
                   help=f"string mass gap, 0 for d'Alembert (default {omega0})")


def _add_grid(p: argparse.ArgumentParser, scenario: str):
    length, dx, width, duration, every = GRID_DEFAULTS[scenario]
    g = p.add_argument_group("grid")
    g.add_argument("--length", type=float, default=None,
                   help=f"string length (default {length or 'sized to the packet'})")
    g.add_argument("--dx", type=float, default=None, help=f"grid step (default {dx})")
    g.add_argument("--dt", type=float, default=None, help="time step (default dx/2)")
    g.add_argument("--sponge-width", type=float, default=None,
                   help=f"absorbing layer width, 0 for none (default {width})")
    g.add_argument("--sponge-strength", type=float, default=0.5,
                   help="absorption rate (default 0.5)")
    if duration is not None:
        g.add_argument("--duration", type=float, default=None, help=f"run time (default {duration})")
    g.add_argument("--record-every", type=int, default=None,
                   help=f"steps between recorded samples (default {every})")


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="springstring", description=__doc__.split("\n")[0])
    parser.add_argument("--config", default=None, help="key = value file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = []

    p = sub.add_parser("scatter", help="sweep rho, tau, eta and chi over frequency")
    _add_model(p, "scatter")
    p.add_argument("--omega", type=parse_range, default=None,
                   help="start:stop:count (default omega0+0.01:5:2000)")
    p.add_argument("--workers", type=int, default=1, help=f"threads (capped by {THREADS_ENV})")
    p.add_argument("--output", default="-", help="CSV path, '-' for standard output")
    p.set_defaults(func=cmd_scatter)
    leaves.append(p)

    p = sub.add_parser("poles", help="exact and perturbative roots, decay rate, bound mode")
    _add_model(p, "poles")
    p.set_defaults(func=cmd_poles)
    leaves.append(p)

    p = sub.add_parser("simulate", help="finite-difference time-domain runs")
    scen = p.add_subparsers(dest="scenario", required=True)
    for name, text in (("radiation", "oscillator released on a string at rest"),
                       ("wavepacket", "narrow-band packet hitting the oscillator"),
                       ("cavity", "kicked closed string, spectrum of the response"),
                       ("bound", "bound mode left to evolve")):
        q = scen.add_parser(name, help=text)
        _add_model(q, name)
        _add_grid(q, name)
        q.add_argument("--output", default="-", help="time-series CSV path, '-' for standard output")
        if name == "radiation":
            q.add_argument("--x0", type=float, default=1.0, help="initial oscillator displacement")
        if name == "wavepacket":
            q.add_argument("--k0", type=float, default=None, help="carrier wavenumber")
            q.add_argument("--omega-carrier", type=float, default=None,
                           help="carrier frequency (alternative to --k0; default Omega0)")
            q.add_argument("--sigma", type=float, default=None, help="packet width (default 20/k0)")
        if name == "cavity":
            q.add_argument("--kick", choices=("oscillator", "odd"), default="oscillator")
            q.add_argument("--threshold", type=float, default=0.01,
                           help="relative spectral peak threshold")
        q.set_defaults(func=cmd_simulate)
        leaves.append(q)

    p = sub.add_parser("cavity", help="even, odd and free spectra of a closed string")
    _add_model(p, "cavity")
    p.add_argument("--length", type=float, default=20.0, help="string length (default 20)")
    p.add_argument("--n-max", type=int, default=20, help="highest level index (default 20)")
    p.add_argument("--window", type=float, default=None,
                   help="half width of the level-count window around Omega_kappa")
    p.add_argument("--curves", default=None, help="also write the graphical-solution curves here")
    p.add_argument("--curve-points", type=int, default=4000, help="curve samples (default 4000)")
    p.add_argument("--output", default="-", help="CSV path, '-' for standard output")
    p.set_defaults(func=cmd_cavity)
    leaves.append(p)

    p = sub.add_parser("identities", help="residuals of the mode identities on random samples")
    _add_model(p, "identities")
    p.add_argument("--samples", type=int, default=100, help="random pairs (default 100)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--tol", type=float, default=1e-10, help="pass threshold (default 1e-10)")
    p.set_defaults(func=cmd_identities)
    leaves.append(p)
    return parser, leaves


def _apply_config(path: str, leaves) -> None:
    values = read_config(path)
    known = set()
    for leaf in leaves:
        dests = {a.dest for a in leaf._actions}
        known |= dests
        own = {k: v for k, v in values.items() if k in dests}
        leaf.set_defaults(**own)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser, leaves = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(known.config, leaves)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ParameterError, ResonanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpringStringError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
