"""Maximal-velocity runs, time-integrated propagation estimates and the
dyadic assembly of the tail expectation.

All runs use the radial reduction of the 3D problem unless the Hamiltonian
lives on a Cartesian grid.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from .calculus import (DyadicWindow, ShellWindow, bracket_A_half_norm_sq, expect_functions_of_A,
                       fractional_power_H, mellin_apply, mellin_expectations, mellin_norms_sq, partition_windows,
                       spectral_windows)
from .errors import CallbackError, ConfigError, MaxvelError, PreconditionError
from .grid import Field, arr_inner, arr_norm, boundary_mass, norm, normalized, weighted_norm
from .operators import project_continuous
from .profiles import as_profile, derivative_profile, make_smooth_step, profile_squared
from .propagator import EvolutionPlan, evolve
from .states import sample_profile

WRAP_TOL = 1e-4


@dataclass
class RunConfig:
    R: float = 1.2
    a: float = 1.5
    eps: float = 0.5
    n_max: int = 4
    T: float = 40.0
    t0: float = 1.0
    dt: float = 0.01
    profile: str = "gaussian"
    width: float = 3.0
    k0: float = 0.3
    center: float = 0.0
    energy_lo: float = 0.0625
    energy_hi: float = 1.0
    theta: float = 0.25
    a_width: float = None
    shell_width: float = None
    samples_per_octave: int = 8
    seed: int = 1

    def problems(self):
        out = []
        if not (1.0 < self.R < self.a):
            out.append(f"R = {self.R:g}, a = {self.a:g} violate the threshold ordering 1 < R < a")
        if not self.eps > 0:
            out.append("eps must be positive")
        if not self.T > self.t0 > 0:
            out.append("need T > t0 > 0")
        if not self.dt > 0:
            out.append("dt must be positive")
        if self.n_max < 0:
            out.append("n_max must be >= 0")
        if not (0 < self.theta <= 0.25):
            out.append("theta must lie in (0, 1/4]")
        if not self.width > 0:
            out.append("profile width must be positive")
        if not (0 < self.energy_lo < self.energy_hi):
            out.append("energy interval must satisfy 0 < lo < hi")
        elif self.energy_lo * (1 - self.theta) < 2.0 ** (-self.n_max - 1) * (1 + self.theta):
            out.append(f"energy interval [{self.energy_lo:g}, {self.energy_hi:g}] reaches below the "
                       f"covered shells n <= {self.n_max}")
        if self.profile != "gaussian":
            out.append(f"unknown profile {self.profile!r}")
        return out

    def validate(self):
        p = self.problems()
        if p:
            raise ConfigError(p)
        return self

    # Steps with F-bar_n(b/R) F_a(b) = 0: the shell step vanishes from 1 + w_F on,
    # the tail step starts at a - w_a and R (1 + w_F) + w_a = a.
    @property
    def tail_step(self):
        w = self.a_width if self.a_width is not None else 0.5 * (self.a - self.R)
        return make_smooth_step(self.a, w)

    @property
    def shell_step(self):
        w = self.shell_width if self.shell_width is not None else 0.5 * (self.a / self.R - 1.0)
        return make_smooth_step(1.0, w)

    def to_dict(self):
        return asdict(self)


@dataclass
class TimeSeries:
    times: np.ndarray
    columns: dict = field(default_factory=dict)
    order: list = field(default_factory=list)
    cumulative: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    partial: bool = False
    notes: list = field(default_factory=list)
    final: object = None

    def add(self, name, values):
        self.columns[name] = np.asarray(values)
        if name not in self.order:
            self.order.append(name)

    def column(self, name):
        return self.columns[name]

    def at(self, name, t):
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.columns[name][i])


def log_times(t0, T, per_octave):
    n = max(int(np.ceil(np.log2(T / t0) * per_octave)), 1)
    return t0 * (T / t0) ** (np.arange(n + 1) / n)


def log_trapezoid_cumulative(times, values):
    """Cumulative int values(t) dt/t with the trapezoid rule in log t."""
    lt = np.log(times)
    inc = 0.5 * (values[1:] + values[:-1]) * np.diff(lt)
    return np.concatenate([[0.0], np.cumsum(inc)])


# ------------------------------------------------------------ initial state


def energy_filter(cfg):
    return ShellWindow(cfg.energy_lo, cfg.energy_hi, cfg.theta)


def prepare_initial_state(cfg, H, profile=None):
    """psi0 = normalised W_I(H) (localised profile), projected on the continuous subspace.

    Returns (psi0, info) with the weighted norm |<x>^{1+eps} psi0|.
    """
    g = H.grid
    if profile is None:
        w, k0, c = cfg.width, cfg.k0, cfg.center
        profile = (lambda r: np.exp(-(r - c) ** 2 / (2 * w ** 2)) * np.cos(k0 * r))
    f = sample_profile(g, profile)
    filt = spectral_windows(f, H, [energy_filter(cfg)])[0]
    filt = project_continuous(filt, H)
    mass = norm(filt) ** 2
    if mass < 1e-6:
        raise PreconditionError(f"energy filter leaves relative mass {mass:.2e} < 1e-6 of the profile")
    psi0 = normalized(filt)
    info = {"filter_mass": mass,
            "weighted_norm": weighted_norm(psi0, "bracket_x", s=1 + cfg.eps),
            "energy": arr_inner(g, psi0.values, H.apply(psi0.values)).real,
            "boundary_mass": boundary_mass(psi0)}
    return psi0, info


def _radius(grid):
    return np.abs(grid.x) if grid.radial else grid.r


def tail_norm(psi, step, t):
    g = psi.grid
    return arr_norm(g, step(_radius(g) / t) * psi.position().values)


# ------------------------------------------------------------ maximal velocity


def run_maxvel(cfg, H, psi0=None, a_values=None, shells=False, shell_times=None):
    """Tail norm |F(|x|/t > a) psi(t)| on a log-spaced mesh.

    With ``shells`` the per-shell split |F_a F_n(A/s) E_n psi| and
    |F_a Fbar_n(A/s) E_n psi|, s = R t 2^-n, is recorded at ``shell_times``.
    """
    cfg.validate()
    g = H.grid
    if psi0 is None:
        psi0, info = prepare_initial_state(cfg, H)
    else:
        info = {}
    times = log_times(cfg.t0, cfg.T, cfg.samples_per_octave)
    steps = {float(cfg.a): cfg.tail_step}
    for a in (a_values or []):
        steps[float(a)] = make_smooth_step(a, cfg.tail_step.width)
    rec = {"norm": [], "boundary": []}
    for a in steps:
        rec[a] = []

    def cb(t, psi):
        if t < cfg.t0:
            return None
        v = psi.values
        out = {"norm": arr_norm(g, v), "boundary": boundary_mass(psi)}
        for a, st in steps.items():
            out[a] = arr_norm(g, st(_radius(g) / t) * v)
        return out

    plan = EvolutionPlan(dt=cfg.dt, T=cfg.T, times=times, callbacks=(cb,))
    traj = evolve(psi0, plan, H)
    ts = traj.times[traj.times >= cfg.t0]
    series = TimeSeries(ts)
    series.add("tail_norm", traj.series(float(cfg.a)))
    for a in steps:
        if a != float(cfg.a):
            series.add(f"tail_a{a:g}", traj.series(a))
    series.add("norm", traj.series("norm"))
    series.add("boundary_mass", traj.series("boundary"))
    series.partial = traj.partial
    series.final = traj.final
    if traj.partial:
        series.notes.append(traj.error)
    wrap = np.nonzero(series.column("boundary_mass") > WRAP_TOL)[0]
    if wrap.size:
        cut = int(wrap[0])
        series.notes.append(f"wrap-around at t = {ts[cut]:.4g}; series truncated")
        series.partial = True
        series.times = ts[:cut]
        for k in list(series.columns):
            series.columns[k] = series.columns[k][:cut]
    if shells:
        _shell_split(cfg, H, psi0, series, shell_times)
    series.summary.update(info)
    series.summary.update(maxvel_trend(series, cfg.T))
    return series


def _shell_split(cfg, H, psi0, series, shell_times):
    """|F_a E_n psi|, |F_a F_n(A/s) E_n psi| and |F_a Fbar_n(A/s) E_n psi| at given times."""
    g = H.grid
    if shell_times is None:
        shell_times = [series.times[-1]]
    F = cfg.shell_step
    windows = [DyadicWindow(n, cfg.theta) for n in range(cfg.n_max + 1)]
    rows = []
    psi, t_prev = psi0, 0.0
    for t in sorted(shell_times):
        psi = evolve(psi, EvolutionPlan(dt=cfg.dt, T=t - t_prev), H).final if t > t_prev else psi
        t_prev = t
        wf = cfg.tail_step(_radius(g) / t)
        row = {"t": float(t)}
        for n, en in enumerate(spectral_windows(psi, H, windows)):
            s = cfg.R * t * 2.0 ** (-n)
            row[f"E{n}"] = arr_norm(g, wf * en.values)
            try:
                fn, fb = mellin_apply(en, [F, F.complement()], s)
                row[f"F{n}"] = arr_norm(g, wf * fn.values)
                row[f"Fbar{n}"] = arr_norm(g, wf * fb.values)
            except (MaxvelError, ValueError) as exc:
                row[f"F{n}"] = row[f"Fbar{n}"] = float("nan")
                row[f"error{n}"] = str(exc)
        rows.append(row)
    series.summary["shell_split"] = rows


def _cap(theta):
    # dilations beyond ln((1 + theta) 2^1 / (1 - theta)) separate a smoothed shell from itself
    return float(np.log(2.0 * (1 + theta) / (1 - theta)))


def a_expectations(phi, g, profiles, scale, theta=0.25):
    """<phi, G(A/s) g>: Mellin representation on 1D and radial grids, capped
    group quadrature (exact for shell-localised states) otherwise."""
    if g.grid.dim == 1:
        return mellin_expectations(phi, g, profiles, scale)
    return expect_functions_of_A(phi, g, profiles, scale, tol=1e-8, cap=_cap(theta))


def a_norms_sq(g, profiles, scale, theta=0.25):
    """||G(A/s) g||^2 for real profiles G."""
    if g.grid.dim == 1:
        return mellin_norms_sq(g, profiles, scale)
    sq = [profile_squared(p) for p in profiles]
    return [float(np.real(v)) for v in expect_functions_of_A(g, g, sq, scale, tol=1e-10, cap=_cap(theta))]


def maxvel_trend(series, T):
    """The desk-scale substitute for o(1): decrease across T/4, T/2, T."""
    tails = series.column("tail_norm")
    if tails.size == 0:
        return {"trend_ok": False}
    ts = series.times
    pick = [series.at("tail_norm", T / 4), series.at("tail_norm", T / 2), series.at("tail_norm", ts[-1])]
    nrm = series.column("norm")[0]
    decreasing = pick[0] > pick[1] > pick[2]
    decrease = 1.0 - pick[2] / pick[1] if pick[1] > 0 else 0.0
    return {"tail_T4": pick[0], "tail_T2": pick[1], "tail_T": pick[2],
            "decrease_T2_T": decrease, "strictly_decreasing": bool(decreasing),
            "below_floor": bool(pick[2] < 0.05 * nrm),
            "trend_ok": bool(decreasing and (decrease >= 0.25 or pick[2] < 0.05 * nrm))}


# ------------------------------------------------------------ propagation estimates


def _estimate_profile(cfg, variant):
    F = cfg.shell_step
    if variant == "F_prime":
        return derivative_profile(F)
    if variant == "F":
        return as_profile(F)
    if variant == "bump":
        return derivative_profile(F, normalize=True)
    raise ValueError(f"unknown variant {variant!r}")


def run_propagation_estimate(cfg, H, n, variant="F_prime", psi0=None, R=None, noise=1e-12,
                             burn_in=4.0):
    """I(T) = int_1^T |G(A/s) E_n psi(t)|^2 dt/t, s = R t 2^-n.

    G = F' (variant F_prime), F (variant F, normalised by |<A>^{1/2} E_n psi(0)|^2)
    or the normalised bump (variant bump, integral split at t = 2^n / R).
    Cauchy increments are compared once s >= burn_in, i.e. after the
    initial A-spread of the state has been outrun by the scale.
    """
    R = cfg.R if R is None else R
    if psi0 is None:
        psi0, _ = prepare_initial_state(cfg, H)
    G = _estimate_profile(cfg, variant)
    window = DyadicWindow(n, cfg.theta)
    times = log_times(cfg.t0, cfg.T, cfg.samples_per_octave)

    def cb(t, psi):
        if t < cfg.t0:
            return None
        en = spectral_windows(psi, H, [window])[0]
        s = R * t * 2.0 ** (-n)
        return {"val": a_norms_sq(en, [G], s, cfg.theta)[0], "shell": norm(en)}

    traj = evolve(psi0, EvolutionPlan(dt=cfg.dt, T=cfg.T, times=times, callbacks=(cb,)), H)
    ts = traj.times[traj.times >= cfg.t0]
    if traj.partial and ts.size < 2:
        raise CallbackError(traj.error)
    vals = traj.series("val")[-ts.size:]
    series = TimeSeries(ts)
    series.add("integrand", vals)
    series.add(f"shell{n}", traj.series("shell")[-ts.size:])
    cum = log_trapezoid_cumulative(ts, vals)
    series.add("cumulative", cum)
    series.cumulative["I"] = cum
    series.partial = traj.partial
    if traj.partial:
        series.notes.append(traj.error)
    e0 = spectral_windows(psi0, H, [window])[0]
    if variant == "F":
        normalizer = bracket_A_half_norm_sq(e0)
    else:
        normalizer = norm(e0) ** 2
    series.summary.update({"n": n, "R": R, "variant": variant, "normalizer": normalizer,
                           "ratio": float(cum[-1] / normalizer) if normalizer > 0 else float("nan")})
    series.summary.update(cauchy_increments(ts, cum, normalizer, noise, burn_in * 2.0 ** n / R))
    if variant == "bump":
        split = 2.0 ** n / R
        series.summary["split_time"] = split
        i_split = np.interp(np.log(max(split, ts[0])), np.log(ts), cum)
        series.summary["I_early"] = float(i_split)
        series.summary["I_late"] = float(cum[-1] - i_split)
    return series


def cauchy_increments(ts, cum, normalizer, noise=1e-12, t_start=None):
    """I(2T) - I(T) for the dyadic times T = t0 2^j inside the mesh.

    Increments are compared from the first T >= t_start on.  ``shrinking``
    holds when each is at most half the previous one or both sit below the
    noise floor noise * normalizer, and at least two are compared.
    """
    t0 = ts[0]
    t_start = t0 if t_start is None else max(t_start, t0)
    out_t, inc = [], []
    T = 2 * t0
    prev = np.interp(np.log(t0), np.log(ts), cum)
    while T <= ts[-1] * (1 + 1e-12):
        cur = np.interp(np.log(T), np.log(ts), cum)
        inc.append(float(cur - prev))
        out_t.append(float(T))
        prev = cur
        T *= 2
    floor = noise * max(normalizer, 1e-300)
    first = next((i for i, t in enumerate(out_t) if t / 2 >= t_start * (1 - 1e-12)), len(out_t))
    ok = len(inc) - first >= 2
    ratios = []
    for a, b in zip(inc[first:-1], inc[first + 1:]):
        if a <= floor and b <= floor:
            ratios.append(float("nan"))
            continue
        r = b / a if a > 0 else np.inf
        ratios.append(float(r))
        if not (b <= 0.5 * a or b <= floor):
            ok = False
    return {"increment_times": out_t, "increments": inc, "compared_from": float(t_start),
            "increment_ratios": ratios, "noise_floor": floor, "shrinking": bool(ok)}


# ------------------------------------------------------------ dyadic assembly


def dyadic_terms(cfg, H, psi, t, windows=None):
    """Pieces of <psi, F_a^2 psi> at time t.

    shell_n = <H^{-1/2} psi, F_a^2 W_n(H)^2 H^{1/2} psi> for the shells and the
    two tails (the squares of the windows add up to one), each split into its
    F_n(A/s) and Fbar_n(A/s) parts; Q = <H^{-1/2} psi, [H^{1/2}, F_a^2] psi>.
    """
    g = H.grid
    Fa = cfg.tail_step
    wf2 = Fa(_radius(g) / t) ** 2
    shells, hi, lo = partition_windows(cfg.n_max, cfg.theta) if windows is None else windows
    m_half = fractional_power_H(psi, H, -0.5)
    p_half = fractional_power_H(psi, H, 0.5)
    direct = arr_inner(g, psi.values, wf2 * psi.values).real
    cross = arr_inner(g, m_half.values, wf2 * p_half.values)
    Q = direct - cross
    wins = list(shells) + [hi, lo]
    ens = spectral_windows(p_half, H, wins)
    phis = spectral_windows(Field(g, wf2 * m_half.values), H, wins)
    out = {"t": float(t), "direct": direct, "Q": Q, "cross": cross, "split_failed": []}
    F, Fbar = cfg.shell_step, cfg.shell_step.complement()
    assembled = Q
    for i, (en, ph) in enumerate(zip(ens, phis)):
        name = f"shell{i}" if i < len(shells) else ("high" if i == len(shells) else "low")
        val = arr_inner(g, ph.values, en.values)
        out[name] = val
        if i < len(shells):
            s = cfg.R * t * 2.0 ** (-i)
            try:
                a, b = a_expectations(ph, en, [F, Fbar], s, cfg.theta)
            except MaxvelError:
                a, b = val, 0.0
                out["split_failed"].append(i)
            out[f"F{i}"], out[f"Fbar{i}"] = a, b
            assembled += a + b
        elif name == "high":
            assembled += val
    out["assembled"] = assembled
    return out


def run_dyadic_assembly(cfg, H, psi0=None, times=None, q_from=4.0, closure_tol=0.02, q_band=(1.7, 2.3)):
    """Evaluate the decomposition at sampled times and check its closure and Q(t) ~ 1/t.

    ``Q_halving`` requires |Q(t)| / |Q(2t)| inside ``q_band`` for every
    sampled doubling with t >= q_from.
    """
    cfg.validate()
    if psi0 is None:
        psi0, _ = prepare_initial_state(cfg, H)
    if times is None:
        times = cfg.t0 * 2.0 ** np.arange(int(np.floor(np.log2(cfg.T / cfg.t0))) + 1)
    times = np.asarray(times, dtype=float)
    rows = []

    def cb(t, psi):
        if t <= 0:
            return None
        rows.append(dyadic_terms(cfg, H, psi, t))
        return None

    traj = evolve(psi0, EvolutionPlan(dt=cfg.dt, T=float(times[-1]), times=times, callbacks=(cb,)), H)
    ts = np.array([r["t"] for r in rows])
    series = TimeSeries(ts)
    series.add("tail_expectation", [r["direct"] for r in rows])
    for i in range(cfg.n_max + 1):
        series.add(f"shell{i}", [r[f"shell{i}"].real for r in rows])
    series.add("high", [r["high"].real for r in rows])
    series.add("low", [r["low"].real for r in rows])
    series.add("Q", [r["Q"].real for r in rows])
    series.add("Q_abs", [abs(r["Q"]) for r in rows])
    series.add("assembled", [r["assembled"].real for r in rows])
    series.partial = traj.partial
    closure = [abs(r["assembled"] - r["direct"]) / abs(r["direct"]) if r["direct"] > 0 else np.inf
               for r in rows]
    qa = np.array([abs(r["Q"]) for r in rows])
    ratios = (qa[:-1] / qa[1:]).tolist() if qa.size > 1 else []
    pairs = [(ts[i], r) for i, r in enumerate(ratios) if abs(ts[i + 1] / ts[i] - 2) < 1e-9 and ts[i] >= q_from]
    series.final = traj.final
    series.summary.update({
        "closure": closure, "max_closure": float(max(closure)) if closure else float("nan"),
        "low_tail_fraction": [abs(r["low"]) / abs(r["direct"]) if r["direct"] else np.inf for r in rows],
        "Q_ratios": ratios,
        "Q_ratio_times": ts[:-1].tolist(),
        "Q_halving": bool(pairs) and all(q_band[0] <= r <= q_band[1] for _, r in pairs),
        "closure_ok": bool(closure) and max(closure) <= closure_tol,
        "Q_t": (qa * ts).tolist(),
        "F_split": [{k: float(np.real(v)) for k, v in r.items() if k.startswith("F")} for r in rows],
        "split_failed": [r["split_failed"] for r in rows],
    })
    return series
