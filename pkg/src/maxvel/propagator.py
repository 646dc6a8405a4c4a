"""Time evolution i d/dt psi = H psi.

Production scheme is Strang splitting, exact in each factor because |p| is
diagonal in momentum space and V in position space.  A Lanczos exponential
with an a posteriori error estimate serves as the accuracy reference.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import CallbackError, KrylovStepError, PreconditionError
from .grid import Field, arr_inner, arr_norm, support_radius

PHASE_LIMIT = 0.5


def spectral_radius(H):
    lo, hi = H.spectral_bounds
    return max(abs(lo), abs(hi))


class StrangStepper:
    """Precomputed phases for e^{-iV dt/2} e^{-i|p| dt} e^{-iV dt/2}."""

    def __init__(self, H, dt):
        self.H = H
        self.dt = float(dt)
        self.half = np.exp(-0.5j * self.dt * H.V)
        self.kin = np.exp(-1j * self.dt * H.kmag)
        self.free = H.is_free

    def step_array(self, arr, nsteps=1):
        if self.free:
            return np.fft.ifftn(self.kin ** nsteps * np.fft.fftn(arr))
        out = self.half * arr
        full = self.half * self.half
        for i in range(nsteps):
            out = np.fft.ifftn(self.kin * np.fft.fftn(out))
            out = (self.half if i == nsteps - 1 else full) * out
        return out


def strang_step(f, H, dt):
    """One Strang step of size dt (negative dt runs backwards)."""
    out = Field(f.grid, StrangStepper(H, dt).step_array(f.position().values))
    return out if f.rep == "position" else out.momentum()


def _lanczos(H, v0, m):
    g = H.grid
    nv = arr_norm(g, v0)
    Q = np.zeros((m + 1,) + v0.shape, dtype=np.complex128)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    Q[0] = v0 / nv
    k = m
    for j in range(m):
        w = H.apply(Q[j])
        alpha[j] = arr_inner(g, Q[j], w).real
        w = w - alpha[j] * Q[j] - (beta[j - 1] * Q[j - 1] if j > 0 else 0.0)
        # full reorthogonalisation, cheap at these subspace sizes
        for i in range(j + 1):
            w = w - Q[i] * arr_inner(g, Q[i], w)
        b = arr_norm(g, w)
        beta[j] = b
        if b < 1e-14 * nv:
            k = j + 1
            break
        Q[j + 1] = w / b
    return Q, alpha[:k], beta[:k], nv, k


def krylov_reference_step(f, H, dt, m=30, tol=1e-10):
    """e^{-iH dt} f from an m-dimensional Lanczos space.

    The error estimate beta_m |[exp(-i dt T_m) e_1]_m| relative to ||f||
    must stay below tol, otherwise KrylovStepError is raised.
    """
    if m < 8:
        raise ValueError("Krylov subspace dimension must be >= 8")
    g = f.grid
    v0 = f.position().values.astype(np.complex128)
    if arr_norm(g, v0) == 0:
        return Field(g, np.zeros(g.shape))
    Q, alpha, beta, nv, k = _lanczos(H, v0, m)
    T = np.diag(alpha) + np.diag(beta[:k - 1], 1) + np.diag(beta[:k - 1], -1)
    ev, U = linalg.eigh(T)
    y = U @ (np.exp(-1j * dt * ev) * U[0].conj())
    est = beta[k - 1] * abs(y[k - 1]) if k == m else 0.0
    if est > tol:
        raise KrylovStepError(
            f"Krylov error estimate {est:.2e} exceeds {tol:.1e} at dt={dt:g}, m={m}; use a smaller dt")
    out = np.tensordot(y, Q[:k], axes=1) * nv
    res = Field(g, out)
    return res if f.rep == "position" else res.momentum()


@dataclass
class EvolutionPlan:
    dt: float = 0.01
    T: float = 1.0
    scheme: str = "strang"
    stride: int = 1
    callbacks: tuple = ()
    times: object = None
    krylov_m: int = 30

    def sample_times(self):
        if self.times is not None:
            ts = np.asarray(self.times, dtype=float)
            if ts.size and (np.any(np.diff(ts) * np.sign(self.T or 1.0) <= 0)):
                raise ValueError("sample times must be strictly monotone in the direction of T")
            if ts.size == 0 or ts[0] != 0.0:
                ts = np.concatenate([[0.0], ts])
            return ts
        n = int(round(abs(self.T) / self.dt))
        idx = np.arange(0, n + 1, max(int(self.stride), 1))
        ts = np.sign(self.T) * self.dt * idx if self.T else np.zeros(1)
        if n and idx[-1] != n:
            ts = np.append(ts, self.T)
        return ts


def validate_plan(plan, H, support=None, speed=None):
    """Checks the plan invariants; returns a list of problems (empty when valid)."""
    problems = []
    if not plan.dt > 0:
        problems.append("dt must be positive")
    elif plan.dt * spectral_radius(H) >= PHASE_LIMIT:
        problems.append(f"dt * lambda_max = {plan.dt * spectral_radius(H):.3g} >= {PHASE_LIMIT}")
    if plan.scheme not in ("strang", "krylov_reference"):
        problems.append(f"unknown scheme {plan.scheme!r}")
    if support is not None and speed is not None:
        budget = speed * abs(plan.T) + support
        if budget >= 0.8 * H.grid.L:
            problems.append(f"no-wrap budget violated: {budget:.3g} >= 0.8 L = {0.8 * H.grid.L:.3g}")
    return problems


def wrap_budget(grid, T, speed, f0):
    """speed * T + support radius of f0 (mass tol 1e-10) against 0.8 L."""
    r0 = support_radius(f0, 1e-10)
    return speed * T + r0, 0.8 * grid.L


@dataclass
class Trajectory:
    final: Field
    times: np.ndarray
    records: dict = field(default_factory=dict)
    partial: bool = False
    error: str = ""
    steps: int = 0

    def series(self, key):
        return np.asarray(self.records.get(key, []))


def _run_callbacks(callbacks, t, psi, records):
    for cb in callbacks:
        try:
            out = cb(t, psi)
        except Exception as exc:
            raise CallbackError(f"callback {getattr(cb, '__name__', cb)!r} failed at t={t:g}: {exc}") from exc
        if out:
            for k, v in out.items():
                records.setdefault(k, []).append(v)


def evolve(f0, plan, H):
    """Propagate f0 over the plan's sample times, invoking callbacks at each.

    A failing callback stops the run; the trajectory up to that point is
    returned with ``partial`` set and the error message recorded.
    """
    problems = validate_plan(plan, H)
    if problems:
        raise PreconditionError("; ".join(problems))
    ts = plan.sample_times()
    g = f0.grid
    arr = f0.position().values.astype(np.complex128)
    records = {}
    done = []
    steps = 0
    steppers = {}
    try:
        _run_callbacks(plan.callbacks, float(ts[0]), Field(g, arr), records)
        done.append(float(ts[0]))
        for t0, t1 in zip(ts[:-1], ts[1:]):
            span = t1 - t0
            nsteps = max(int(np.ceil(abs(span) / plan.dt - 1e-9)), 1)
            h = span / nsteps
            if plan.scheme == "strang":
                key = round(h, 15)
                st = steppers.get(key)
                if st is None:
                    st = steppers[key] = StrangStepper(H, h)
                arr = st.step_array(arr, nsteps)
            else:
                for _ in range(nsteps):
                    arr = krylov_reference_step(Field(g, arr), H, h, m=plan.krylov_m).values
            steps += nsteps
            _run_callbacks(plan.callbacks, float(t1), Field(g, arr), records)
            done.append(float(t1))
    except CallbackError as exc:
        return Trajectory(Field(g, arr), np.asarray(done), records, True, str(exc), steps)
    return Trajectory(Field(g, arr), np.asarray(done), records, False, "", steps)


def center_of_mass(f):
    """<x_1> on Cartesian grids, <|x|> on radial grids."""
    g = f.grid
    v = np.abs(f.position().values) ** 2
    c = np.abs(g.x) if g.radial else g.coords[0]
    return float(np.sum(c * v) / np.sum(v))


def group_speed(H, f0, T, dt=None, samples=9):
    """Least-squares slope of the centre of mass over [0, T]."""
    dt = 0.4 / spectral_radius(H) if dt is None else dt
    ts = np.linspace(0.0, T, samples)
    plan = EvolutionPlan(dt=dt, T=T, times=ts[1:], callbacks=(lambda t, psi: {"x": center_of_mass(psi)},))
    traj = evolve(f0, plan, H)
    x = traj.series("x")
    slope = np.polyfit(traj.times, x, 1)[0]
    return float(slope), traj.times, x


def norm_drift(H, f0, dt, nsteps):
    """max | ||psi_k|| - ||psi_0|| | / ||psi_0|| over nsteps Strang steps, checked every 100."""
    g = f0.grid
    st = StrangStepper(H, dt)
    arr = f0.position().values.astype(np.complex128)
    n0 = arr_norm(g, arr)
    worst = 0.0
    done = 0
    while done < nsteps:
        k = min(100, nsteps - done)
        arr = st.step_array(arr, k)
        done += k
        worst = max(worst, abs(arr_norm(g, arr) - n0) / n0)
    return worst
