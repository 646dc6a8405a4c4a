"""Functions of the dilation generator A and of H.

Functions of A are assembled from the dilation group.  For a profile G
with G' supported in [lo, hi], limits G(-inf), G(+inf), jump J and first
moment m1 = int b G'(b) db, the trapezoid rule with step D applied to the
principal-value representation gives

    G(A/s) f = (G(+inf)+G(-inf))/2 f
               + (D/2pi) [ sum_{j != 0} Ghat'(l_j)/(i l_j) e^{i l_j A/s} f
                           + (J A/s - m1) f ],    l_j = j D,

which is exact on the part of the A/s spectrum with |a - b| < 2pi/D for b
in [lo, hi].  The sum is truncated once the neglected weights drop below the
tolerance.

Functions of H are Chebyshev expansions on the certified spectral interval,
and H^{+-1/2} use the resolvent integral with CG solves.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy import ndimage, special
from scipy.sparse.linalg import LinearOperator, cg

from . import kernels
from .dilation import Dilator
from .errors import FilterDegreeError, PreconditionError, QuadratureError, SolverError
from .grid import Field, arr_inner, arr_norm, bandwidth, support_radius
from .operators import A_apply, Subspace, project_continuous_arr
from .profiles import as_profile

MAX_NODES = 20000
MAX_DEGREE = 20000


# ============================================================ group quadrature


@dataclass
class GroupQuadrature:
    step: float
    Lambda: float
    scale: float
    lam: np.ndarray = field(repr=False)
    weights: list = field(repr=False)
    const: list = field(repr=False)
    linear: list = field(repr=False)
    tol: float = 1e-8
    tail: float = 0.0
    capped_weight: float = 0.0
    unresolved_weight: float = 0.0

    @property
    def nodes(self):
        return self.lam.size

    @property
    def mu(self):
        return self.lam / self.scale


def _support_extent(profiles):
    return max(max(abs(p.lo), abs(p.hi)) for p in profiles)


def _a_bound(arrs_fields):
    out = 0.0
    for f in arrs_fields:
        out = max(out, support_radius(f, 1e-12) * bandwidth(f, 1e-12) + 0.5 * f.grid.dim)
    return out


def build_quadrature(profiles, scale, a_bound, tol=1e-8, max_nodes=MAX_NODES, kernel=None, lam_max=None):
    """Nodes and weights shared by several profiles.

    With ``lam_max`` the nodes stop at |lambda| <= lam_max whatever the
    weight decay; the weight left out is reported as ``tail``.

    ``a_bound`` bounds |a| on the A-spectrum of the states the quadrature
    is applied to.  ``kernel(lam)`` optionally multiplies Ghat'(lam)/lam,
    which is how the commutator remainder reuses this machinery (in that
    case the principal-value corrections are dropped).
    """
    profiles = [as_profile(p) for p in profiles]
    if not scale > 0:
        raise ValueError("scale must be positive")
    ext = _support_extent(profiles)
    step = np.pi / (a_bound / scale + ext)
    width = min(0.5 * (p.hi - p.lo) for p in profiles)
    lam_cap = 600.0 / width
    jmax = int(min(np.ceil(lam_cap / step), 4 * max_nodes))
    j = np.arange(1, jmax + 1)
    lam = j * step
    wts = []
    for p in profiles:
        gh = p.deriv_hat(lam)
        gm = p.deriv_hat(-lam)
        if kernel is None:
            wp = step / (2 * np.pi) * gh / (1j * lam)
            wm = step / (2 * np.pi) * gm / (-1j * lam)
        else:
            wp = step / (2 * np.pi) * gh * kernel(lam)
            wm = step / (2 * np.pi) * gm * kernel(-lam)
        wts.append((wp, wm))
    mag = np.zeros(jmax)
    for wp, wm in wts:
        mag = np.maximum(mag, np.abs(wp) + np.abs(wm))
    mag[~np.isfinite(mag)] = np.inf
    tail = np.cumsum(mag[::-1])[::-1]
    # kernel weights carry the small prefactor of the remainder, so once their
    # total drops below one the truncation is judged relative to it
    thr = tol
    if kernel is not None and tail.size and np.isfinite(tail[0]):
        thr = tol * min(float(tail[0]), 1.0)
    ok = np.nonzero(tail < thr)[0]
    j_cap = None if lam_max is None else int(np.floor(lam_max / step))
    tail_w = None
    if ok.size == 0 and kernel is not None and j_cap is None:
        # the kernel grows like e^{lambda/2s} and eventually beats the decay of
        # Ghat', so the weights are only asymptotically small: cut at the
        # minimum of their local envelope
        env = ndimage.maximum_filter1d(mag, size=max(3, jmax // 50) | 1, mode="nearest")
        j_min = int(np.argmin(env))
        if env[j_min] < thr:
            ok = np.array([j_min])
            tail_w = float(env[j_min])
    if ok.size == 0 and j_cap is None:
        raise QuadratureError(f"weights do not decay below tol={tol:g} within |lambda| <= {lam[-1]:.3g}")
    J = int(ok[0]) if ok.size else jmax
    if j_cap is not None:
        J = min(J, j_cap)
    if 2 * J > max_nodes:
        raise QuadratureError(
            f"group quadrature needs {2 * J} nodes (step {step:.3g}, Lambda {J * step:.3g}) "
            f"beyond the budget {max_nodes}")
    if tail_w is None:
        tail_w = float(tail[J]) if J < jmax else 0.0
    lam_nodes = np.concatenate([-lam[:J][::-1], lam[:J]])
    weights, const, linear = [], [], []
    for p, (wp, wm) in zip(profiles, wts):
        weights.append(np.concatenate([wm[:J][::-1], wp[:J]]))
        if kernel is None:
            const.append(0.5 * (p.left + p.right) - step / (2 * np.pi) * p.first_moment)
            linear.append(step / (2 * np.pi) * p.jump / scale)
        else:
            const.append(0.0)
            linear.append(0.0)
    return GroupQuadrature(step, J * step, scale, lam_nodes, weights, const, linear, tol, tail_w)


def _is_constant(p):
    return getattr(p, "jump", 1.0) == 0.0 and getattr(p, "name", "") == "const"


def functions_of_A(f, profiles, scale, tol=1e-8, cap=None, range_tol=None, a_bound=None,
                   max_nodes=MAX_NODES):
    """Vectors G(A/s) f for several profiles sharing one set of dilations.

    Nodes whose dilation parameter mu = lambda/s exceeds ``cap`` are
    dropped (sandwiched use, where the windows make them vanish).  Nodes
    whose dilation cannot be resolved on the grid are dropped as well and
    their total weight, which bounds the error, must stay below
    ``range_tol``.  Returns (list of Fields, GroupQuadrature).
    """
    profiles = [as_profile(p) for p in profiles]
    g = f.grid
    pos = f.position()
    if range_tol is None:
        range_tol = max(10 * tol, 1e-6)
    if all(_is_constant(p) for p in profiles):
        q = GroupQuadrature(1.0, 0.0, scale, np.zeros(0), [np.zeros(0)] * len(profiles),
                            [p.left for p in profiles], [0.0] * len(profiles), tol)
        return [Field(g, p.left * pos.values) for p in profiles], q
    if a_bound is None:
        a_bound = _a_bound([pos])
    lam_max = None if cap is None else cap * scale
    q = build_quadrature(profiles, scale, a_bound, tol, max_nodes, lam_max=lam_max)
    dil = Dilator(pos)
    accs = [c * pos.values for c in q.const]
    if any(lin != 0 for lin in q.linear):
        Af = A_apply(g, pos.values)
        accs = [a + lin * Af for a, lin in zip(accs, q.linear)]
    capped = unresolved = 0.0
    for idx, mu in enumerate(q.mu):
        wmax = max(abs(w[idx]) for w in q.weights)
        if cap is not None and abs(mu) > cap:
            capped += wmax
            continue
        if not dil.valid(mu):
            unresolved += wmax
            continue
        d = dil(mu)
        for a, w in zip(accs, q.weights):
            a += w[idx] * d
    q.capped_weight = capped + (q.tail if cap is not None else 0.0)
    q.unresolved_weight = unresolved
    if unresolved > range_tol:
        raise QuadratureError(
            f"dilations outside the grid's range carry weight {unresolved:.2e} > {range_tol:.1e}; "
            f"use a larger scale, a wider profile or a larger grid")
    return [Field(g, a) for a in accs], q


def function_of_A(f, F, scale, tol=1e-8, cap=None, range_tol=None):
    """F(A/s) f by group quadrature."""
    out, _ = functions_of_A(f, [F], scale, tol=tol, cap=cap, range_tol=range_tol)
    res = out[0]
    return res if f.rep == "position" else res.momentum()


def dilation_correlation(phi, g, mus):
    """c(mu) = <phi, e^{i mu A} g> evaluated as <e^{-i mu A/2} phi, e^{i mu A/2} g>.

    Returns (values, valid mask); invalid entries are NaN.
    """
    dp, dg = Dilator(phi), Dilator(g)
    grid = phi.grid
    out = np.full(len(mus), np.nan, dtype=complex)
    for i, mu in enumerate(mus):
        if dp.valid(-0.5 * mu) and dg.valid(0.5 * mu):
            out[i] = arr_inner(grid, dp(-0.5 * mu), dg(0.5 * mu))
    return out, np.isfinite(out)


@dataclass
class ExpectationInfo:
    quadrature: GroupQuadrature
    edge_correlation: float
    dropped_weight: float


def expect_functions_of_A(phi, g, profiles, scale, tol=1e-8, cap=None, corr_tol=1e-9,
                          a_bound=None, max_nodes=MAX_NODES, return_info=False):
    """<phi, G(A/s) g> for several profiles, in weak form.

    Only the correlations c(mu) = <phi, e^{i mu A} g> enter.  Dilations that
    the grid cannot resolve are skipped when the resolved correlation has
    already decayed below ``corr_tol`` times ||phi|| ||g|| at the edge of
    the resolvable range; otherwise QuadratureError is raised.
    """
    profiles = [as_profile(p) for p in profiles]
    grid = g.grid
    phi, g = phi.position(), g.position()
    if a_bound is None:
        a_bound = _a_bound([g, phi])
    q = build_quadrature(profiles, scale, a_bound, tol, max_nodes,
                         lam_max=None if cap is None else cap * scale)
    nphi, ng = arr_norm(grid, phi.values), arr_norm(grid, g.values)
    scale_c = max(nphi * ng, 1e-300)
    base = arr_inner(grid, phi.values, g.values)
    res = [c * base for c in q.const]
    if any(lin != 0 for lin in q.linear):
        Ag = arr_inner(grid, phi.values, A_apply(grid, g.values))
        res = [r + lin * Ag for r, lin in zip(res, q.linear)]
    mus = q.mu
    keep = np.ones(mus.size, dtype=bool)
    capped = 0.0
    if cap is not None:
        keep &= np.abs(mus) <= cap
    c = np.full(mus.size, np.nan, dtype=complex)
    if keep.any():
        cv, _ = dilation_correlation(phi, g, mus[keep])
        c[keep] = cv
    valid = np.isfinite(c)
    wmax = np.max(np.abs(np.array(q.weights)), axis=0) if q.weights else np.zeros(mus.size)
    if cap is not None:
        capped = float(wmax[np.abs(mus) > cap].sum()) + q.tail
    dropped_mask = keep & ~valid
    edge = 0.0
    if dropped_mask.any():
        # largest resolved |c| near each edge of the resolvable range
        for side in (mus > 0, mus < 0):
            sel = side & valid
            if sel.any() and (side & dropped_mask).any():
                m_edge = np.abs(mus[sel]).max()
                near = sel & (np.abs(mus) >= 0.8 * m_edge)
                edge = max(edge, float(np.abs(c[near]).max()) / scale_c)
            elif (side & dropped_mask).any():
                edge = np.inf
        if edge > corr_tol:
            raise QuadratureError(
                f"dilation correlation still {edge:.2e} at the edge of the resolvable range; "
                f"the state is not localized enough for scale {scale:.3g}")
    dropped_w = float(wmax[dropped_mask].sum())
    cz = np.where(valid, c, 0.0)
    for i, w in enumerate(q.weights):
        res[i] = res[i] + np.sum(w * cz)
    q.capped_weight = capped
    q.unresolved_weight = dropped_w
    if return_info:
        return res, ExpectationInfo(q, edge, dropped_w)
    return res


def a_spectral_density(g, mu_max=None, n_mu=None, corr_tol=1e-9):
    """Density rho(a) of the A-spectral measure of g from its dilation correlation.

    Returns (a grid, rho) with sum(rho) * da = ||g||^2 up to truncation.
    """
    g = g.position()
    a_bound = _a_bound([g])
    dmu = np.pi / (1.2 * a_bound)
    lo, hi = Dilator(g).lo, Dilator(g).hi
    lim = 2 * min(-lo, hi)
    if mu_max is None:
        mu_max = lim
    mu_max = min(mu_max, lim)
    m = int(np.ceil(mu_max / dmu)) if n_mu is None else int(n_mu)
    mus = dmu * np.arange(-m, m + 1)
    c, valid = dilation_correlation(g, g, mus)
    nrm2 = arr_norm(g.grid, g.values) ** 2
    edge = float(np.abs(c[valid][[0, -1]]).max() / nrm2)
    if edge > corr_tol:
        raise QuadratureError(f"dilation correlation {edge:.2e} has not decayed at |mu|={mu_max:.3g}")
    c = np.where(valid, c, 0.0)
    na = 8 * (2 * m + 1)
    a = np.linspace(-np.pi / dmu, np.pi / dmu, na, endpoint=False)
    rho = (dmu / (2 * np.pi)) * np.real(np.exp(-1j * np.outer(a, mus)) @ c)
    return a, rho


def bracket_A_half_norm_sq(g, corr_tol=1e-9):
    """||<A>^{1/2} g||^2 = int sqrt(1 + a^2) d rho(a)."""
    if g.grid.dim == 1:
        mt = mellin_transform(g)
        return float(np.sum(np.sqrt(1.0 + mt.a ** 2) * mt.density()) * mt.da)
    a, rho = a_spectral_density(g, corr_tol=corr_tol)
    da = a[1] - a[0]
    return float(np.sum(np.sqrt(1.0 + a ** 2) * rho) * da)


# ============================================================ spectral representation of A


@dataclass
class MellinTransform:
    a: np.ndarray
    values: np.ndarray = field(repr=False)
    da: float
    edge: float = 0.0
    a_max: float = 0.0

    def density(self):
        return np.sum(np.abs(self.values) ** 2, axis=0)


def mellin_transform(g, a_max=None, depth=None, edge_target=1e-12, max_doublings=3):
    """A-spectral representation of a state on a 1D or radial grid.

    Without ``a_max`` a bound is estimated from the phase-space extent and
    doubled until the edge mass drops below ``edge_target``.  See
    ``_mellin_fixed``.
    """
    if a_max is not None:
        return _mellin_fixed(g, a_max, depth)
    a_max = 1.5 * (support_radius(g, 1e-12) * bandwidth(g, 1e-12) + 1.0) + 8.0
    m = _mellin_fixed(g, a_max, depth)
    for _ in range(max_doublings):
        if m.edge < edge_target:
            break
        a_max *= 2
        m = _mellin_fixed(g, a_max, depth)
    return m


def _mellin_fixed(g, a_max, depth=None):
    """A-spectral representation of a state on a 1D or radial grid.

    On each half line A = -i(x d/dx + 1/2) is diagonalised by
    g~(a) = (2pi)^{-1/2} int_0^inf g(+-x) x^{-1/2-ia} dx, computed as a
    Fourier transform in y = ln x of e^{y/2} g(e^y), sampled from the
    band-limited interpolant.  Then <phi, G(A) g> = int G(a) conj(phi~) g~ da
    summed over both halves.  The samples are tapered to zero on the outer
    tenth of the box, where states are negligible by the no-wrap budget, so
    that the cut at x = L does not leak into large |a|.  ``edge`` is the
    relative mass in |a| > 0.8 a_max, which bounds the aliasing error.
    """
    grid = g.grid
    if grid.dim != 1:
        raise ValueError("the Mellin representation is implemented for 1D and radial grids")
    pos = g.position().values.astype(np.complex128)
    if depth is None:
        # radial states vanish like x at the origin, 1D states only like x^{1/2} after weighting
        depth = 40.0 if grid.radial else 80.0
    dy = np.pi / a_max
    M = int(2 ** np.ceil(np.log2(max(depth / dy, 256))))
    y = np.log(grid.L) - dy * np.arange(M)[::-1]
    x = np.exp(y)
    n, L = grid.n, grid.L
    c = _interp_coefficients(grid, pos)
    km = np.pi * np.arange(-n // 2, n // 2 + 1) / L
    taper = 1.0 - smooth01((x - 0.9 * L) / (0.1 * L))
    halves = [taper * kernels.trig_eval(c, km, x + L), taper * kernels.trig_eval(c, km, L - x)]
    ms = np.fft.fftfreq(M) * M
    a = 2 * np.pi * ms / (M * dy)
    out = []
    for h in halves:
        v = np.exp(0.5 * y) * h
        out.append(dy / np.sqrt(2 * np.pi) * np.exp(-1j * a * y[0]) * np.fft.fft(v))
    order = np.argsort(a)
    vals = np.array(out)[:, order]
    dens = np.sum(np.abs(vals) ** 2, axis=0)
    outer = np.abs(a[order]) > 0.8 * a_max
    edge = float(dens[outer].sum() / max(dens.sum(), 1e-300))
    return MellinTransform(a[order], vals, 2 * np.pi / (M * dy), edge, float(a_max))


def _interp_coefficients(grid, arr):
    n = grid.n
    c = np.fft.fftshift(np.fft.fft(arr)) / n
    c = np.concatenate([c, [0.5 * c[0]]])
    c[0] *= 0.5
    return c


def mellin_apply(g, profiles, scale, edge_tol=1e-10):
    """Vectors G(A/s) g on a 1D or radial grid by inverse Mellin transform.

    The node x = 0 gets 0 on radial grids and the mean of its neighbours
    otherwise.
    """
    grid = g.grid
    m = mellin_transform(g)
    if m.edge > edge_tol:
        raise QuadratureError(f"Mellin transform not resolved: mass {m.edge:.2e} near |a| = a_max")
    x = grid.x
    n = grid.n
    pos = np.arange(n // 2 + 1, n)
    lx = np.log(x[pos])
    outs = []
    for p in profiles:
        gw = as_profile(p)(m.a / scale)
        arr = np.zeros(n, dtype=np.complex128)
        for half, sign in ((0, 1), (1, -1)):
            w = gw * m.values[half] * m.da / np.sqrt(2 * np.pi)
            vals = np.empty(lx.size, dtype=np.complex128)
            for s0 in range(0, lx.size, 256):
                ph = np.exp(1j * np.outer(lx[s0:s0 + 256], m.a))
                vals[s0:s0 + 256] = (ph @ w) * np.exp(-0.5 * lx[s0:s0 + 256])
            idx = pos if sign > 0 else n - pos
            arr[idx] = vals
        # x = -L has no mirror image on the grid
        arr[0] = 0.0
        arr[n // 2] = 0.0 if grid.radial else 0.5 * (arr[n // 2 - 1] + arr[n // 2 + 1])
        outs.append(Field(grid, arr))
    return outs


def mellin_expectations(phi, g, profiles, scale, edge_tol=1e-10):
    """<phi, G(A/s) g> for several profiles from the Mellin representation."""
    mp = mellin_transform(phi)
    mg = mellin_transform(g, a_max=mp.a_max) if g is not phi else mp
    for m in (mp, mg):
        if m.edge > edge_tol:
            raise QuadratureError(f"Mellin transform not resolved: mass {m.edge:.2e} near |a| = a_max")
    if mg.a.size != mp.a.size:
        raise QuadratureError("Mellin grids of the two states differ")
    cross = np.sum(np.conj(mp.values) * mg.values, axis=0) * mp.da
    return [complex(np.sum(as_profile(p)(mp.a / scale) * cross)) for p in profiles]


def mellin_norms_sq(g, profiles, scale, edge_tol=1e-10):
    """||G(A/s) g||^2 = int |G(a/s)|^2 d rho_g(a) for several profiles."""
    m = mellin_transform(g)
    if m.edge > edge_tol:
        raise QuadratureError(f"Mellin transform not resolved: mass {m.edge:.2e} near |a| = a_max")
    rho = m.density() * m.da
    return [float(np.sum(np.abs(as_profile(p)(m.a / scale)) ** 2 * rho)) for p in profiles]


# ============================================================ spectral windows


def smooth01(u, order=6):
    return special.betainc(order + 1, order + 1, np.clip(u, 0.0, 1.0))


@dataclass(frozen=True)
class ShellWindow:
    """Smoothed indicator of [lo, hi] with transitions [e(1-theta), e(1+theta)].

    sin/cos construction: windows sharing an edge satisfy W1^2 + W2^2 = 1
    across the shared transition.  lo = None means no lower edge, hi = None
    no upper edge.
    """
    lo: object
    hi: object
    theta: float = 0.25
    order: int = 6

    def __post_init__(self):
        if not (0 < self.theta <= 0.25):
            raise ValueError("smoothing fraction theta must lie in (0, 1/4]")

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.ones_like(lam)
        if self.lo is not None:
            e = self.lo
            out = out * np.sin(0.5 * np.pi * smooth01((lam - e * (1 - self.theta)) / (2 * self.theta * e), self.order))
        if self.hi is not None:
            e = self.hi
            out = out * np.cos(0.5 * np.pi * smooth01((lam - e * (1 - self.theta)) / (2 * self.theta * e), self.order))
        return out

    @property
    def key(self):
        return (self.lo, self.hi, self.theta, self.order)

    @property
    def min_transition(self):
        edges = [e for e in (self.lo, self.hi) if e is not None]
        return 2 * self.theta * min(edges) if edges else np.inf


@dataclass(frozen=True)
class DyadicWindow:
    n: int
    theta: float = 0.25
    order: int = 6
    tol: float = 1e-6
    max_degree: int = MAX_DEGREE

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("shell index must be >= 0")
        if not (0 < self.theta <= 0.25):
            raise ValueError("smoothing fraction theta must lie in (0, 1/4]")

    @property
    def interval(self):
        return (2.0 ** (-self.n - 1), 2.0 ** (-self.n))

    @property
    def shell(self):
        lo, hi = self.interval
        return ShellWindow(lo, hi, self.theta, self.order)

    def __call__(self, lam):
        return self.shell(lam)


def high_tail(theta=0.25, order=6):
    return ShellWindow(1.0, None, theta, order)


def low_tail(n_max, theta=0.25, order=6):
    return ShellWindow(None, 2.0 ** (-n_max - 1), theta, order)


def partition_windows(n_max, theta=0.25, order=6):
    """Shell windows 0..n_max plus the two tails; their squares sum to one."""
    shells = [ShellWindow(2.0 ** (-n - 1), 2.0 ** (-n), theta, order) for n in range(n_max + 1)]
    return shells, high_tail(theta, order), low_tail(n_max, theta, order)


@lru_cache(maxsize=256)
def _cheb_coeffs(key, a, b, tol, max_degree):
    win = ShellWindow(*key)
    c_mid, e_half = 0.5 * (a + b), 0.5 * (b - a)
    width = win.min_transition / e_half
    m = 256
    while m < 4 / max(width, 1e-12):
        m *= 2
    while True:
        j = np.arange(m)
        xs = np.cos(np.pi * (j + 0.5) / m)
        vals = win(c_mid + e_half * xs)
        coef = sfft.dct(vals, type=2) / m
        coef[0] *= 0.5
        tail = np.cumsum(np.abs(coef[::-1]))[::-1]
        ok = np.nonzero(tail < 0.25 * tol)[0]
        if ok.size and ok[0] < m // 2:
            deg = int(ok[0])
            if deg > max_degree:
                break
            return coef[:deg + 1].copy()
        if m >= 4 * max_degree:
            break
        m *= 2
    raise FilterDegreeError(
        f"Chebyshev degree for window {key} exceeds the cap {max_degree}: the transition width "
        f"shrinks like 2^-n while the spectral interval [{a:.3g}, {b:.3g}] is fixed, so the "
        f"degree grows like 2^n (lambda_max - lambda_min) / theta")


def chebyshev_coefficients(window, bounds, tol=1e-6, max_degree=MAX_DEGREE):
    if isinstance(window, DyadicWindow):
        tol, max_degree, window = window.tol, window.max_degree, window.shell
    return _cheb_coeffs(window.key, float(bounds[0]), float(bounds[1]), float(tol), int(max_degree))


def _momentum_windows(f, windows):
    g = f.grid
    fh = np.fft.fftn(f.position().values)
    return [Field(g, np.fft.ifftn(w(g.kmag) * fh)) for w in windows]


def spectral_windows(f, H, windows, tol=1e-6, max_degree=MAX_DEGREE, method="auto", power=1):
    """W(H)^power f for several windows sharing one Chebyshev recurrence.

    With V = 0 (method "auto") the windows are applied as exact momentum
    multipliers.
    """
    wins = [w.shell if isinstance(w, DyadicWindow) else w for w in windows]
    if isinstance(windows[0], DyadicWindow):
        tol = windows[0].tol
        max_degree = windows[0].max_degree
    if method == "momentum" or (method == "auto" and H.is_free):
        if power == 1:
            return _momentum_windows(f, wins)
        return _momentum_windows(f, [_powered(w, power) for w in wins])
    a, b = H.spectral_bounds
    if power == 1:
        coefs = [chebyshev_coefficients(w, (a, b), tol, max_degree) for w in wins]
    else:
        coefs = [_cheb_coeffs_func(_powered(w, power), a, b, tol, max_degree) for w in wins]
    return _cheb_apply(f, H, coefs)


def _powered(w, power):
    class _Pw:
        def __call__(self, lam):
            return w(lam) ** power
        min_transition = w.min_transition
    return _Pw()


def _cheb_coeffs_func(func, a, b, tol, max_degree):
    c_mid, e_half = 0.5 * (a + b), 0.5 * (b - a)
    m = 256
    while m < 4 / max(func.min_transition / e_half, 1e-12):
        m *= 2
    while m <= 4 * max_degree:
        j = np.arange(m)
        xs = np.cos(np.pi * (j + 0.5) / m)
        coef = sfft.dct(func(c_mid + e_half * xs), type=2) / m
        coef[0] *= 0.5
        tail = np.cumsum(np.abs(coef[::-1]))[::-1]
        ok = np.nonzero(tail < 0.25 * tol)[0]
        if ok.size and ok[0] < m // 2 and ok[0] <= max_degree:
            return coef[:ok[0] + 1].copy()
        m *= 2
    raise FilterDegreeError(f"Chebyshev degree exceeds the cap {max_degree}")


def _cheb_apply(f, H, coefs):
    g = f.grid
    a, b = H.spectral_bounds
    c_mid, e_half = 0.5 * (a + b), 0.5 * (b - a)
    deg = max(len(c) for c in coefs)
    C = np.zeros((len(coefs), deg + 1))
    for i, c in enumerate(coefs):
        C[i, :len(c)] = c
    shape = g.shape
    x0 = f.position().values.reshape(-1).astype(np.complex128)
    odd = bool(g.radial)
    accs = np.zeros((len(coefs), x0.size), dtype=np.complex128)
    accs += C[:, :1] * x0
    if deg == 0:
        return [Field(g, acc.reshape(shape)) for acc in accs]
    prev = x0.copy()
    cur = (H.apply(x0.reshape(shape)).reshape(-1) - c_mid * x0) / e_half
    if odd:
        kernels.odd_project(cur)
    accs += C[:, 1:2] * cur
    alpha, beta = 2.0 / e_half, c_mid
    for k in range(2, deg + 1):
        hv = H.apply(cur.reshape(shape)).reshape(-1)
        nxt = kernels.cheb_step(hv, cur, prev, alpha, beta, C[:, k].copy(), accs, odd)
        prev, cur = cur, nxt
    return [Field(g, acc.reshape(shape)) for acc in accs]


def spectral_window(f, H, w, method="auto"):
    """Smoothed energy window W(H) f (DyadicWindow or ShellWindow)."""
    out = spectral_windows(f, H, [w], method=method)[0]
    return out if f.rep == "position" else out.momentum()


def momentum_window(f, w):
    out = _momentum_windows(f, [w.shell if isinstance(w, DyadicWindow) else w])[0]
    return out if f.rep == "position" else out.momentum()


# ============================================================ fractional powers


def _resolvent_solver(H, tau2, sp, rtol):
    g = H.grid
    shape = g.shape
    phis = [phi.values for _, phi in H.bound_states]
    kmag = H.kmag

    def pc(u):
        for phi in phis:
            u = u - phi * arr_inner(g, phi, u)
        return u

    def mv(v):
        u = sp.embed(np.asarray(v, dtype=np.complex128).reshape(-1))
        u = u.reshape(shape)
        w = pc(u)
        out = pc(tau2 * w + H.apply(w)) + (u - w)
        return sp.restrict(out)

    den = tau2 + kmag
    # the zero mode lies outside the subspace on radial grids
    pre_sym = np.where(den > 0, 1.0 / np.where(den > 0, den, 1.0), 0.0)

    def pre(v):
        u = sp.embed(np.asarray(v, dtype=np.complex128).reshape(-1)).reshape(shape)
        return sp.restrict(np.fft.ifftn(pre_sym * np.fft.fftn(u)))

    n = sp.size
    A = LinearOperator((n, n), matvec=mv, dtype=np.complex128)
    M = LinearOperator((n, n), matvec=pre, dtype=np.complex128)

    def solve(rhs):
        b = sp.restrict(rhs)
        bn = np.linalg.norm(b)
        if bn == 0:
            return np.zeros_like(rhs)
        x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=5000, M=M)
        if info != 0:
            raise SolverError(f"CG for the resolvent at tau^2={tau2:.3g} did not converge (info={info})")
        return sp.embed(x).reshape(shape)

    return solve


def _inv_sqrt(H, u, rtol=1e-12, dy=0.2, pad=25.0):
    g = H.grid
    sp = Subspace(g)
    e_min = H.resonance_margin
    if not np.isfinite(e_min):
        from .operators import continuum_margin
        e_min = continuum_margin(g, H.V, H.kmag, H.bound_states)
    if e_min < 0:
        raise PreconditionError(f"H is not non-negative on the continuous subspace (margin {e_min:.3g})")
    e_min = max(e_min, 1e-8)
    e_max = max(H.spectral_bounds[1], 2 * e_min)
    y = np.arange(0.5 * np.log(e_min) - pad, 0.5 * np.log(e_max) + pad + dy, dy)
    acc = np.zeros(g.shape, dtype=np.complex128)
    for yy in y:
        tau = np.exp(yy)
        x = _resolvent_solver(H, tau * tau, sp, rtol)(u)
        acc += tau * x
    return (2.0 / np.pi) * dy * acc


def fractional_power_H(f, H, alpha, rtol=1e-12):
    """H^alpha f for alpha in {-1/2, 1/2} on the continuous subspace.

    H^{-1/2} = (2/pi) int_0^inf (tau^2 + H)^{-1} d tau with tau = e^y and a
    trapezoid rule in y; H^{1/2} f = H^{-1/2} (H f).
    """
    if alpha not in (-0.5, 0.5):
        raise ValueError("alpha must be -1/2 or 1/2")
    g = f.grid
    u = project_continuous_arr(H, f.position().values.astype(np.complex128))
    if H.is_free:
        sym = np.zeros_like(H.kmag)
        nz = H.kmag > 0
        sym[nz] = H.kmag[nz] ** alpha
        fh = np.fft.fftn(u)
        if alpha < 0:
            k0 = (0,) * g.dim
            tot = np.vdot(fh, fh).real
            if tot > 0 and abs(fh[k0]) ** 2 / tot >= 1e-6:
                raise PreconditionError("H^{-1/2} applied to a field with zero-mode mass")
        out = np.fft.ifftn(sym * fh)
    else:
        rhs = u if alpha < 0 else project_continuous_arr(H, H.apply(u))
        out = project_continuous_arr(H, _inv_sqrt(H, rhs, rtol=rtol))
    res = Field(g, out)
    return res if f.rep == "position" else res.momentum()


def apply_H_inverse(f, H, rtol=1e-12):
    """H^{-1} P_c f by CG (tau = 0 resolvent)."""
    g = H.grid
    u = project_continuous_arr(H, f.position().values.astype(np.complex128))
    if H.is_free:
        sym = np.where(H.kmag > 0, 1.0 / np.where(H.kmag > 0, H.kmag, 1.0), 0.0)
        return Field(g, np.fft.ifftn(sym * np.fft.fftn(u)))
    if H.resonance_margin < 0:
        raise PreconditionError("H is not non-negative on the continuous subspace")
    x = _resolvent_solver(H, 0.0, Subspace(g), rtol)(u)
    return Field(g, project_continuous_arr(H, x))


# ============================================================ commutator remainder


def _kappa_over_lam(s):
    def k(lam):
        x = lam / s
        small = np.abs(x) < 1e-3
        out = np.empty_like(x)
        xs = x[small]
        out[small] = (xs ** 2 / 8 + xs ** 3 / 48 + xs ** 4 / 384) / lam[small]
        xb = x[~small]
        out[~small] = np.expm1(0.5 * xb) - 0.5 * xb
        out[~small] /= lam[~small]
        return out
    return k


def commutator_remainder_R2(f, H, F, R, t, n, tol=1e-8, cap=None, range_tol=None, return_info=False):
    """Second-order remainder of i[|p|^{1/2}, F(A/s)], s = R t 2^{-n}.

    R2 f = (1/2pi) int Fhat'(l) kappa(l/s)/l e^{i l A/s} |p|^{1/2} f dl with
    kappa(x) = e^{x/2} - 1 - x/2, so that
    i[|p|^{1/2}, F(A/s)] f = (1/2s) F'(A/s) |p|^{1/2} f + R2 f.
    """
    if H is not None and H.grid != f.grid:
        raise ValueError("field and Hamiltonian live on different grids")
    g = f.grid
    s = R * t * 2.0 ** (-n)
    B = np.fft.ifftn(np.sqrt(g.kmag) * np.fft.fftn(f.position().values))
    Bf = Field(g, B)
    if not np.any(B):
        out = Field(g, np.zeros(g.shape, dtype=np.complex128))
        return (out, None) if return_info else out
    if range_tol is None:
        range_tol = max(10 * tol, 1e-6)
    q = build_quadrature([F], s, _a_bound([Bf]), tol, kernel=_kappa_over_lam(s))
    dil = Dilator(Bf)
    acc = np.zeros(g.shape, dtype=np.complex128)
    unresolved = capped = 0.0
    w = q.weights[0]
    for idx, mu in enumerate(q.mu):
        if cap is not None and abs(mu) > cap:
            capped += abs(w[idx])
            continue
        if not dil.valid(mu):
            unresolved += abs(w[idx])
            continue
        acc += w[idx] * dil(mu)
    q.unresolved_weight, q.capped_weight = unresolved, capped
    if unresolved * arr_norm(g, B) > range_tol * max(arr_norm(g, B), 1e-300):
        raise QuadratureError(f"remainder quadrature: unresolved dilation weight {unresolved:.2e}")
    out = Field(g, acc)
    if return_info:
        return out, q
    return out


# ============================================================ Heisenberg check


def heisenberg_check(times, states, observable, H=None):
    """max_t |d/dt <psi, Phi psi> - <psi, (i[H, Phi] + dPhi/dt) psi>| / scale.

    ``observable(t, psi)`` returns the pair (<psi, Phi psi>,
    <psi, (i[H, Phi] + dPhi/dt) psi>).  The time derivative is a centered
    difference over neighbouring samples.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError("need at least 3 time samples")
    vals, heis = [], []
    for t, psi in zip(times, states):
        v, hv = observable(t, psi)
        vals.append(v)
        heis.append(hv)
    vals = np.real_if_close(np.asarray(vals))
    heis = np.real_if_close(np.asarray(heis))
    deriv = (vals[2:] - vals[:-2]) / (times[2:] - times[:-2])
    resid = np.abs(deriv - heis[1:-1])
    scale = max(np.abs(vals).max(), 1e-300)
    return float(resid.max() / scale)


def identity_observable(H):
    def obs(t, psi):
        v = psi.position().values
        return arr_inner(psi.grid, v, v).real, 0.0
    return obs


def position_cone_observable(H, step):
    """Phi = step(|x|/t)."""
    g = H.grid

    def obs(t, psi):
        v = psi.position().values
        w = step(g.r / t)
        val = arr_inner(g, v, w * v).real
        comm = -2.0 * arr_inner(g, H.apply(v), w * v).imag
        dphi = step.deriv(g.r / t) * (-g.r / t ** 2)
        return val, comm + arr_inner(g, v, dphi * v).real
    return obs


def shell_observable(H, window, step, R, n, tol=1e-9):
    """Phi_n = W(H) F(A/(R t 2^-n)) W(H) for a smoothed energy window W."""
    from .profiles import Profile

    def weighted(a):
        return a * step.deriv(a)

    def weighted_d(a):
        return step.deriv(a) + a * step.deriv(a, 2)

    aF = Profile(weighted, weighted_d, step.lo, step.hi, 0.0, 0.0, name="aF'")

    def obs(t, psi):
        gv = spectral_window(psi.position(), H, window)
        s = R * t * 2.0 ** (-n)
        Hg = Field(H.grid, H.apply(gv.values))
        v, w = expect_functions_of_A(gv, gv, [step, aF], s, tol=tol)
        c = expect_functions_of_A(Hg, gv, [step], s, tol=tol)[0]
        return v.real, -2.0 * c.imag - w.real / t
    return obs
