"""Dimension counts, the constants c_d and h_d, Weyl sums and model resonance counts."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from . import geometry as geo
from .errors import DegenerateFitError, InsufficientDataError, QuadratureError
from .model import mode_cloud
from .modes import ModeIndex
from .zeros import zero_positions

MODEL_VERSION = "h_nu-1"
NOISE_FLOOR = 1.0


# --- elementary constants -----------------------------------------------------

def dim_harmonics(l: int, d: int) -> int:
    """Dimension of the degree-l harmonic homogeneous polynomials in d variables."""
    if l < 0 or d < 3 or d % 2 == 0:
        raise ValueError("need l >= 0 and odd d >= 3")
    return (2 * l + d - 2) * math.factorial(l + d - 3) // (math.factorial(l) * math.factorial(d - 2))


def vol_ball(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def weyl_coefficient(d: int) -> float:
    """vol(B)^2 / (2 pi)^d, the leading coefficient of the Dirichlet eigenvalue count."""
    return vol_ball(d) ** 2 / (2 * math.pi) ** d


# --- the arc integral and c_d ---------------------------------------------------

def _arc_integral_gl(d: int, n: int) -> float:
    # |dz| / |z|^{d+1} * |1-z^2|^{1/2} = dtau / |z|^d along rho = -i tau; the arc
    # is symmetric under z -> -conj(z), and tau = (pi/2) v^3 removes the
    # cube-root behaviour at z = 1
    v, w = np.polynomial.legendre.leggauss(n)
    v = (v + 1) / 2
    w = w / 2
    tau = (np.pi / 2) * v ** 3
    z = geo.rho_inverse(-1j * tau)
    jac = (3 * np.pi / 2) * v ** 2
    return float(2 * np.sum(w * jac / np.abs(z) ** d))


def arc_integral(d: int, quad_tol: float = 1e-10) -> float:
    """Integral of |1 - z^2|^{1/2} / |z|^{d+1} over the curved boundary of K_+."""
    n = 32
    prev = _arc_integral_gl(d, n)
    while n < 4096:
        n *= 2
        cur = _arc_integral_gl(d, n)
        if abs(cur - prev) <= 0.1 * quad_tol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(f"arc integral did not reach relative tolerance {quad_tol}")


def cd_boundary(d: int, quad_tol: float = 1e-10) -> float:
    return 2 * weyl_coefficient(d) + 2 / (math.pi * d * math.factorial(d - 2)) * arc_integral(d, quad_tol)


def _quad(fn, a, b, tol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=0.0, epsrel=tol, limit=400, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    return val, err


def kplus_exit_radius(theta: float) -> float:
    """Radius where the ray t e^{i theta} leaves K_+ (0 < theta < pi)."""
    g = lambda t: float(np.real(geo.rho(t * np.exp(1j * theta))))  # noqa: E731
    # K_+ contains the half-disc of radius 1/2 and lies in the unit disc
    return optimize.brentq(g, 0.5, 1.0 + 1e-12, xtol=1e-15, rtol=1e-15)


def h_d(theta: float, d: int, quad_tol: float = 1e-10) -> float:
    """(4/(d-2)!) times the integral over t > 0 of max(-Re rho(t e^{i theta}), 0) / t^{d+1}."""
    if not 0 <= theta <= np.pi:
        raise ValueError("theta must lie in [0, pi]")
    if theta == 0 or theta == np.pi:
        return 0.0
    if theta > np.pi / 2:
        theta = np.pi - theta
    t0 = kplus_exit_radius(theta)
    e = np.exp(1j * theta)

    # t = t0/u maps (t0, inf) onto (0, 1]; the integrand is smooth in u
    def integrand(u):
        if u == 0:
            return 0.0
        return -np.real(geo.rho(t0 * e / u)) * u ** (d - 1)

    val, _ = _quad(integrand, 0.0, 1.0, quad_tol)
    return 4 / math.factorial(d - 2) * val / t0 ** d


def cd_double(d: int, quad_tol: float = 1e-10) -> float:
    """c_d from the area integral, written as (d/pi) times the integral of h_d over [0, pi/2]."""
    inner = max(quad_tol * 1e-2, 1e-13)
    val, _ = _quad(lambda th: h_d(th, d, inner), 0.0, np.pi / 2, quad_tol)
    return d / math.pi * val


@dataclass(frozen=True)
class AgreementReport:
    boundary: float
    double: float
    rel_diff: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.rel_diff < 10 * self.tolerance


def c_d(d: int, quad_tol: float = 1e-7) -> AgreementReport:
    """Both forms of c_d; the boundary form is the reported value."""
    if d < 3 or d % 2 == 0:
        raise ValueError("d must be odd and >= 3")
    b = cd_boundary(d, min(quad_tol, 1e-10))
    a = cd_double(d, quad_tol * 1e-2)
    return AgreementReport(b, a, abs(a - b) / abs(b), quad_tol)


# --- tables -------------------------------------------------------------------

@dataclass
class CountingTable:
    """Rows (r, count, leading, residual) plus optional exact data.

    ``moduli``/``weights`` hold every counted point with its multiplicity
    so that log-integrated counts can be evaluated exactly; ``source`` is a
    callable count for synthetic tables.
    """

    r: np.ndarray
    count: np.ndarray
    leading: np.ndarray
    metadata: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    moduli: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    source: Optional[Callable] = None

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.count = np.asarray(self.count)
        self.leading = np.asarray(self.leading, dtype=float)
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("r must be strictly increasing")

    @property
    def residual(self):
        return self.count - self.leading

    def __len__(self):
        return len(self.r)

    def columns(self):
        cols = {"r": self.r, "count": self.count, "leading": self.leading, "residual": self.residual}
        cols.update(self.extra)
        return cols

    @classmethod
    def from_function(cls, fn: Callable, r, leading_coeff: float, d: int, **metadata):
        r = np.asarray(r, dtype=float)
        return cls(r, np.array([fn(x) for x in r], dtype=float), leading_coeff * r ** d,
                   metadata={"d": d, **metadata}, source=fn)


@dataclass(frozen=True)
class FitReport:
    amplitude: float
    exponent: float
    stderr: float
    r_min: float
    r_max: float
    n_rows: int = 0

    def as_dict(self):
        return {"amplitude": self.amplitude, "exponent": self.exponent, "stderr": self.stderr,
                "r_min": self.r_min, "r_max": self.r_max}


def fit_power(r, values, min_rows: int = 8, min_span: float = 10.0,
              floor: float = NOISE_FLOOR) -> FitReport:
    """Least-squares fit of log|values| against log r, dropping |values| < floor."""
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(r) == 0 or len(r) < min_rows:
        raise InsufficientDataError(f"need at least {min_rows} rows, got {len(r)}")
    if r[-1] / r[0] < min_span * (1 - 1e-12):
        raise InsufficientDataError(f"r range {r[0]}..{r[-1]} spans less than a factor {min_span}")
    keep = np.abs(values) >= floor
    if np.count_nonzero(keep) < 3:
        raise DegenerateFitError("residuals below the noise floor")
    x, y = np.log(r[keep]), np.log(np.abs(values[keep]))
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = len(x) - 2
    if dof > 0:
        s2 = np.sum((y - X @ coef) ** 2) / dof
        cov = s2 * np.linalg.inv(X.T @ X)
        se = float(np.sqrt(cov[1, 1]))
    else:
        se = 0.0
    return FitReport(float(np.exp(coef[0])), float(coef[1]), se, float(r[keep][0]),
                     float(r[keep][-1]), int(np.count_nonzero(keep)))


def fit_residual_exponent(table: CountingTable, min_rows: int = 8, min_span: float = 10.0) -> FitReport:
    return fit_power(table.r, table.residual, min_rows, min_span)


def leading_coefficient(table: CountingTable, d: int) -> float:
    """Intercept of count/r^d regressed on 1/r."""
    y = table.count / table.r ** d
    X = np.column_stack([np.ones_like(table.r), 1 / table.r])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[0])


# --- Weyl sums ------------------------------------------------------------------

def weyl_table(r_grid: Sequence[float], d: int, cache_dir=None) -> CountingTable:
    """sum over 0 <= l < r of m_plus(l, r) dim H_l for every r in the grid."""
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    r_max = r_grid[-1]
    counts = np.zeros(len(r_grid), dtype=np.int64)
    l = 0
    while l < r_max:
        nu = l + d / 2 - 1
        x = zero_positions(nu, r_max, cache_dir)
        m = np.searchsorted(x, r_grid, side="right")
        m = np.where(l < r_grid, m, 0)
        counts += m * dim_harmonics(l, d)
        if x.size == 0:
            break
        l += 1
    A = weyl_coefficient(d)
    return CountingTable(r_grid, counts, A * r_grid ** d, metadata={"d": d, "kind": "weyl"})


def weyl_sum(r: float, d: int, cache_dir=None) -> int:
    if r < 10:
        raise ValueError("weyl_sum expects r >= 10")
    return int(weyl_table([r], d, cache_dir).count[0])


# --- model counts ---------------------------------------------------------------

@dataclass
class ResonanceCloud:
    """Pole moduli up to r_max, split by the sign of the strip index."""

    d: int
    r_max: float
    sigma: complex
    c: float
    plus: list  # per-l arrays of |nu z| for k > 0
    minus: list  # per-l arrays for -nu/2 + 2 < k <= 0

    def counts(self, r_grid):
        r_grid = np.asarray(r_grid, dtype=float)
        if np.any(r_grid > self.r_max * (1 + 1e-12)):
            raise ValueError("grid exceeds the cloud radius")
        n_plus = np.zeros(len(r_grid), dtype=np.int64)
        n_minus = np.zeros(len(r_grid), dtype=np.int64)
        slack = np.zeros(len(r_grid), dtype=np.int64)
        for l, (p, m) in enumerate(zip(self.plus, self.minus)):
            dim = dim_harmonics(l, self.d)
            active = l < 2 * r_grid
            n_plus += np.where(active, np.searchsorted(np.sort(p), r_grid, side="right"), 0) * dim
            n_minus += np.where(active, np.searchsorted(np.sort(m), r_grid, side="right"), 0) * dim
            slack += np.where(l <= 2 * r_grid, 4 * dim, 0)
        return n_plus, n_minus, slack

    def moduli(self):
        """All poles (both symmetric copies) with multiplicities."""
        mods, wts = [], []
        for l, (p, m) in enumerate(zip(self.plus, self.minus)):
            both = np.concatenate([p, m])
            mods.append(both)
            wts.append(np.full(both.size, 2 * dim_harmonics(l, self.d)))
        mods, wts = np.concatenate(mods), np.concatenate(wts)
        order = np.argsort(mods, kind="stable")
        return mods[order], wts[order]


def _mode_cloud_job(args):
    d, l, r_max, sigma, c = args
    return mode_cloud(ModeIndex(d, l), r_max, sigma, c)


def resonance_cloud(r_max: float, d: int, sigma=1.0, c: float = 1.0, workers: int = 1) -> ResonanceCloud:
    """Solve every mode l <= 2 r_max; ``workers > 1`` spreads modes over processes."""
    jobs = [(d, l, r_max, sigma, c) for l in range(int(np.floor(2 * r_max)) + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mode_cloud_job, jobs, chunksize=8))
    else:
        results = [_mode_cloud_job(j) for j in jobs]
    plus = [p for p, _ in results]
    minus = [m for _, m in results]
    return ResonanceCloud(d, r_max, complex(sigma), c, plus, minus)


def model_table(r_grid, d: int, sigma=1.0, c: float = 1.0, cloud: Optional[ResonanceCloud] = None,
                quad_tol: float = 1e-10, workers: int = 1) -> CountingTable:
    """Counts sum (2 n_plus + 2 n_minus) dim H_l against c_d r^d over the grid."""
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    if cloud is None:
        cloud = resonance_cloud(r_grid[-1], d, sigma, c, workers)
    n_plus, n_minus, slack = cloud.counts(r_grid)
    cd = cd_boundary(d, quad_tol)
    mods, wts = cloud.moduli()
    return CountingTable(
        r_grid, 2 * n_plus + 2 * n_minus, cd * r_grid ** d,
        metadata={"d": d, "a": 1.0, "sigma": [complex(sigma).real, complex(sigma).imag], "c": c,
                  "model": MODEL_VERSION},
        extra={"n_plus": n_plus, "n_minus": n_minus, "uncertainty": slack},
        moduli=mods, weights=wts,
    )


def model_count(r: float, d: int, sigma=1.0, c: float = 1.0, r_min: float = 50.0) -> CountingTable:
    """Single-row table for radius r."""
    if r < r_min:
        raise ValueError(f"model_count expects r >= {r_min}")
    return model_table([r], d, sigma, c)


def minus_part_constant(d: int, quad_tol: float = 1e-10) -> float:
    """Leading coefficient predicted for sum n_minus dim H_l."""
    return arc_integral(d, quad_tol) / (math.pi * d * math.factorial(d - 2))


# --- log-integrated counts --------------------------------------------------------

def _N_exact(mods, wts, r):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(len(r))
    for i, x in enumerate(r):
        j = np.searchsorted(mods, x, side="right")
        pos = mods[:j] > 0
        out[i] = np.sum(wts[:j][pos] * np.log(x / mods[:j][pos]))
    return out


def _N_source(fn, r):
    n0 = fn(0.0)
    out = []
    for x in np.atleast_1d(r):
        val, _ = integrate.quad(lambda t: (fn(t) - n0) / t if t > 0 else 0.0, 0.0, x,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        out.append(val)
    return np.array(out)


def integrate_count(table: CountingTable) -> CountingTable:
    """N(r) = integral from 0 to r of (n(t) - n(0))/t.

    Exact sums over stored pole moduli when present, quadrature of the
    source function for synthetic tables, otherwise the trapezoid rule on
    the grid with the difference to the half-grid rule as error column.
    """
    d = table.metadata.get("d", 3)
    lead = table.leading / d
    meta = {**table.metadata, "kind": "integrated"}
    if table.moduli is not None:
        N = _N_exact(table.moduli, table.weights, table.r)
        return replace(table, count=N, leading=lead, metadata=meta, extra={})
    if table.source is not None:
        return replace(table, count=_N_source(table.source, table.r), leading=lead, metadata=meta, extra={})
    r = np.concatenate([[0.0], table.r])
    n = np.concatenate([[0.0], table.count.astype(float)])
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(r > 0, n / r, 0.0)
    N = np.concatenate([[0.0], integrate.cumulative_trapezoid(g, r)])[1:]
    coarse = np.interp(table.r, r[::2], np.concatenate([[0.0], integrate.cumulative_trapezoid(g[::2], r[::2])]))
    return replace(table, count=N, leading=lead, metadata=meta, extra={"error": np.abs(N - coarse)})


# --- exponent transfer ----------------------------------------------------------

def _N_evaluator(table: CountingTable, N_table: CountingTable):
    if table.moduli is not None:
        return lambda x: _N_exact(table.moduli, table.weights, x)
    if table.source is not None:
        return lambda x: _N_source(table.source, x)
    interp = PchipInterpolator(N_table.r, N_table.count, extrapolate=False)
    return lambda x: interp(np.asarray(x, dtype=float))


def smooth_exponent_transfer(table: CountingTable, delta: float, min_span: float = 10.0):
    """Fit the N-residual, then bound n through window averages of N.

    Returns (N-residual fit, n-bound fit).  With ``alpha = c r^{1 - delta/2}``
    and ``c = max |d N - A r^d| / r^{d - delta}``:

        (r - alpha) (N(r) - N(r - alpha)) / alpha <= n(r)
        n(r) <= (r + alpha) [(N(r + alpha) - N(r)) / alpha + n(0) / r]

    and the reported n-fit is that of the larger deviation of either bound
    from A r^d.  A fit with zero amplitude stands for residuals below the
    noise floor.
    """
    d = table.metadata.get("d", 3)
    if not 0 < delta < d:
        raise ValueError("need 0 < delta < d")
    if len(table) < 8 or table.r[-1] / table.r[0] < min_span * (1 - 1e-12):
        raise InsufficientDataError("transfer needs >= 8 rows spanning the requested range")
    N_table = integrate_count(table)
    r = table.r
    A = float(table.leading[-1] / r[-1] ** d)
    dev = d * N_table.count - A * r ** d
    try:
        N_fit = fit_power(r, N_table.count - A * r ** d / d, min_span=min_span)
    except DegenerateFitError:
        N_fit = FitReport(0.0, float("nan"), 0.0, float(r[0]), float(r[-1]), 0)
    c = float(np.max(np.abs(dev) / r ** (d - delta)))
    if c == 0 or np.all(np.abs(dev) < NOISE_FLOOR):
        return N_fit, FitReport(0.0, float("nan"), 0.0, float(r[0]), float(r[-1]), 0)
    alpha = c * r ** (1 - delta / 2)
    N = _N_evaluator(table, N_table)
    n0 = float(table.source(0.0)) if table.source is not None else 0.0
    Nr = N(r)
    upper = (r + alpha) * ((N(r + alpha) - Nr) / alpha + n0 / r)
    lower_r = np.maximum(r - alpha, 0.0)
    lower = (r - alpha) * (Nr - N(lower_r)) / alpha
    bound_dev = np.maximum(np.abs(upper - A * r ** d), np.abs(lower - A * r ** d))
    ok = np.isfinite(bound_dev)
    if np.count_nonzero(ok) < 3:
        raise InsufficientDataError("averaging windows run past the table; extend the r range")
    try:
        n_fit = fit_power(r[ok], bound_dev[ok], min_rows=min(8, int(ok.sum())), min_span=min_span)
    except (DegenerateFitError, InsufficientDataError):
        n_fit = FitReport(0.0, float("nan"), 0.0, float(r[0]), float(r[-1]), 0)
    return N_fit, n_fit
