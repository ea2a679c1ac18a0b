"""Upper bound for log|s_V(r e^{i theta})| as a sum over angular modes.

For each degree l >= 1 with order nu = l + d/2 - 1,

    I_l(lam, s, s')  = int_s^s' |lam|^{2-d} |J_nu(lam t)|^2 t dt
    mu*_l(lam)       = (2 pi)^d I_l(lam, R1, R2)^{1/2} I_l(lam, R2, R3)^{1/2}

and the bound is  sum_l dim H_l log(1 + A r^{d+4} mu*_l(r e^{i theta}))  with
radii R_j = 1 + j/r.  Everything is carried in log space since |J_nu(lam t)|
grows like e^{2 Im(lam) t}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import geometry as geo
from .counting import dim_harmonics, h_d
from .errors import DomainError, QuadratureError
from .modes import ModeIndex, order_only
from .special import log_abs_j_nu_z

TAIL_TOL = 1e-12
CLASSES = ("N", "N1", "N2", "N3")


@dataclass(frozen=True)
class BoundConfig:
    r: float
    theta: float
    d: int = 3
    a: float = 1.0
    A_plumb: float = 1.0
    M: float = 2.0
    quad_tol: float = 1e-8

    def __post_init__(self):
        if self.r <= 0:
            raise DomainError("r must be positive")
        if not 0 <= self.theta <= np.pi / 2:
            raise DomainError("theta must lie in [0, pi/2]")
        if self.d < 3 or self.d % 2 == 0:
            raise DomainError("d must be odd and >= 3")
        if self.A_plumb <= 0:
            raise DomainError("A_plumb must be positive")
        if not self.a < self.radii[0]:
            raise DomainError("need a < R_1")

    @property
    def radii(self):
        return tuple(1.0 + j / self.r for j in (1, 2, 3))

    @property
    def lam(self) -> complex:
        return self.r * np.exp(1j * self.theta)


# --- I_l and mu* --------------------------------------------------------------

def _log_integrand(lam: complex, t, nu: float, d: int):
    return (2 - d) * np.log(abs(lam)) + 2 * log_abs_j_nu_z(nu, lam * t / nu) + np.log(t)


def log_i_l(lam: complex, s: float, s2: float, mode, d: int = None, tol: float = 1e-8,
            n0: int = 8, max_nodes: int = 1024) -> float:
    """log I_l(lam, s, s2) by Gauss-Legendre with node doubling; -inf for s == s2."""
    nu = order_only(mode)
    if d is None:
        d = mode.d if isinstance(mode, ModeIndex) else 3
    lam = complex(lam)
    if not 0 < s <= s2:
        raise DomainError("need 0 < s <= s'")
    if lam.real < 0 or lam.imag < 0 or lam == 0:
        raise DomainError("lambda must lie in the closed first quadrant without 0")
    if s == s2:
        return -np.inf
    half, mid = (s2 - s) / 2, (s2 + s) / 2
    prev = None
    n = n0
    while n <= max_nodes:
        x, w = np.polynomial.legendre.leggauss(n)
        t = mid + half * x
        val = float(logsumexp(_log_integrand(lam, t, nu, d) + np.log(w))) + np.log(half)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise QuadratureError(f"I_l quadrature did not settle for nu={nu}, lambda={lam}")


def i_l(lam: complex, s: float, s2: float, mode, d: int = None, tol: float = 1e-8) -> float:
    """I_l(lam, s, s2); may overflow to inf where log_i_l does not."""
    with np.errstate(over="ignore"):
        return float(np.exp(log_i_l(lam, s, s2, mode, d, tol)))


def log_mu_star(lam: complex, mode, cfg: BoundConfig) -> float:
    R1, R2, R3 = cfg.radii
    lam = complex(lam) / cfg.a
    return (cfg.d * np.log(2 * np.pi)
            + 0.5 * log_i_l(lam, R1, R2, mode, cfg.d, cfg.quad_tol)
            + 0.5 * log_i_l(lam, R2, R3, mode, cfg.d, cfg.quad_tol))


def mu_star(lam: complex, mode, cfg: BoundConfig) -> float:
    with np.errstate(over="ignore"):
        return float(np.exp(log_mu_star(lam, mode, cfg)))


# --- index classes ---------------------------------------------------------------

def classify_mode(nu: float, cfg: BoundConfig) -> str:
    """Which of N, N1, N2, N3 the order nu falls in for the point r e^{i theta}."""
    R1, _, R3 = cfg.radii
    w = cfg.lam / nu
    # closest t in [R1, R3] to the turning point t w = 1
    t = np.clip(w.real / abs(w) ** 2, R1, R3)
    if nu ** (2.0 / 3.0) * abs(1 - t * w) < cfg.M:
        return "N"
    p = w * R3
    if not geo.in_kplus(p):
        return "N1"
    if abs(p) <= 0.01:
        return "N2"
    return "N3"


# --- the sum ---------------------------------------------------------------------

@dataclass
class StefanovSum:
    total: float
    parts: dict
    l_last: int
    tail_bound: float
    terms: np.ndarray = field(repr=False, default=None)


def stefanov_terms(cfg: BoundConfig, l_max: int = None) -> StefanovSum:
    """Per-mode terms dim H_l log(1 + A r^{d+4} mu*_l) for l = 1..l_max.

    Past the turning point the terms decay monotonically; once one drops
    below TAIL_TOL the remainder is bounded by a geometric tail and skipped.
    """
    if l_max is None:
        l_max = int(np.ceil(4 * cfg.r))
    if l_max < 4 * cfg.r:
        raise DomainError("l_max must be at least 4 r")
    d = cfg.d
    log_pref = np.log(cfg.A_plumb) + (d + 4) * np.log(cfg.r)
    lam = cfg.lam
    R3 = cfg.radii[2]
    parts = dict.fromkeys(CLASSES, 0.0)
    terms = []
    tail = 0.0
    l_last = l_max
    for l in range(1, l_max + 1):
        nu = l + d / 2 - 1
        x = log_pref + log_mu_star(lam, nu, cfg)
        term = dim_harmonics(l, d) * float(np.logaddexp(0.0, x))
        terms.append(term)
        parts[classify_mode(nu, cfg)] += term
        if term < TAIL_TOL and nu > abs(lam) * R3 and len(terms) > 1 and terms[-2] > 0:
            ratio = term / terms[-2]
            if ratio < 1:
                l_last = l
                # dim H_l grows polynomially; the decay is super-geometric here
                tail = term * ratio / (1 - ratio) * ((l + 1) / l) ** (d - 2)
                break
    terms = np.array(terms)
    return StefanovSum(float(sum(parts[c] for c in CLASSES)), parts, l_last, float(tail), terms)


def stefanov_sum(cfg: BoundConfig, l_max: int = None) -> float:
    return stefanov_terms(cfg, l_max).total


# --- report -----------------------------------------------------------------------

@dataclass
class BoundReport:
    """Rows (r, theta, sum, hd_term, correction_fit).

    ``correction_fit`` is (sum - h_d(theta) r^d) / (r^{d-1} log r).
    """

    r: np.ndarray
    theta: np.ndarray
    sum: np.ndarray
    hd_term: np.ndarray
    correction_fit: np.ndarray
    d: int = 3

    def columns(self):
        return {"r": self.r, "theta": self.theta, "sum": self.sum,
                "hd_term": self.hd_term, "correction_fit": self.correction_fit}

    def sup_over_theta(self):
        """Per-r maximum of the normalized correction."""
        rs = np.unique(self.r)
        return rs, np.array([self.correction_fit[self.r == x].max() for x in rs])

    def theta_average(self):
        """(1/pi) int_0^{pi/2} sum/r^d d theta per r (trapezoid on the theta grid)."""
        rs = np.unique(self.r)
        out = []
        for x in rs:
            m = self.r == x
            th, val = self.theta[m], self.sum[m] / x ** self.d
            order = np.argsort(th)
            out.append(np.trapezoid(val[order], th[order]) / np.pi)
        return rs, np.array(out)


def bound_report(r_grid, theta_grid, d: int = 3, A_plumb: float = 1.0, quad_tol: float = 1e-8,
                 M: float = 2.0) -> BoundReport:
    rows = []
    hd = {th: h_d(th, d) for th in theta_grid}
    for r in r_grid:
        for th in theta_grid:
            cfg = BoundConfig(r=float(r), theta=float(th), d=d, A_plumb=A_plumb, M=M, quad_tol=quad_tol)
            s = stefanov_sum(cfg)
            lead = hd[th] * r ** d
            rows.append((r, th, s, lead, (s - lead) / (r ** (d - 1) * np.log(r))))
    a = np.array(rows, dtype=float)
    return BoundReport(a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4], d)
