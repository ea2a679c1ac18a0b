"""Conformal coordinates of the closed upper half-plane.

``rho`` maps the closed upper half-plane minus the origin bijectively onto
the closed region ``Omega`` (the left half-plane together with the half-strip
``-pi <= Im <= 0``).  Everything here works on scalars or numpy arrays and
keeps track of which side of each branch cut a boundary point is approached
from, so that boundary values are the limits taken from inside the
upper half-plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError

TWO_THIRDS = 2.0 / 3.0
CBRT2 = 2.0 ** (1.0 / 3.0)

# closed-region membership slack, ties count as inside
MEMBERSHIP_TOL = 1e-12


def _c(z):
    return np.asarray(z, dtype=complex)


def _unwrap(x, scalar):
    if scalar:
        return x.item() if isinstance(x, np.ndarray) else x
    return x


def _sqrt_up(w):
    """Square root with w treated as a limit from the closed upper half-plane."""
    return np.sqrt(w.real + 1j * np.abs(w.imag))


def _log_up(w):
    return np.log(np.abs(w)) + 1j * np.arctan2(np.abs(w.imag), w.real)


def _log_down(w):
    return np.log(np.abs(w)) - 1j * np.arctan2(np.abs(w.imag), w.real)


def _check_upper(z):
    if np.any(z.imag < 0):
        raise DomainError("rho is defined on the closed upper half-plane only")
    if np.any(z == 0):
        raise DomainError("rho is undefined at z = 0")


def sqrt_one_minus_z2(z):
    """Continuous branch of sqrt(1 - z^2) on the closed upper half-plane.

    Equal to the principal root inside C_+; on (1, inf) it is -i*sqrt(z^2-1)
    and on (-inf, -1) it is +i*sqrt(z^2-1).
    """
    z = _c(z)
    return np.conj(_sqrt_up(np.conj(1 - z))) * _sqrt_up(1 + z)


def log_one_minus_z2(z):
    """log(1 - z^2) continuous on the closed upper half-plane.

    The argument lies in [-pi, pi]; it equals -pi on (1, inf) and +pi on
    (-inf, -1).
    """
    z = _c(z)
    return _log_down(1 - z) + _log_up(1 + z)


def _atanh_minus_id(s):
    """atanh(s) - s by its Taylor series; for |s| < 1/2."""
    s2 = s * s
    term = s * s2
    out = term / 3.0
    for k in range(2, 60):
        term = term * s2
        out = out + term / (2 * k + 1)
    return out


def rho(z):
    """rho(z) = log((1 + sqrt(1 - z^2)) / z) - sqrt(1 - z^2)."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(_c(z))
    _check_upper(z)
    s = sqrt_one_minus_z2(z)
    out = np.log1p(s) - _log_up(z) - s
    # near z = 1 the three terms cancel to O(|1-z|^{3/2}); with z = sqrt(1-s^2)
    # the closed form collapses to atanh(s) - s
    near = (np.abs(s) < 0.5) & (z.real > 0)
    if np.any(near):
        out[near] = _atanh_minus_id(s[near])
    return _unwrap(out, scalar)


def drho_dz(z):
    """Derivative -sqrt(1 - z^2)/z."""
    z = _c(z)
    return -sqrt_one_minus_z2(z) / z


def _zeta_from_rho(w):
    """Invert (2/3) zeta^{3/2} = rho on the branch sending Omega-bar into C-bar_-."""
    w = _c(w)
    phi = np.angle(w)
    phi = np.where(phi > 0, phi - 2 * np.pi, phi)
    return (1.5 * np.abs(w)) ** TWO_THIRDS * np.exp(1j * TWO_THIRDS * phi)


def zeta(z):
    """Olver's zeta(z), with (2/3) zeta^{3/2} = rho(z) and zeta((0,1]) = R_+."""
    scalar = np.ndim(z) == 0
    out = _zeta_from_rho(rho(np.atleast_1d(_c(z))))
    return _unwrap(out, scalar)


def zeta_from_rho(w):
    scalar = np.ndim(w) == 0
    return _unwrap(_zeta_from_rho(np.atleast_1d(_c(w))), scalar)


def in_omega(w, tol: float = MEMBERSHIP_TOL):
    """Membership in the closed region Omega-bar."""
    w = _c(w)
    return (w.real <= tol) | ((w.imag <= tol) & (w.imag >= -np.pi - tol))


@dataclass(frozen=True)
class RhoPoint:
    """A point of Omega-bar, optionally with a known nearby preimage."""

    value: complex
    preimage_hint: Optional[complex] = None

    def __post_init__(self):
        if not bool(in_omega(self.value)):
            raise DomainError(f"{self.value} is not in the closed region Omega")


# --- inversion -------------------------------------------------------------

def _seed(w):
    """Initial guesses for targets with Im w >= -pi/2 (preimage in Re z >= 0)."""
    zt = _zeta_from_rho(w)
    near = 1 - zt / CBRT2 + 0.3 * zt ** 2 / CBRT2 ** 2 + zt ** 3 / 700.0
    small = 2.0 * np.exp(-w - 1.0)
    large = np.pi / 2 - 1j * w
    out = np.where(w.real > 0.5, small, large)
    return np.where(np.abs(zt) < 1.5, near, out)


def _newton(w, z0, max_iter):
    """Damped Newton on rho(z) = w, switching to zeta coordinates near z = 1."""
    zt = _zeta_from_rho(w)
    use_zeta = np.abs(zt) < 0.8
    scale = np.maximum(1.0, np.where(use_zeta, np.abs(zt), np.abs(w)))

    def residual(zz, m):
        r = rho(zz)
        return np.where(use_zeta[m], _zeta_from_rho(r) - zt[m], r - w[m])

    def derivative(zz, m):
        r = rho(zz)
        dr = drho_dz(zz)
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = dr * _zeta_from_rho(r) / (1.5 * r)
        dz = np.where(np.abs(r) < 1e-300, -CBRT2, dz)
        return np.where(use_zeta[m], dz, dr)

    def clip(zz):
        zz = np.maximum(zz.real, 0.0) + 1j * np.maximum(zz.imag, 0.0)
        return np.where(np.abs(zz) < 1e-300, 1e-300, zz)

    z = clip(z0.copy())
    allm = np.ones(w.shape, dtype=bool)
    res = residual(z, allm)
    done = np.abs(res) <= 1e-15 * scale
    for _ in range(max_iter):
        m = ~done
        if not np.any(m):
            break
        za, ra, sc = z[m], res[m], scale[m]
        step = -ra / derivative(za, m)
        lam = np.ones(za.shape)
        znew = clip(za + step)
        rnew = residual(znew, m)
        # halve the step while the residual grows
        for _h in range(30):
            bad = (np.abs(rnew) > np.abs(ra) * (1 - 1e-4 * lam)) & (np.abs(ra) > 1e-13 * sc)
            bad |= ~np.isfinite(rnew)
            if not np.any(bad):
                break
            lam = np.where(bad, lam / 2, lam)
            znew = np.where(bad, clip(za + lam * step), znew)
            rnew = np.where(bad, residual(znew, m), rnew)
        small_step = np.abs(znew - za) <= 4e-16 * np.abs(znew)
        z[m] = znew
        res[m] = rnew
        done[m] = (np.abs(rnew) <= 1e-15 * sc) | (small_step & (np.abs(rnew) <= 1e-11 * sc))
    return z, res, done


def _solve_first_quadrant(w, hint, max_iter):
    z = np.empty(w.shape, dtype=complex)
    pending = np.ones(w.shape, dtype=bool)
    exact_one = w == 0
    z[exact_one] = 1.0
    pending &= ~exact_one
    res = np.zeros(w.shape, dtype=complex)
    seeds = []
    if hint is not None:
        seeds.append(hint)
    seeds.append(_seed(w))
    seeds.append(np.pi / 2 - 1j * w)
    seeds.append(2.0 * np.exp(-w - 1.0))
    seeds.append(np.full(w.shape, 1.0 + 1.0j))
    for s in seeds:
        if not np.any(pending):
            break
        zz, rr, ok = _newton(w[pending], np.asarray(s, dtype=complex)[pending], max_iter)
        idx = np.flatnonzero(pending)
        z[idx] = zz
        res[idx] = rr
        pending[idx[ok]] = False
    return z, res, pending


def rho_inverse(w, hint=None, max_iter: int = 80):
    """The unique z in the closed upper half-plane with rho(z) = w.

    ``w`` may be a complex scalar, an array, or a RhoPoint (whose hint is
    then used as the first Newton seed).  Targets below the line
    ``Im w = -pi/2`` are handled through the reflection
    ``rho(-conj z) = conj(rho(z)) - i pi``.
    """
    if isinstance(w, RhoPoint):
        hint = w.preimage_hint if hint is None else hint
        w = w.value
    scalar = np.ndim(w) == 0
    w = np.atleast_1d(_c(w)).copy()
    if not np.all(in_omega(w)):
        raise DomainError("rho_inverse target outside Omega-bar")
    h = None if hint is None else np.broadcast_to(_c(hint), w.shape).copy()
    refl = w.imag < -np.pi / 2
    w[refl] = np.conj(w[refl]) - 1j * np.pi
    if h is not None:
        h[refl] = -np.conj(h[refl])
        h = np.where(h.real < 0, np.nan, h)
        h = np.where(np.isnan(h), _seed(w), h)
    # targets on the edge Im w = -pi/2 after reflection may come back with Re < 0
    z, res, failed = _solve_first_quadrant(w, h, max_iter)
    if np.any(failed):
        i = np.flatnonzero(failed)[0]
        raise ConvergenceError(
            f"rho_inverse did not converge for target {w[i]}", last=z[i], residual=abs(res[i])
        )
    z[refl] = -np.conj(z[refl])
    return _unwrap(z, scalar)


# --- f = 1 - z^2 as a function of rho ---------------------------------------

def f_of_rho(w, hint=None):
    """f(rho(z)) = 1 - z^2."""
    z = rho_inverse(w, hint=hint)
    return 1 - np.asarray(z) ** 2 if np.ndim(z) else 1 - z * z


def log_f_of_z(z):
    """Continuous log f written in the preimage coordinate."""
    return log_one_minus_z2(z)


def df_drho_of_z(z):
    """df/drho = 2 z^2 / sqrt(1 - z^2), written in the preimage coordinate."""
    z = _c(z)
    return 2 * z * z / sqrt_one_minus_z2(z)


def dlogf_drho_of_z(z):
    """d log f / d rho = 2 z^2 / (1 - z^2)^{3/2}."""
    z = _c(z)
    return 2 * z * z / sqrt_one_minus_z2(z) ** 3


# --- the region K_+ and its boundary arc ------------------------------------

def in_kplus(z):
    """Re rho(z) > 0, i.e. membership in K_+ (real points are taken as limits)."""
    return np.real(rho(z)) > 0


def kplus_boundary_arc(n: int):
    """n points of rho^{-1}([-i pi, 0]) from z = 1 to z = -1."""
    if n < 2:
        raise ValueError("need at least two points")
    t = np.linspace(0.0, 1.0, n)
    z = np.asarray(rho_inverse(-1j * np.pi * t), dtype=complex)
    z[0], z[-1] = 1.0, -1.0
    return z


def arc_point(tau):
    """Point of the K_+ boundary arc with rho = -i tau, tau in [0, pi]."""
    return rho_inverse(-1j * np.asarray(tau, dtype=float))


# --- strips Omega_c^nu(k) ----------------------------------------------------

@dataclass(frozen=True)
class StripIndex:
    """Half-strip parameters: order ``nu``, index ``k``, family ``c`` and model constant ``sigma``."""

    nu: float
    k: int
    c: float = 1.0
    sigma: complex = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("strip parameter c must be positive")
        if self.sigma == 0:
            raise DomainError("sigma must be nonzero")
        if self.k < -self.nu / 2 - 2:
            raise DomainError(f"k={self.k} below the admissible range for nu={self.nu}")


@dataclass(frozen=True)
class StripRegion:
    center: float
    half_width: float
    cutoff: float
    tol: float = field(default=MEMBERSHIP_TOL)

    def contains(self, w):
        """Closed membership; boundary ties resolve to inside."""
        w = _c(w)
        return (w.real <= self.cutoff + self.tol) & (
            np.abs(w.imag - self.center) <= self.half_width + self.tol
        )

    def interior(self, w):
        w = _c(w)
        return (w.real < self.cutoff) & (np.abs(w.imag - self.center) < self.half_width)

    def boundary_rectangle(self, left: float):
        """Corners (lower-left, upper-right) of the strip truncated at Re = left."""
        return (
            complex(left, self.center - self.half_width),
            complex(self.cutoff, self.center + self.half_width),
        )


def strip(s: StripIndex) -> StripRegion:
    nu = s.nu
    center = -np.angle(s.sigma) / (2 * nu) + s.k * np.pi / nu + np.pi / (4 * nu)
    return StripRegion(
        center=float(center),
        half_width=float(np.pi / (2 * nu)),
        cutoff=float(-np.log(s.c * nu) / (2 * nu)),
    )
