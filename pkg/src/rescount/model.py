"""Model resonances: roots of F_{nu,k}(rho) = 0, one per half-strip.

With ``f(rho) = 1 - z^2`` the model function is

    h_nu(rho) = exp(-2 nu rho) / (nu^2 f(rho)) - sigma,

and its zero in the k-th strip solves ``F_{nu,k}(rho) = 0`` where

    F_{nu,k}(rho) = rho + log(sigma)/(2 nu) + log(nu)/nu + log f(rho)/(2 nu) - k pi i / nu.

Each root rho gives a point ``z = rho^{-1}(rho)`` and a pole at ``-nu z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from .errors import ConvergenceError, DomainError, StripEscapeError
from .modes import ModeIndex

NU_MIN = 30.0
CONTRACTION_STEPS = 4
NEWTON_TOL = 1e-13


@dataclass(frozen=True)
class ModelResonance:
    strip: geo.StripIndex
    rho: complex
    z: complex
    scattering_pole: complex
    multiplicity: int = 1


@dataclass(frozen=True)
class Perturbation:
    """Bounded multiplicative perturbations of the two terms of h_nu.

    ``eps`` and ``eps_prime`` map arrays of rho to complex arrays.  ``bound``
    is the advertised sup norm and must not exceed 0.1.
    """

    eps: Callable
    eps_prime: Callable
    bound: float = 0.05

    def __post_init__(self):
        if not 0 <= self.bound <= 0.1:
            raise ValueError("perturbations must be bounded by 0.1")

    @classmethod
    def zero(cls):
        nil = lambda rho: np.zeros(np.shape(rho), dtype=complex)  # noqa: E731
        return cls(nil, nil, 0.0)


def _log_sigma(sigma) -> complex:
    return complex(np.log(complex(sigma)))


def _target(nu, k, sigma, logf):
    """Right-hand side of the fixed-point form rho = T(rho)."""
    return -_log_sigma(sigma) / (2 * nu) - np.log(nu) / nu - logf / (2 * nu) + k * np.pi * 1j / nu


def F(strip: geo.StripIndex, rho, hint=None):
    """F_{nu,k}(rho); vectorized in rho."""
    z = geo.rho_inverse(rho, hint=hint)
    return np.asarray(rho) - _target(strip.nu, strip.k, strip.sigma, geo.log_one_minus_z2(z))


def dF(strip: geo.StripIndex, rho, hint=None):
    """dF/drho = 1 + z^2 / (nu (1 - z^2)^{3/2})."""
    z = geo.rho_inverse(rho, hint=hint)
    return 1 + geo.dlogf_drho_of_z(z) / (2 * strip.nu)


def h_nu(strip: geo.StripIndex, rho, perturbation: Optional[Perturbation] = None):
    """The model function exp(-2 nu rho)/(nu^2 f) - sigma (or its perturbed form g_nu)."""
    nu, sigma = strip.nu, complex(strip.sigma)
    rho = np.asarray(rho, dtype=complex)
    z = geo.rho_inverse(rho)
    f = 1 - np.asarray(z) ** 2
    a = np.exp(-2 * nu * rho) / (nu ** 2 * f)
    if perturbation is None:
        return a - sigma
    return a * (1 + perturbation.eps(rho)) - sigma * (1 + perturbation.eps_prime(rho))


def h_nu_scaled(strip: geo.StripIndex, rho, perturbation: Optional[Perturbation] = None):
    """exp(2 nu rho) h_nu(rho): same zeros as h_nu, no overflow far to the left."""
    nu, sigma = strip.nu, complex(strip.sigma)
    rho = np.asarray(rho, dtype=complex)
    z = geo.rho_inverse(rho)
    f = 1 - np.asarray(z) ** 2
    e = np.exp(2 * nu * rho)
    if perturbation is None:
        return 1 / (nu ** 2 * f) - sigma * e
    return (1 + perturbation.eps(rho)) / (nu ** 2 * f) - sigma * (1 + perturbation.eps_prime(rho)) * e


def rho_star(strip: geo.StripIndex) -> complex:
    """Approximant with log f frozen at the strip's reference point k pi i / nu."""
    if strip.k == 0:
        raise DomainError("rho_star is undefined for k = 0")
    nu, k = strip.nu, strip.k
    z = geo.rho_inverse(k * np.pi * 1j / nu)
    return complex(_target(nu, k, strip.sigma, geo.log_one_minus_z2(z)))


def z_hat(nu: float, k: int) -> complex:
    """rho^{-1}(k pi i / nu), a point of the K_+ boundary arc."""
    if not (-nu / 2 - 2 < k <= 0):
        raise DomainError(f"z_hat needs -nu/2 - 2 < k <= 0, got k={k}")
    return complex(geo.rho_inverse(k * np.pi * 1j / nu))


# --- vectorized solver ------------------------------------------------------

def _initial(nu, ks, sigma):
    ks = np.asarray(ks)
    base = ks * np.pi * 1j / nu - _log_sigma(sigma) / (2 * nu)
    out = base - (2.0 / 3.0) * np.log(nu) / nu
    large = np.abs(ks) >= nu ** 0.25
    if np.any(large):
        zk = geo.rho_inverse(ks[large] * np.pi * 1j / nu)
        out[large] = _target(nu, ks[large], sigma, geo.log_one_minus_z2(zk))
    return out


def _clamp_to_omega(rho):
    """Pull points that drifted just outside Omega-bar back onto its boundary."""
    out = rho.copy()
    outside = ~geo.in_omega(out)
    if np.any(outside):
        re = out.real[outside]
        im = np.clip(out.imag[outside], -np.pi, 0.0)
        out[outside] = np.where(re > 0, re + 1j * im, 1j * im)
    return out


def solve_strips(nu: float, ks, sigma=1.0, c: float = 1.0, check_strip: bool = True):
    """Roots rho_{nu,k} and points z_{nu,k} for an array of strip indices.

    Returns ``(rho, z, dF)``.  Raises StripEscapeError if a converged root
    lies outside its closed strip, ConvergenceError if Newton stalls.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    if np.any(ks < -nu / 2 - 2):
        raise DomainError("strip index below -nu/2 - 2")
    rho = _clamp_to_omega(_initial(nu, ks, sigma))
    z = geo.rho_inverse(rho)
    for _ in range(CONTRACTION_STEPS):
        rho = _clamp_to_omega(_target(nu, ks, sigma, geo.log_one_minus_z2(z)))
        z = geo.rho_inverse(rho, hint=z)
    done = np.zeros(ks.shape, dtype=bool)
    res = np.full(ks.shape, np.inf)
    for _ in range(40):
        act = ~done
        if not np.any(act):
            break
        Fv = rho[act] - _target(nu, ks[act], sigma, geo.log_one_minus_z2(z[act]))
        dFv = 1 + geo.dlogf_drho_of_z(z[act]) / (2 * nu)
        step = Fv / dFv
        new = _clamp_to_omega(rho[act] - step)
        rho[act] = new
        z[act] = geo.rho_inverse(new, hint=z[act])
        res[act] = np.abs(Fv)
        done[act] = (np.abs(step) <= 1e-15 * np.maximum(1, np.abs(new))) | (np.abs(Fv) < 1e-15)
    Fv = rho - _target(nu, ks, sigma, geo.log_one_minus_z2(z))
    res = np.abs(Fv)
    if np.any(res > NEWTON_TOL):
        i = int(np.argmax(res))
        raise ConvergenceError(f"F_(nu={nu}, k={ks[i]}) root not found", last=rho[i], residual=res[i])
    if check_strip:
        for i in np.flatnonzero(~_in_strips(nu, ks, sigma, c, rho)):
            raise StripEscapeError(
                f"root for nu={nu}, k={ks[i]} left its strip", last=rho[i], residual=res[i]
            )
    dFv = 1 + geo.dlogf_drho_of_z(z) / (2 * nu)
    return rho, z, dFv


def _in_strips(nu, ks, sigma, c, rho):
    center = -np.angle(complex(sigma)) / (2 * nu) + ks * np.pi / nu + np.pi / (4 * nu)
    cutoff = -np.log(c * nu) / (2 * nu)
    return (rho.real <= cutoff + geo.MEMBERSHIP_TOL) & (
        np.abs(rho.imag - center) <= np.pi / (2 * nu) + geo.MEMBERSHIP_TOL
    )


def solve_rho(strip: geo.StripIndex, nu_min: float = NU_MIN, multiplicity: int = 1) -> ModelResonance:
    """The unique root of F_{nu,k} in the strip Omega_c^nu(k)."""
    if strip.nu < nu_min:
        raise DomainError(f"nu={strip.nu} below the solver threshold {nu_min}")
    rho, z, _ = solve_strips(strip.nu, [strip.k], strip.sigma, strip.c)
    return ModelResonance(strip, complex(rho[0]), complex(z[0]), complex(-strip.nu * z[0]), multiplicity)


# --- per-mode counts --------------------------------------------------------

def negative_range(nu: float):
    """Indices k with -nu/2 + 2 < k <= 0."""
    lo = int(np.floor(-nu / 2 + 2)) + 1
    return np.arange(lo, 1)


def _scan_positive(nu, r, sigma, c, chunk=16, k_cap_factor=4.0):
    """|z_{nu,k}| for k = 1, 2, ... until a whole chunk exceeds r/nu."""
    out = []
    k_cap = max(int(k_cap_factor * r), chunk)
    k = 1
    while k <= k_cap:
        ks = np.arange(k, min(k + chunk, k_cap + 1))
        _, z, _ = solve_strips(nu, ks, sigma, c)
        out.append(np.abs(z))
        if np.all(np.abs(z) > r / nu):
            break
        k += chunk
    return np.concatenate(out) if out else np.empty(0)


def mode_cloud(mode: ModeIndex, r_max: float, sigma=1.0, c: float = 1.0):
    """Pole moduli |nu z| for k > 0 and for -nu/2 + 2 < k <= 0 (each unsorted)."""
    nu = mode.nu
    if mode.l >= 2 * r_max:
        return np.empty(0), np.empty(0)
    plus = nu * _scan_positive(nu, r_max, sigma, c)
    kneg = negative_range(nu)
    if kneg.size:
        _, z, _ = solve_strips(nu, kneg, sigma, c)
        minus = nu * np.abs(z)
    else:
        minus = np.empty(0)
    return plus[plus <= r_max], minus[minus <= r_max]


def n_plus(mode: ModeIndex, r: float, sigma=1.0, c: float = 1.0) -> int:
    if r <= 0:
        raise DomainError("r must be positive")
    if mode.l >= 2 * r:
        return 0
    return int(np.count_nonzero(mode_cloud(mode, r, sigma, c)[0] <= r))


def n_minus(mode: ModeIndex, r: float, sigma=1.0, c: float = 1.0) -> int:
    if r <= 0:
        raise DomainError("r must be positive")
    if mode.l >= 2 * r:
        return 0
    return int(np.count_nonzero(mode_cloud(mode, r, sigma, c)[1] <= r))


def m_minus(mode: ModeIndex, r: float) -> int:
    """Number of k in [-nu/2 + 2, 0] with |z_hat(nu, k)| <= r/nu."""
    nu = mode.nu
    if mode.l > 2 * r:
        return 0
    lo = int(np.ceil(-nu / 2 + 2))
    ks = np.arange(lo, 1)
    if ks.size == 0:
        return 0
    z = geo.rho_inverse(ks * np.pi * 1j / nu)
    return int(np.count_nonzero(np.abs(z) <= r / nu))


def mode_resonances(mode: ModeIndex, r_max: float, sigma=1.0, c: float = 1.0):
    """(k, rho, z) for every solved strip of this mode with |nu z| <= r_max, k ascending."""
    nu = mode.nu
    empty = (np.empty(0, dtype=int), np.empty(0, dtype=complex), np.empty(0, dtype=complex))
    if mode.l >= 2 * r_max:
        return empty
    ks = [negative_range(nu)]
    k_cap = max(int(4.0 * r_max), 16)
    k = 1
    while k <= k_cap:
        chunk = np.arange(k, min(k + 16, k_cap + 1))
        _, z, _ = solve_strips(nu, chunk, sigma, c)
        ks.append(chunk)
        if np.all(np.abs(z) > r_max / nu):
            break
        k += 16
    ks = np.concatenate(ks)
    if ks.size == 0:
        return empty
    rho, z, _ = solve_strips(nu, ks, sigma, c)
    keep = nu * np.abs(z) <= r_max
    return ks[keep], rho[keep], z[keep]
