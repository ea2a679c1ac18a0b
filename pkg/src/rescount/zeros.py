"""Positive zeros of J_nu, their rho-coordinates, and an argument-principle counter."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from filelock import FileLock

from . import geometry as geo
from .errors import BoundaryZeroError, ConvergenceError, DomainError, NonIntegerError
from .modes import ModeIndex, order_only
from .special import NU_ASYMPTOTIC, miller_log_j, olver_log_j

CACHE_HEADER = "# bessel-zeros v1"
DEFAULT_K0 = 3
MAX_PANELS = 128


@dataclass(frozen=True)
class BesselZero:
    """One positive zero x = nu * z of J_nu; ``k`` counts from 0 upward."""

    nu: float
    k: int
    z: float
    rho: complex
    type: str

    @property
    def x(self) -> float:
        return self.nu * self.z


# --- real-axis evaluation ---------------------------------------------------

def _j_real(nu: float, x):
    """J_nu(x) for real x > 0 as floats (underflows to 0 far below the turning point)."""
    x = np.asarray(x, dtype=float)
    if nu >= NU_ASYMPTOTIC:
        lg = olver_log_j(nu, x / nu)[0]
    else:
        lg = miller_log_j(nu, x)
    return np.real(np.exp(lg))


def _airy_zero_magnitudes(s):
    """|a_s| for the s-th negative zero of Ai, from its large-s expansion."""
    t = 3 * np.pi * (4 * np.asarray(s, dtype=float) - 1) / 8
    return t ** (2.0 / 3.0) * (1 + 5 / 48 * t ** -2 - 5 / 36 * t ** -4 + 77125 / 82944 * t ** -6)


def _seeds(nu: float, count: int):
    s = np.arange(1, count + 1)
    y = (2.0 / 3.0) * _airy_zero_magnitudes(s) ** 1.5 / nu
    z = np.real(geo.rho_inverse(1j * y))
    return nu * z


def _newton_zeros(nu: float, x0, max_iter: int = 60):
    x = np.array(x0, dtype=float)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        act = ~done
        if not np.any(act):
            break
        xa = x[act]
        j0 = _j_real(nu, xa)
        j1 = _j_real(nu + 1, xa)
        step = j0 / (nu / xa * j0 - j1)
        # keep iterates positive and moving by less than half a zero spacing
        step = np.clip(step, -0.4 * np.pi, 0.4 * np.pi)
        x[act] = np.maximum(xa - step, 0.5 * xa)
        done[act] = np.abs(step) <= 1e-14 * xa
    return x, done


def _locate(nu: float, x_max: float):
    """All zeros of J_nu in (0, x_max], validated by sign alternation."""
    if x_max <= nu:
        return np.empty(0)
    y = float(np.imag(geo.rho(x_max / nu)))
    count = int(nu * y / np.pi + 0.25) + 3
    while True:
        x, ok = _newton_zeros(nu, _seeds(nu, count))
        if not np.all(ok):
            i = int(np.flatnonzero(~ok)[0])
            raise ConvergenceError(
                f"zero {i} of J_{nu} did not converge", last=float(x[i]),
                residual=float(abs(_j_real(nu, x[i]))),
            )
        if x[-1] > x_max:
            break
        count += 3
    _validate(nu, x)
    return x[x <= x_max]


def _validate(nu: float, x):
    if np.any(np.diff(x) <= 0):
        bad = int(np.flatnonzero(np.diff(x) <= 0)[0])
        raise ConvergenceError(f"zeros of J_{nu} out of order near index {bad}", last=float(x[bad]))
    # J_nu > 0 before the first zero and alternates between consecutive ones
    probes = np.concatenate([[0.5 * (max(nu, 1e-3) + x[0]) if x[0] > nu else 0.5 * x[0]],
                             0.5 * (x[1:] + x[:-1])])
    signs = np.sign(_j_real(nu, probes))
    expected = (-1.0) ** np.arange(len(x))
    bad = np.flatnonzero(signs != expected)
    if bad.size:
        raise ConvergenceError(
            f"sign check failed between zeros of J_{nu} at index {int(bad[0])}",
            last=float(probes[bad[0]]),
        )


# --- cache ------------------------------------------------------------------

def _cache_name(nu: float, z_max: float) -> str:
    return f"zeros_nu={float(nu)!r}_zmax={float(z_max)!r}.csv"


_NAME_RE = re.compile(r"zeros_nu=(.+)_zmax=(.+)\.csv$")


def _read_cache(path: Path):
    with open(path) as fh:
        if fh.readline().strip() != CACHE_HEADER:
            return None
        header = fh.readline().strip().split(",")
        if header != ["nu", "k", "z", "rho_im", "type"]:
            return None
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return np.array([float(r[2]) for r in rows])


def _write_cache(path: Path, nu: float, zeros: list):
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        fh.write(CACHE_HEADER + "\n")
        fh.write("nu,k,z,rho_im,type\n")
        for zr in zeros:
            fh.write(f"{zr.nu!r},{zr.k},{zr.z!r},{zr.rho.imag!r},{zr.type}\n")
    os.replace(tmp, path)


def _cached_positions(nu: float, z_max: float, cache_dir: Path):
    for entry in cache_dir.glob("zeros_nu=*_zmax=*.csv"):
        m = _NAME_RE.match(entry.name)
        if not m:
            continue
        try:
            stored_nu, stored_zmax = float(m.group(1)), float(m.group(2))
        except ValueError:
            continue
        if stored_nu == nu and stored_zmax >= z_max:
            z = _read_cache(entry)
            if z is not None:
                return z[z <= z_max]
    return None


def cache_lock(cache_dir) -> FileLock:
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    return FileLock(str(cache_dir / ".lock"))


# --- public API -------------------------------------------------------------

def classify(nu: float, z, k0: int = DEFAULT_K0):
    rho_im = np.imag(geo.rho(np.asarray(z, dtype=complex)))
    return np.where(np.abs(nu * rho_im) < k0 * np.pi, "first", "second"), rho_im


def _records(nu: float, z, k0: int):
    types, rho_im = classify(nu, z, k0)
    return [
        BesselZero(nu=nu, k=i, z=float(zi), rho=complex(0.0, float(ri)), type=str(t))
        for i, (zi, ri, t) in enumerate(zip(np.atleast_1d(z), np.atleast_1d(rho_im), np.atleast_1d(types)))
    ]


def bessel_zeros_scaled(mode, z_max: float, k0: int = DEFAULT_K0, cache_dir=None) -> list:
    """All zeros z of J_nu(nu z) with z <= z_max, as BesselZero records."""
    nu = order_only(mode)
    if nu < 0.5:
        raise DomainError("order must be at least 1/2")
    if z_max <= 1:
        raise DomainError("z_max must exceed 1")
    if cache_dir is None:
        return _records(nu, _locate(nu, nu * z_max) / nu, k0)
    cache_dir = Path(cache_dir)
    with cache_lock(cache_dir):
        z = _cached_positions(nu, z_max, cache_dir)
        if z is None:
            z = _locate(nu, nu * z_max) / nu
            recs = _records(nu, z, k0)
            _write_cache(cache_dir / _cache_name(nu, z_max), nu, recs)
            return recs
    return _records(nu, z, k0)


def zero_positions(nu: float, x_max: float, cache_dir=None) -> np.ndarray:
    """Unscaled zeros x of J_nu with x <= x_max (empty when x_max <= nu)."""
    if x_max <= nu:
        return np.empty(0)
    return np.array([zr.x for zr in bessel_zeros_scaled(nu, x_max / nu, cache_dir=cache_dir)])


def m_plus(mode, r: float, cache_dir=None) -> int:
    """Number of positive zeros of J_nu not exceeding r."""
    if r <= 0:
        raise DomainError("r must be positive")
    nu = order_only(mode)
    if isinstance(mode, ModeIndex) and mode.l >= r:
        return 0
    return int(np.count_nonzero(zero_positions(nu, r, cache_dir) <= r))


# --- argument principle -------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Axis-parallel rectangle with Gauss-Legendre order and doubling limit."""

    lower_left: complex
    upper_right: complex
    order: int = 16
    refinements: int = 6
    boundary_tol: float = 1e-10

    def __post_init__(self):
        d = complex(self.upper_right) - complex(self.lower_left)
        if d.real <= 0 or d.imag <= 0:
            raise ValueError("degenerate rectangle")

    def corners(self):
        a, b = complex(self.lower_left), complex(self.upper_right)
        return [a, complex(b.real, a.imag), b, complex(a.real, b.imag)]


def _contour_integral(fn, corners, n, h, moment: int = 0):
    """(1/2 pi i) of the contour integral of w^moment fn'(w)/fn(w), plus min/max |fn|."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    total = 0j
    fmin, fmax = np.inf, 0.0
    short = min(abs(corners[1] - corners[0]), abs(corners[3] - corners[0]))
    for a, b in zip(corners, corners[1:] + corners[:1]):
        # long thin rectangles: panels no longer than the short side
        m = int(min(MAX_PANELS, np.ceil(abs(b - a) / short - 1e-9)))
        ends = a + (b - a) * np.linspace(0.0, 1.0, m + 1)
        lo, hi = ends[:-1, None], ends[1:, None]
        pts = ((lo + hi) / 2 + (hi - lo) / 2 * nodes).ravel()
        wts = (np.broadcast_to(weights, (m, n)) * (hi - lo) / 2).ravel()
        f0 = np.asarray(fn(pts), dtype=complex)
        dfn = (np.asarray(fn(pts + h), dtype=complex) - np.asarray(fn(pts - h), dtype=complex)) / (2 * h)
        total += np.sum(wts * pts ** moment * dfn / f0)
        fmin = min(fmin, float(np.min(np.abs(f0))))
        fmax = max(fmax, float(np.max(np.abs(f0))))
    return total / (2j * np.pi), fmin, fmax


def count_zeros_argument_principle(fn: Callable, contour: ContourSpec) -> int:
    """Winding number of fn around the rectangle, rounded to an integer.

    ``fn`` must accept numpy arrays.  Derivatives come from central
    differences; the node count doubles until two estimates agree.
    """
    corners = contour.corners()
    side = min(abs(corners[1] - corners[0]), abs(corners[3] - corners[0]))
    h = 1e-5 * side
    prev = None
    n = contour.order
    for _ in range(contour.refinements + 1):
        val, fmin, fmax = _contour_integral(fn, corners, n, h)
        if not np.isfinite(val):
            raise BoundaryZeroError("non-finite integrand on the contour")
        if fmin <= contour.boundary_tol * fmax:
            raise BoundaryZeroError(f"|fn| drops to {fmin:.3g} on the contour")
        if prev is not None and abs(val - prev) < 1e-6:
            k = round(val.real)
            if abs(val - k) < 0.25:
                return int(k)
            if abs(val.real - np.floor(val.real) - 0.5) < 1e-3:
                # a simple zero on a straight side winds exactly half way
                raise BoundaryZeroError(f"winding integral {val} suggests a zero on the contour")
            raise NonIntegerError(f"winding integral settled at {val}")
        prev = val
        n *= 2
    raise NonIntegerError(f"winding integral did not settle (last {prev})")


def zero_sum_argument_principle(fn: Callable, contour: ContourSpec, tol: float = 1e-10):
    """(count, sum of enclosed zeros) from the zeroth and first contour moments.

    With a single enclosed zero the sum is its location.
    """
    count = count_zeros_argument_principle(fn, contour)
    corners = contour.corners()
    side = min(abs(corners[1] - corners[0]), abs(corners[3] - corners[0]))
    h = 1e-4 * side
    prev = None
    n = contour.order
    for _ in range(contour.refinements + 1):
        # Richardson step on the difference quotient removes its O(h^2) error
        v1 = _contour_integral(fn, corners, n, h, moment=1)[0]
        v2 = _contour_integral(fn, corners, n, h / 2, moment=1)[0]
        val = (4 * v2 - v1) / 3
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return count, complex(val)
        prev = val
        n *= 2
    raise NonIntegerError(f"first moment did not settle (last {prev})")
