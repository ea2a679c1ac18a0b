"""Airy functions and Bessel functions of large order.

Airy evaluation regions (``|w|`` is the argument modulus):

* ``|w| <= 3.5``: Maclaurin series from the ODE recurrence.
* ``3.5 < |w| < 8``: Taylor stepping of ``y'' = w y`` along the ray through w,
  always in the direction in which Ai grows (inward from radius 8 when
  ``|arg w| <= pi/3``, outward from radius 3.5 otherwise).
* ``|w| >= 8``: asymptotic expansions in ``xi = (2/3) w^{3/2}``, the
  exponential form for ``|arg w| <= 2 pi/3`` and the oscillatory ``-w``
  form beyond.

``J_nu(nu z)`` for ``nu >= 20`` uses Olver's uniform expansion in the
Airy variable ``nu^{2/3} zeta``.  Lower orders go through Miller's
backward recurrence, which also serves as an independent oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from . import geometry as geo
from .errors import DomainError, PrecisionWarning
from .modes import order_only

# Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3)
AI0 = 0.355028053887817239260063186004183176397979174199
AIP0 = -0.258819403792806798405183560189203963479091138354
AI0_STR = "0.355028053887817239260063186004183176397979174199"
AIP0_STR = "-0.258819403792806798405183560189203963479091138354"

SERIES_RADIUS = 3.5
ASYMPTOTIC_RADIUS = 8.0
NU_ASYMPTOTIC = 20.0
SECTOR_DELTA = 0.1
SQRT_PI = np.sqrt(np.pi)


# --- scaled values ---------------------------------------------------------

def _wrap_phase(phi):
    phi = np.mod(np.asarray(phi, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(phi == -np.pi, np.pi, phi)


@dataclass(frozen=True)
class ScaledValue:
    """A complex number stored as ``exp(log_magnitude + i phase)``.

    Fields may be arrays.  ``error_estimate`` is the relative size of the
    last asymptotic correction when the value came from an expansion.
    """

    log_magnitude: object
    phase: object
    error_estimate: object = 0.0
    low_order: bool = False

    @classmethod
    def from_log(cls, logz, error_estimate=0.0, low_order=False):
        logz = np.asarray(logz, dtype=complex)
        lm, ph = logz.real, _wrap_phase(logz.imag)
        if lm.ndim == 0:
            lm, ph = float(lm), float(ph)
        return cls(lm, ph, error_estimate, low_order)

    @classmethod
    def pack(cls, value):
        value = np.asarray(value, dtype=complex)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(value))
        ph = np.angle(value)
        ph = np.where(ph == -np.pi, np.pi, ph)
        if lm.ndim == 0:
            return cls(float(lm), float(ph))
        return cls(lm, ph)

    def unpack(self):
        return np.exp(self.log_magnitude) * np.exp(1j * np.asarray(self.phase))

    @property
    def log(self):
        return np.asarray(self.log_magnitude) + 1j * np.asarray(self.phase)


# --- asymptotic coefficients -----------------------------------------------

@lru_cache(maxsize=None)
def _airy_uv(n: int):
    """Exact u_k, v_k for k < n."""
    u = [Fraction(1)]
    for k in range(1, n):
        u.append(u[-1] * Fraction((6 * k - 5) * (6 * k - 3) * (6 * k - 1), (2 * k - 1) * 216 * k))
    v = [Fraction(1)] + [-Fraction(6 * k + 1, 6 * k - 1) * u[k] for k in range(1, n)]
    return tuple(u), tuple(v)


_SERIES_KINDS = ("u_s", "v_s", "a_s", "b_s", "a'_s", "b'_s")


@dataclass(frozen=True)
class AsymptoticSeries:
    coefficients: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in _SERIES_KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        if len(self.coefficients) < 1:
            raise ValueError("truncation order must be at least 1")


def airy_series(kind: str, order: int) -> AsymptoticSeries:
    """First ``order`` coefficients of one of the Airy expansion families.

    ``a_s``/``b_s`` multiply cos/sin(xi - pi/4) in Ai(-w) and
    ``a'_s``/``b'_s`` multiply sin/cos(xi - pi/4) in Ai'(-w), each times
    ``xi^{-2s}`` (resp. ``xi^{-2s-1}``).
    """
    u, v = _airy_uv(2 * order + 2)
    table = {
        "u_s": [u[k] for k in range(order)],
        "v_s": [v[k] for k in range(order)],
        "a_s": [(-1) ** s * u[2 * s] for s in range(order)],
        "b_s": [(-1) ** s * u[2 * s + 1] for s in range(order)],
        "a'_s": [(-1) ** s * v[2 * s] for s in range(order)],
        "b'_s": [-((-1) ** s) * v[2 * s + 1] for s in range(order)],
    }
    return AsymptoticSeries(tuple(float(c) for c in table[kind]), kind)


_U, _V = (np.array([float(c) for c in seq]) for seq in _airy_uv(60))


# --- Airy: three regimes ----------------------------------------------------

def _maclaurin(w, nterms=110):
    """Ai, Ai' from the power series; terms obey t_n = t_{n-3} w^3 / (n (n-1))."""
    w2 = w * w
    w3 = w2 * w
    terms = [np.full_like(w, AI0), AIP0 * w, np.zeros_like(w)]
    dterms = [np.zeros_like(w), np.full_like(w, AIP0), np.zeros_like(w)]
    for n in range(3, nterms):
        terms.append(terms[n - 3] * w3 / (n * (n - 1)))
        dterms.append(terms[n - 3] * w2 / (n - 1))
    return sum(terms), sum(dterms)


def _taylor_steps(w0, y, yp, w1, max_step=0.5, nterms=40):
    """Integrate y'' = w y from w0 to w1 along the straight segment."""
    dist = np.abs(w1 - w0)
    nsteps = int(np.ceil(np.max(dist) / max_step)) if dist.size else 0
    if nsteps == 0:
        return y, yp
    h = (w1 - w0) / nsteps
    wc = w0.copy()
    for _ in range(nsteps):
        c = [y, yp, wc * y / 2]
        val = y + yp * h + c[2] * h * h
        der = yp + 2 * c[2] * h
        hp = h * h
        for n in range(1, nterms):
            cn2 = (wc * c[n] + c[n - 1]) / ((n + 2) * (n + 1))
            c.append(cn2)
            der = der + (n + 2) * cn2 * hp
            hp = hp * h
            val = val + cn2 * hp
        y, yp = val, der
        wc = wc + h
    return y, yp


def _trunc_mask(terms):
    """Keep leading terms while their moduli decrease (optimal truncation)."""
    mags = np.abs(terms)
    dec = np.ones(mags.shape, dtype=bool)
    dec[1:] = mags[1:] <= mags[:-1]
    return np.cumprod(dec, axis=0).astype(bool)


def _asym_exp(w):
    """Scaled exponential-form expansion: Ai = e^E a, Ai' = e^E b, E = -xi."""
    xi = (2.0 / 3.0) * w * np.sqrt(w)
    k = np.arange(len(_U))[:, None]
    inv = (-1.0 / xi)[None, :] ** k
    tu = _U[:, None] * inv
    tv = _V[:, None] * inv
    keep = _trunc_mask(tu)
    su = np.sum(np.where(keep, tu, 0), axis=0)
    sv = np.sum(np.where(keep, tv, 0), axis=0)
    w4 = w ** 0.25
    return -xi, su / (2 * SQRT_PI * w4), -w4 * sv / (2 * SQRT_PI)


def _asym_osc(w):
    """Scaled oscillatory form for Ai(-w'), w' = -w with |arg w'| < pi/3."""
    wp = -w
    xi = (2.0 / 3.0) * wp * np.sqrt(wp)
    k = np.arange(len(_U))[:, None]
    inv = (1.0 / xi)[None, :] ** k
    sgn = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    tu = sgn * _U[:, None] * inv
    tv = sgn * _V[:, None] * inv
    keep = _trunc_mask(tu)
    even = (k % 2 == 0)
    pu_even = np.sum(np.where(keep & even, tu, 0), axis=0)
    pu_odd = np.sum(np.where(keep & ~even, tu, 0), axis=0)
    pv_even = np.sum(np.where(keep & even, tv, 0), axis=0)
    pv_odd = np.sum(np.where(keep & ~even, tv, 0), axis=0)
    x = xi - np.pi / 4
    scale = np.abs(x.imag)
    ep = np.exp(1j * x - scale)
    em = np.exp(-1j * x - scale)
    cs = (ep + em) / 2
    sn = (ep - em) / 2j
    w4 = wp ** 0.25
    ai = (cs * pu_even + sn * pu_odd) / (SQRT_PI * w4)
    aip = w4 * (sn * pv_even - cs * pv_odd) / SQRT_PI
    return scale.astype(complex), ai, aip


def airy_scaled(w):
    """(E, a, b) with Ai(w) = e^E a and Ai'(w) = e^E b; vectorized."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    E = np.zeros(w.shape, dtype=complex)
    ai = np.empty(w.shape, dtype=complex)
    aip = np.empty(w.shape, dtype=complex)
    r = np.abs(w)
    arg = np.abs(np.angle(w))

    m = r <= SERIES_RADIUS
    if np.any(m):
        ai[m], aip[m] = _maclaurin(w[m])

    m = r >= ASYMPTOTIC_RADIUS
    me = m & (arg <= 2 * np.pi / 3)
    if np.any(me):
        E[me], ai[me], aip[me] = _asym_exp(w[me])
    mo = m & ~me
    if np.any(mo):
        E[mo], ai[mo], aip[mo] = _asym_osc(w[mo])

    mid = (r > SERIES_RADIUS) & (r < ASYMPTOTIC_RADIUS)
    unit = np.where(r > 0, w / np.where(r > 0, r, 1), 1)
    inward = mid & (arg <= np.pi / 3)
    if np.any(inward):
        w0 = ASYMPTOTIC_RADIUS * unit[inward]
        e0, a0, b0 = _asym_exp(w0)
        f = np.exp(e0)
        ai[inward], aip[inward] = _taylor_steps(w0, a0 * f, b0 * f, w[inward])
    outward = mid & ~inward
    if np.any(outward):
        w0 = SERIES_RADIUS * unit[outward]
        a0, b0 = _maclaurin(w0)
        ai[outward], aip[outward] = _taylor_steps(w0, a0, b0, w[outward])
    return E, ai, aip


def _scalar_or_array(x, like):
    return x[0] if np.ndim(like) == 0 else x


def airy_ai(w):
    """Ai(w) for complex w; relative accuracy about 1e-12 away from zeros."""
    E, a, _ = airy_scaled(w)
    return _scalar_or_array(np.exp(E) * a, w)


def airy_ai_prime(w):
    """Ai'(w) for complex w."""
    E, _, b = airy_scaled(w)
    return _scalar_or_array(np.exp(E) * b, w)


def airy_asymptotic(w):
    """The large-argument expansions alone, whatever the modulus.

    Returns (Ai, Ai') from the exponential form when ``|arg w| <= 2pi/3`` and
    from the oscillatory form otherwise.  Meaningful only for large ``|w|``;
    exposed so the two regimes can be checked against each other.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    exp_form = np.abs(np.angle(w)) <= 2 * np.pi / 3
    E, a, b = np.empty_like(w), np.empty_like(w), np.empty_like(w)
    if np.any(exp_form):
        E[exp_form], a[exp_form], b[exp_form] = _asym_exp(w[exp_form])
    if np.any(~exp_form):
        E[~exp_form], a[~exp_form], b[~exp_form] = _asym_osc(w[~exp_form])
    f = np.exp(E)
    return _scalar_or_array(f * a, w), _scalar_or_array(f * b, w)


# --- Debye polynomials and Olver's coefficient functions ---------------------

@lru_cache(maxsize=None)
def _debye(n: int):
    """Coefficient lists (ascending powers of p) of U_0..U_n, exact."""

    def add(poly, i, c):
        if i >= len(poly):
            poly.extend([Fraction(0)] * (i + 1 - len(poly)))
        poly[i] += c

    polys = [[Fraction(1)]]
    for _ in range(n):
        uk = polys[-1]
        nxt = [Fraction(0)]
        # 1/2 p^2 (1 - p^2) U_k'
        for i in range(1, len(uk)):
            add(nxt, i + 1, i * uk[i] / 2)
            add(nxt, i + 3, -i * uk[i] / 2)
        # 1/8 int_0^p (1 - 5 t^2) U_k(t) dt
        for i, c in enumerate(uk):
            add(nxt, i + 1, c / (8 * (i + 1)))
            add(nxt, i + 3, -5 * c / (8 * (i + 3)))
        polys.append(nxt)
    return tuple(tuple(p) for p in polys)


def _polyval(coeffs, p):
    out = np.zeros_like(p)
    for c in reversed(coeffs):
        out = out * p + float(c)
    return out


def _olver_closed(zeta, rho, p, S):
    """A_k, B_k (k < S) from their finite sums; loses accuracy as zeta -> 0."""
    U = _debye(2 * S)
    u, v = (np.array([float(c) for c in seq]) for seq in _airy_uv(2 * S + 1))
    Up = [_polyval(U[j], p) for j in range(2 * S)]
    irho = [np.ones_like(rho)]
    for _ in range(2 * S):
        irho.append(irho[-1] / rho)
    zm12 = zeta / (1.5 * rho)  # zeta^{-1/2}
    A, B = [], []
    for k in range(S):
        A.append(sum(v[j] * irho[j] * Up[2 * k - j] for j in range(2 * k + 1)))
        B.append(-zm12 * sum(u[j] * irho[j] * Up[2 * k - j + 1] for j in range(2 * k + 2)))
    return A, B


TAYLOR_RADIUS = 1.5
TAYLOR_SWITCH = 1.0
_NFFT = 128


@lru_cache(maxsize=None)
def _olver_taylor(S: int):
    """Maclaurin coefficients in zeta of A_k, B_k from a Cauchy integral."""
    theta = 2 * np.pi * np.arange(_NFFT) / _NFFT
    zeta_c = TAYLOR_RADIUS * np.exp(1j * theta)
    # the coefficient functions are real on the real axis: sample the lower
    # semicircle (images of C_+) and fill the rest by conjugation
    idx = np.arange(_NFFT)
    lower = (idx == 0) | (idx >= _NFFT // 2)
    zl = zeta_c[lower]
    th = np.angle(zl)
    th = np.where(th > 0, th - 2 * np.pi, th)
    rho_l = (2.0 / 3.0) * TAYLOR_RADIUS ** 1.5 * np.exp(1.5j * th)
    z = geo.rho_inverse(rho_l)
    p = 1 / geo.sqrt_one_minus_z2(z)
    A, B = _olver_closed(zl, rho_l, p, S)
    out = []
    for fvals in A + B:
        full = np.empty(_NFFT, dtype=complex)
        full[lower] = fvals
        idx = np.flatnonzero(~lower)
        full[idx] = np.conj(full[(_NFFT - idx) % _NFFT])
        c = np.fft.fft(full) / _NFFT
        c = c.real / TAYLOR_RADIUS ** np.arange(_NFFT)
        out.append(c[: _NFFT // 2])
    return out[:S], out[S:]


def olver_coefficients(z, S: int = 2):
    """Lists [A_0..A_{S-1}], [B_0..B_{S-1}] at the points z (C_+ closure)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zeta = geo.zeta(z)
    rho = geo.rho(z)
    near = np.abs(zeta) < TAYLOR_SWITCH
    A = [np.empty(z.shape, dtype=complex) for _ in range(S)]
    B = [np.empty(z.shape, dtype=complex) for _ in range(S)]
    if np.any(~near):
        p = 1 / geo.sqrt_one_minus_z2(z[~near])
        Ac, Bc = _olver_closed(zeta[~near], rho[~near], p, S)
        for k in range(S):
            A[k][~near], B[k][~near] = Ac[k], Bc[k]
    if np.any(near):
        At, Bt = _olver_taylor(S)
        zn = zeta[near]
        for k in range(S):
            A[k][near] = np.polyval(At[k][::-1], zn)
            B[k][near] = np.polyval(Bt[k][::-1], zn)
    return A, B


def _log_prefactor(z, zeta):
    """(1/4) log(4 zeta / (1 - z^2)) on the branch real on (0, inf)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(np.abs(zeta)) + 1j * np.angle(zeta)
        # zeta's argument is kept in [-pi, 0]
        lz = np.where(np.angle(zeta) > 0, lz - 2j * np.pi, lz)
        lz = np.where((zeta.imag == 0) & (zeta.real < 0), np.log(np.abs(zeta)) - 1j * np.pi, lz)
        out = 0.25 * (np.log(4.0) + lz - geo.log_one_minus_z2(z))
    return np.where(z == 1, np.log(2.0) / 3, out)


def _check_sector(z, delta):
    arg = np.angle(z)
    bad = (z == 0) | (np.asarray(z).imag < 0) | (arg > np.pi - delta)
    if np.any(bad):
        raise DomainError(f"z must satisfy 0 <= arg z <= pi - {delta} and z != 0")


def olver_log_j(nu: float, z, S: int = 2):
    """Complex log of J_nu(nu z) by the uniform expansion, plus an error estimate."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zeta = geo.zeta(z)
    nu23 = nu ** (2.0 / 3.0)
    E, ai, aip = airy_scaled(nu23 * zeta)
    A, B = olver_coefficients(z, S)
    sa = sum(A[k] / nu ** (2 * k) for k in range(S))
    sb = sum(B[k] / nu ** (2 * k) for k in range(S))
    mant = ai * sa / nu ** (1.0 / 3.0) + aip * sb / nu ** (5.0 / 3.0)
    last = ai * A[S - 1] / nu ** (2 * S - 2 + 1.0 / 3.0) + aip * B[S - 1] / nu ** (2 * S - 2 + 5.0 / 3.0)
    if S == 1:
        last = aip * B[0] / nu ** (5.0 / 3.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.abs(last) / np.abs(mant)
        logj = _log_prefactor(z, zeta) + E + np.log(mant)
    return logj, err


def bessel_j_uniform(mode, z, S: int = 2, delta: float = SECTOR_DELTA) -> ScaledValue:
    """J_nu(nu z) for 0 <= arg z <= pi - delta, in scaled form.

    ``mode`` is a ModeIndex or a bare order.  Orders below 20 still use the
    expansion but trigger a PrecisionWarning and set ``low_order``.
    """
    nu = order_only(mode)
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_sector(zz, delta)
    low = nu < NU_ASYMPTOTIC
    if low:
        warnings.warn(f"uniform expansion used at nu={nu} < {NU_ASYMPTOTIC}", PrecisionWarning)
    logj, err = olver_log_j(nu, zz, S)
    if scalar:
        logj, err = logj[0], float(err[0])
    return ScaledValue.from_log(logj, error_estimate=err, low_order=low)


# --- Miller backward recurrence --------------------------------------------

def miller_log_j(nu: float, x):
    """Complex log J_nu(x) by backward recurrence.

    Real ``x > 0`` works for any order ``nu >= 0``; complex ``x`` with
    ``Re x >= 0`` requires a half-integer order, normalised by the closed
    forms of J_{1/2} and J_{-1/2}.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    n = int(np.floor(nu))
    nu0 = nu - n
    half = abs(nu0 - 0.5) < 1e-14
    is_real = np.all(x.imag == 0)
    if np.any(x == 0):
        raise DomainError("miller_log_j needs x != 0")
    if not is_real and not half:
        raise DomainError("complex arguments need a half-integer order")
    if np.any(x.real < 0):
        raise DomainError("need Re x >= 0")
    ax = float(np.max(np.abs(x)))
    N = int(max(n, ax) + 30 + 10 * ax ** (1.0 / 3.0))
    N += N % 2
    fk1 = np.zeros(x.shape, dtype=complex)  # f_{N+1}
    fk = np.full(x.shape, 1e-300 + 0j)  # f_N
    log_scale = np.zeros(x.shape)
    log_target = None
    norm = np.zeros(x.shape, dtype=complex)
    two_over_x = 2.0 / x

    def neumann_coeff(k):
        # (nu0 + 2k) Gamma(nu0 + k) / k!, with the k = 0 term equal to Gamma(nu0 + 1)
        if k == 0:
            return np.exp(gammaln(nu0 + 1))
        return (nu0 + 2 * k) * np.exp(gammaln(nu0 + k) - gammaln(k + 1))

    for j in range(N, -1, -1):
        # fk holds f at order nu0 + j
        if j == n:
            with np.errstate(divide="ignore"):  # exact zero of J_nu
                log_target = np.log(fk) + log_scale
        if is_real and not half and j % 2 == 0:
            norm = norm + neumann_coeff(j // 2) * fk
        if j == 0:
            break
        fkm1 = (nu0 + j) * two_over_x * fk - fk1
        fk1, fk = fk, fkm1
        big = np.abs(fk) > 1e200
        if np.any(big):
            s = np.where(big, np.abs(fk), 1.0)
            fk, fk1, norm = fk / s, fk1 / s, norm / s
            log_scale = log_scale + np.log(s)
    # fk = f at nu0, fk1 = f at nu0 + 1 (relative scale e^{-log_scale})
    if half:
        fm = two_over_x * 0.5 * fk - fk1  # order -1/2
        sx, cx = np.sin(x), np.cos(x)
        use_sin = np.abs(sx) >= np.abs(cx)
        ref = np.where(use_sin, sx, cx)
        ours = np.where(use_sin, fk, fm)
        log_true = 0.5 * np.log(2 / (np.pi * x)) + np.log(ref)
        return log_target - log_scale + log_true - np.log(ours)
    return log_target + nu0 * np.log(x / 2) - np.log(norm) - log_scale


def bessel_j(nu: float, x):
    """J_nu(x) for real x > 0 or complex x with half-integer nu, via recurrence."""
    scalar = np.ndim(x) == 0
    val = np.exp(miller_log_j(nu, x))
    if np.all(np.asarray(x).imag == 0):
        val = val.real
    return val[0] if scalar else val


def bessel_j_scaled(nu: float, x) -> ScaledValue:
    scalar = np.ndim(x) == 0
    lg = miller_log_j(nu, x)
    return ScaledValue.from_log(lg[0] if scalar else lg)


def log_abs_j_nu_z(nu: float, z):
    """log |J_nu(nu z)| choosing the expansion or the recurrence by order."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if nu >= NU_ASYMPTOTIC:
        return olver_log_j(nu, z)[0].real
    return miller_log_j(nu, nu * z).real


# --- envelope ---------------------------------------------------------------

def bessel_envelope(mode, z, M: float = 2.0, A: float = 1.0):
    """Upper envelope A max(1, -log|z|) e^{-nu Re rho(z)}, or A near the turning point."""
    nu = order_only(mode)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.real < 0) or np.any(z.imag < 0) or np.any(z == 0):
        raise DomainError("envelope is defined on the closed quarter-plane without 0")
    near = nu ** (2.0 / 3.0) * np.abs(1 - z) <= M
    far = A * np.maximum(1.0, -np.log(np.abs(z))) * np.exp(-nu * np.real(geo.rho(z)))
    out = np.where(near, A, far)
    return float(out[0]) if scalar else out
