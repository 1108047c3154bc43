"""Gamma and real-order Bessel J kernels.

``gamma_real`` uses the Lanczos approximation (g = 7, nine coefficients).
``bessel_j`` switches between the ascending series, Miller's backward
recurrence normalized by a Neumann sum, and Hankel's large-argument
expansion. ``log_bessel_j`` returns ``(log|J|, sign)`` so that very small
or very large values survive for the Morse wavefunctions.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import RangeUnsupported

NU_MAX = 1.0e3
Z_MAX = 1.0e4
GAMMA_X_MAX = 170.0

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

_RESCALE = 1.0e-250
_LOG_RESCALE = math.log(_RESCALE)
_BIG = 1.0e250


def _lanczos_sum(x: float) -> float:
    # x is the shifted argument (Gamma(x + 1) form)
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (x + i)
    return acc


def gamma_real(x: float) -> float:
    """Gamma function for ``0 < x <= 170`` with relative error below 1e-13."""
    x = float(x)
    if not (0.0 < x <= GAMMA_X_MAX):
        raise RangeUnsupported("gamma_real needs 0 < x <= 170", x=x)
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_real(1.0 - x))
    xm = x - 1.0
    t = xm + _LANCZOS_G + 0.5
    # split the power so that t**(xm + 0.5) never overflows near x = 170
    half = t ** (0.5 * (xm + 0.5))
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_sum(xm)


def lgamma_real(x: float) -> float:
    """``log Gamma(x)`` for ``x > 0`` (no upper limit)."""
    x = float(x)
    if not x > 0.0:
        raise RangeUnsupported("lgamma_real needs x > 0", x=x)
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma_real(1.0 - x)
    xm = x - 1.0
    t = xm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (xm + 0.5) * math.log(t) - t + math.log(_lanczos_sum(xm))


def _check_range(nu: float, z: np.ndarray) -> None:
    if not (0.0 <= nu <= NU_MAX):
        raise RangeUnsupported("bessel_j supports 0 <= nu <= 1e3", nu=nu)
    if np.any(~np.isfinite(z)) or np.any(z < 0.0) or np.any(z > Z_MAX):
        raise RangeUnsupported("bessel_j supports 0 < z <= 1e4")


def _series_log(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending series ``(z/2)^nu sum_k (-z^2/4)^k / (k! Gamma(nu+k+1))``."""
    quarter = -0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    k = 0
    while True:
        k += 1
        term = term * quarter / (k * (nu + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)) or k > 500:
            break
    with np.errstate(divide="ignore"):
        log_pref = nu * np.log(0.5 * z) - lgamma_real(nu + 1.0)
        log_abs = log_pref + np.log(np.abs(total))
    return log_abs, np.sign(total)


def _hankel_log(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Large-argument expansion ``sqrt(2/(pi z)) (P cos chi - Q sin chi)``."""
    mu = 4.0 * nu * nu
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    a = np.ones_like(z)
    prev = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 60):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(a)
        # stop each point once the asymptotic terms stop shrinking
        active &= mag < prev
        prev = mag
        contrib = np.where(active, a, 0.0)
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            P = P + sign * contrib
        else:
            Q = Q + sign * contrib
        if not np.any(active & (mag > 1e-17)):
            break
    chi = z - (0.5 * nu + 0.25) * math.pi
    val = P * np.cos(chi) - Q * np.sin(chi)
    with np.errstate(divide="ignore"):
        log_abs = 0.5 * np.log(2.0 / (math.pi * z)) + np.log(np.abs(val))
    return log_abs, np.sign(val)


def _miller_log(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Backward recurrence from a high order, normalized by the Neumann sum.

    ``(z/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k) / k! J_{nu0+2k}(z)`` with
    ``nu0 = nu - floor(nu)``. Values are rescaled by 1e-250 whenever they
    grow past 1e250 and the number of rescalings is tracked per point.
    """
    m_target = int(math.floor(nu))
    nu0 = nu - m_target
    top = max(nu, float(z.max()))
    N = int(top + 12.0 * top ** (1.0 / 3.0) + 40.0)
    j_next = np.zeros_like(z)  # J_{mu+1}
    j_cur = np.full_like(z, 1e-300)  # J_mu at mu = nu0 + N
    scale_count = np.zeros(z.shape)
    target = np.zeros_like(z)
    target_count = np.zeros(z.shape)
    norm = np.zeros_like(z)

    # Neumann weights w_k = (nu0 + 2k) Gamma(nu0 + k) / k!, k >= 1, built upward
    half = N // 2
    b = np.empty(half + 1)
    b[0] = gamma_real(nu0 + 1.0) if nu0 > 0 else 1.0
    if half >= 1:
        b[1] = gamma_real(nu0 + 1.0) if nu0 > 0 else 1.0
        for k in range(2, half + 1):
            b[k] = b[k - 1] * (nu0 + k - 1) / k
    weights = np.array([(nu0 + 2 * k) * b[k] if k > 0 else b[0] for k in range(half + 1)])

    for m in range(N, -1, -1):
        mu = nu0 + m
        if m % 2 == 0:
            norm = norm + weights[m // 2] * j_cur
        if m == m_target:
            target = j_cur.copy()
            target_count = scale_count.copy()
        if m == 0:
            break
        j_prev = (2.0 * mu / z) * j_cur - j_next
        big = np.abs(j_prev) > _BIG
        if np.any(big):
            j_prev = np.where(big, j_prev * _RESCALE, j_prev)
            j_cur = np.where(big, j_cur * _RESCALE, j_cur)
            norm = np.where(big, norm * _RESCALE, norm)
            scale_count = scale_count + big
        j_next, j_cur = j_cur, j_prev
    # values recorded before later rescalings must be brought to the final scale
    extra = scale_count - target_count
    log_norm = np.log(np.abs(norm)) - nu0 * np.log(0.5 * z)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(target)) + extra * _LOG_RESCALE - log_norm
    return log_abs, np.sign(target) * np.sign(norm)


def _method_masks(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    series = 0.25 * z * z <= 6.0 * (nu + 1.0)
    hankel = ~series & (z >= 35.0) & (z >= 0.6 * nu * nu)
    miller = ~series & ~hankel
    return series, hankel, miller


def log_bessel_j(nu: float, z) -> tuple[np.ndarray, np.ndarray]:
    """``(log|J_nu(z)|, sign J_nu(z))`` for real ``nu >= 0`` and ``z >= 0``."""
    nu = float(nu)
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    _check_range(nu, z_arr)
    log_abs = np.empty_like(z_arr)
    sign = np.empty_like(z_arr)
    zero = z_arr == 0.0
    if np.any(zero):
        log_abs[zero] = 0.0 if nu == 0.0 else -np.inf
        sign[zero] = 1.0 if nu == 0.0 else 0.0
    pos = ~zero
    series, hankel, miller = _method_masks(nu, z_arr)
    for mask, kernel in ((series, _series_log), (hankel, _hankel_log), (miller, _miller_log)):
        sel = mask & pos
        if np.any(sel):
            la, sg = kernel(nu, z_arr[sel])
            log_abs[sel] = la
            sign[sel] = sg
    if np.ndim(z) == 0:
        return float(log_abs[0]), float(sign[0])
    return log_abs, sign


def bessel_j(nu: float, z):
    """Bessel function of the first kind ``J_nu(z)`` for real order.

    Supported rectangle: ``0 <= nu <= 1e3``, ``0 <= z <= 1e4``; values that
    underflow double precision are returned as 0.
    """
    log_abs, sign = log_bessel_j(nu, z)
    with np.errstate(under="ignore"):
        return sign * np.exp(log_abs)
