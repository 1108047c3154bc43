"""Closed-form spectra and wavefunctions generated by function-deformed SUSYQM.

Covers the hyperbolic Poeschl-Teller well (exact energies, first-order
energies, ground-state correction and the first-excited construction), the
trigonometric Poeschl-Teller well to first order, and the deformed Morse
potential (exact ladder, bound-state count and Bessel-function eigenstates).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    DomainViolation,
    LevelOutOfRange,
    NoBoundStates,
    NotNormalizable,
    ParameterRange,
    RangeUnsupported,
    ValidityWarning,
)
from .fdeform import DeformedFunctionFamily, HermiticityReport, _log_cosh, _sech, get_family, hermiticity_conditions
from .numerics.special import Z_MAX, gamma_real, lgamma_real, log_bessel_j

VALIDITY_FRACTION = 0.1
FLAG_THRESHOLD = 0.1


# ---------------------------------------------------------------- potentials


def potential_from_f(
    fam: DeformedFunctionFamily, g: float, s: float, r: float, eps0: float, x_samples
) -> np.ndarray:
    """``V = [s(s - a g) f^2 + s(2r - b g) f + r^2 - c g s]/2 + eps_0``."""
    x = np.asarray(x_samples, dtype=float)
    if not fam.contains(x):
        raise DomainViolation(f"samples leave the {fam.name} domain")
    f = fam.f(x)
    a, b, c = fam.a, fam.b, fam.c
    return 0.5 * (s * (s - a * g) * f * f + s * (2 * r - b * g) * f + r * r - c * g * s) + eps0


# ------------------------------------------------------- levels and reports


@dataclass(frozen=True)
class Level:
    n: int
    E_exact: float
    E_first_order: float
    delta_n: float
    validity_flag: bool


@dataclass(frozen=True)
class SpectrumReport:
    system: str
    levels: tuple[Level, ...]
    n_max: int
    beta_validity_bound: float
    params: dict = field(default_factory=dict)

    def energies(self) -> np.ndarray:
        return np.array([lv.E_exact for lv in self.levels])


# ------------------------------------------------------ hyperbolic PT well


@dataclass(frozen=True)
class PTHypParams:
    A: float
    beta: float
    k: float
    Delta: float
    s: float
    g: float
    u_abs: float
    phi_angle: float
    phi_phase: float

    def ladder(self, i) -> tuple[np.ndarray, np.ndarray]:
        """``(g_i, s_i)`` from ``g_i + i sqrt(beta) s_i = |u| exp(i(phi + i phase/2))``."""
        i = np.asarray(i, dtype=float)
        angle = self.phi_angle + 0.5 * i * self.phi_phase
        if self.beta == 0.0:
            return np.ones_like(i), self.A - i
        return self.u_abs * np.cos(angle), self.u_abs * np.sin(angle) / math.sqrt(self.beta)


def _check_pt_A(A: float) -> None:
    if not A > 1:
        raise DomainViolation("the hyperbolic Poeschl-Teller well needs A > 1", A=A)


def pt_hyp_hermiticity(
    A: float, *, half_width: float = 20.0, samples: int = 401, threshold: float = 1e-6
) -> HermiticityReport:
    """Boundary conditions for ``sech^A x`` under the first-order tanh representation.

    Fails for ``A <= 1``, where ``lambda |psi|^2`` does not decay.
    """
    x = np.linspace(-half_width, half_width, samples)
    sa = _sech(x) ** A
    th = np.tanh(x)
    dpsi = -A * th * sa
    d2psi = A * A * th * th * sa - A * _sech(x) ** 2 * sa
    return hermiticity_conditions(get_family("pt-tanh"), x, sa, dpsi, d2psi, threshold=threshold)


def pt_hyp_params(A: float, beta: float) -> PTHypParams:
    """Factorization constants ``k, Delta, s, g, |u|`` and the two phase angles."""
    _check_pt_A(A)
    if beta < 0:
        raise ParameterRange("beta must be >= 0", beta=beta)
    a = A * (A + 1)
    Delta = math.sqrt((1 + beta * a) ** 2 + 4 * a)
    k = (1 + beta * a + Delta) / (2 * a)
    s = math.sqrt(a / (1 + k))
    g = k * s
    u_abs = math.sqrt(1 + beta * a)
    phi_angle = math.atan2(math.sqrt(beta) * s, g)
    phi_phase = -2.0 * math.atan(math.sqrt(beta))
    return PTHypParams(A, beta, k, Delta, s, g, u_abs, phi_angle, phi_phase)


def pt_conventional_nmax(A: float) -> int:
    """Largest n with ``A - 1 <= n < A``."""
    return int(math.ceil(A)) - 1


def pt_hyp_delta(A: float, n: int) -> float:
    """First-order relative correction ``delta_n`` of the hyperbolic well."""
    return (A * A + n * ((n + 1) * A - (n * n + 2) / 3) * (2 * A + 1)) / ((2 * A + 1) * (A - n))


def pt_trig_delta(A: float, n: int) -> float:
    """First-order relative correction ``delta_n`` of the trigonometric well."""
    return (A * A + n * ((n + 1) * A + (n * n + 2) / 3) * (2 * A - 1)) / ((2 * A - 1) * (A + n))


def pt_hyp_validity_bound(A: float) -> float:
    """``1/delta_{n_max}``; for integer A this is ``3(2A+1)/(4A^4+2A^3-7A^2+A+3)``."""
    if float(A).is_integer():
        return 3 * (2 * A + 1) / (4 * A**4 + 2 * A**3 - 7 * A**2 + A + 3)
    return 1.0 / pt_hyp_delta(A, pt_conventional_nmax(A))


def pt_hyp_exact_energy(A: float, beta: float, n: int) -> float:
    """``E_n = -|u|^2/(2 beta) sin^2(phi + n phase/2)``, with the beta = 0 limit."""
    if beta == 0.0:
        return -0.5 * (A - n) ** 2
    p = pt_hyp_params(A, beta)
    return -(p.u_abs**2) / (2 * beta) * math.sin(p.phi_angle + 0.5 * n * p.phi_phase) ** 2


def pt_hyp_energy(
    A: float, beta: float, n: int, *, flag_threshold: float = FLAG_THRESHOLD
) -> Level:
    """Exact and first-order energy of level ``n`` of the hyperbolic well."""
    _check_pt_A(A)
    n_max = pt_conventional_nmax(A)
    if not 0 <= n <= n_max:
        raise LevelOutOfRange(f"levels run over 0..{n_max} for A={A}", n=n, n_max=n_max)
    bound = pt_hyp_validity_bound(A)
    if beta > VALIDITY_FRACTION * bound:
        warnings.warn(
            f"beta={beta:g} exceeds {VALIDITY_FRACTION:g} of the first-order validity bound {bound:g}",
            ValidityWarning,
            stacklevel=2,
        )
    delta = pt_hyp_delta(A, n)
    E_first = -0.5 * (A - n) ** 2 * (1 - beta * delta)
    E_exact = pt_hyp_exact_energy(A, beta, n)
    return Level(n, E_exact, E_first, delta, beta * delta < flag_threshold)


def pt_hyp_spectrum(A: float, beta: float, *, flag_threshold: float = FLAG_THRESHOLD) -> SpectrumReport:
    n_max = pt_conventional_nmax(A)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        levels = tuple(pt_hyp_energy(A, beta, n, flag_threshold=flag_threshold) for n in range(n_max + 1))
    bound = pt_hyp_validity_bound(A)
    if beta > VALIDITY_FRACTION * bound:
        warnings.warn(f"beta={beta:g} is outside the comfortable first-order range", ValidityWarning, stacklevel=2)
    return SpectrumReport("pt-hyp", levels, n_max, bound, {"A": A, "beta": beta})


def pt_trig_energy(A: float, beta: float, n: int) -> tuple[float, float]:
    """First-order energy ``(A+n)^2 (1 + beta delta_n)/2`` and ``delta_n``."""
    if not A > 1:
        raise DomainViolation("the trigonometric Poeschl-Teller well needs A > 1", A=A)
    if n < 0:
        raise LevelOutOfRange("n must be >= 0", n=n)
    delta = pt_trig_delta(A, n)
    return 0.5 * (A + n) ** 2 * (1 + beta * delta), delta


def pt_trig_spectrum(A: float, beta: float, levels: int, *, flag_threshold: float = FLAG_THRESHOLD) -> SpectrumReport:
    out = []
    for n in range(levels):
        E, d = pt_trig_energy(A, beta, n)
        out.append(Level(n, math.nan, E, d, beta * d < flag_threshold))
    return SpectrumReport("pt-trig", tuple(out), -1, math.nan, {"A": A, "beta": beta})


# ------------------------------------- hyperbolic PT first-order eigenstates


def pt_first_order_coefficients(A: float, i: int) -> tuple[float, float]:
    """``(g_i^1, s_i^1)`` in ``g_i = 1 + beta g_i^1``, ``s_i = A - i + beta s_i^1``."""
    s1 = -A * A / (2 * (2 * A + 1))
    g_i = 0.5 * (A * (A + 1) - (A - i) ** 2)
    s_i = s1 + (A**3 - (A - i) ** 3 + 2 * i) / 6 - i * A * (A + 1) / 2
    return g_i, s_i


def pt_norm_constant(a: float) -> float:
    """``N_0(a) = sqrt(Gamma(a+1/2)/(Gamma(1/2) Gamma(a)))`` normalizing ``sech^a``."""
    if a + 0.5 <= 170:
        return math.sqrt(gamma_real(a + 0.5) / (gamma_real(0.5) * gamma_real(a)))
    return math.exp(0.5 * (lgamma_real(a + 0.5) - lgamma_real(0.5) - lgamma_real(a)))


@dataclass(frozen=True)
class ZeroModeCorrection:
    """``Delta psi = N [c2 sech^{a-2} + C sech^a ln cosh + D sech^a]``."""

    a: float
    N0: float
    c2: float
    C: float
    D: float

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        sa = _sech(x) ** self.a
        with np.errstate(over="ignore"):
            lead = self.c2 * _sech(x) ** (self.a - 2) if self.c2 != 0 else 0.0
        return self.N0 * (lead + self.C * sa * _log_cosh(x) + self.D * sa)


def _mean_log_cosh(a: float) -> float:
    """``<ln cosh x>`` in the normalized density ``N_0(a)^2 sech^{2a} x``."""
    if float(a).is_integer():
        m = int(a)
        return -(math.log(2.0) + sum((-1) ** j / j for j in range(1, 2 * m)))
    num = integrate.quad(lambda u: _sech(u) ** (2 * a) * _log_cosh(u), 0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
    return 2.0 * num * pt_norm_constant(a) ** 2


def _norm_ratio(a: float) -> float:
    """``N_0(a)^2 int sech^{2a-2}``, equal to ``(2a-1)/(2a-2)``."""
    if float(a).is_integer():
        return (2 * a - 1) / (2 * a - 2)
    num = integrate.quad(lambda u: _sech(u) ** (2 * a - 2), 0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
    return 2.0 * num * pt_norm_constant(a) ** 2


def zero_mode_correction(a: float, G: float, S: float) -> ZeroModeCorrection:
    """First-order correction of the zero mode of ``B-_0(a) + beta dB-(G, S)``.

    ``sqrt(2) dB- = G d/dx + {cosh^2, 4 d/dx - d^3/dx^3}/6 + S tanh``; the
    integration constant ``D`` is fixed by normalization to first order.
    """
    c2 = -a * (a - 1) * (a - 2) / 6.0
    C = G * a - S + a * a + a * (a - 1) * (a - 2) / 3.0
    N0 = pt_norm_constant(a)
    lead = 0.0 if c2 == 0 else c2 * _norm_ratio(a)
    D = -lead - C * _mean_log_cosh(a)
    return ZeroModeCorrection(a, N0, c2, C, D)


def pt_hyp_C(A: float) -> float:
    return A * (A + 1) * (2 * A * A + 2 * A - 1) / (3 * (2 * A + 1))


def pt_hyp_D_integer(A: int) -> float:
    """Integration constant for integer A, fixed by first-order normalization."""
    return A * (A - 2) * (2 * A - 1) / 12 + pt_hyp_C(A) * (
        math.log(2.0) + sum((-1) ** j / j for j in range(1, 2 * int(A)))
    )


@dataclass(frozen=True)
class PTGroundState:
    x: np.ndarray
    psi: np.ndarray
    psi0: np.ndarray
    delta_psi: np.ndarray
    N0: float
    C: float
    D: float


def pt_hyp_groundstate(A: float, beta: float, x_samples) -> PTGroundState:
    """``psi_0 ~ N_0 sech^A x + beta Delta psi_0`` for the first-order Hamiltonian."""
    _check_pt_A(A)
    x = np.asarray(x_samples, dtype=float)
    g1, s1 = pt_first_order_coefficients(A, 0)
    corr = zero_mode_correction(A, g1 - 1.0, s1)
    if float(A).is_integer():
        corr = ZeroModeCorrection(corr.a, corr.N0, corr.c2, corr.C, pt_hyp_D_integer(int(A)))
    psi0 = corr.N0 * _sech(x) ** A
    dpsi = corr(x)
    return PTGroundState(x, psi0 + beta * dpsi, psi0, dpsi, corr.N0, corr.C, corr.D)


def pt_hyp_first_excited(A: float, beta: float, x_samples) -> np.ndarray:
    """First excited state of the first-order Hamiltonian, normalized by quadrature.

    Built as ``B+_0(A) Delta psi_0(g_1, s_1) + Delta B+(g, s) psi_0(A - 1)`` on top
    of ``B+_0(A) psi_0(A - 1)``. Needs ``A > 2`` so that the partner ground
    state satisfies the Hermiticity conditions.
    """
    if not A > 2:
        raise DomainViolation("the first-excited construction needs A > 2", A=A)
    a = A - 1.0
    g0, s0 = pt_first_order_coefficients(A, 0)
    g1, s1 = pt_first_order_coefficients(A, 1)
    partner = zero_mode_correction(a, g1 - 1.0, s1)
    c2, C1, D1 = partner.c2, partner.C, partner.D
    cubic = a * (a - 1) * (a - 2) / 3.0

    def bracket(u):
        ch2 = np.cosh(np.clip(u, -350, 350)) ** 2
        lc = _log_cosh(u)
        from_partner = (2 * A - 3) * c2 * ch2 + (2 * A - 1) * (C1 * lc + D1) - C1
        from_operator = (g0 - 1.0) * a + s0 + a * a - cubic * (ch2 - 1.0)
        return (2 * A - 1) + beta * (from_partner + from_operator)

    def shape(u):
        u = np.asarray(u, dtype=float)
        return np.tanh(u) * _sech(u) ** a * bracket(u)

    norm2 = 2.0 * integrate.quad(lambda u: shape(u) ** 2, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return shape(x_samples) / math.sqrt(norm2)


# --------------------------------------------------------------- Morse well


@dataclass(frozen=True)
class MorseParams:
    A: float
    B: float
    beta: float
    s: float
    g: float
    r: float
    Delta: float
    ladder_g: np.ndarray
    ladder_r: np.ndarray
    n_max: int
    exists: bool
    bracket: tuple[float, float]

    def nu(self, n: int) -> float:
        bB = self.beta * self.B
        g, r = self.ladder_g[n], self.ladder_r[n]
        return math.sqrt(g * g + 4 * bB * r) / bB

    def rho(self, n: int) -> float:
        bB = self.beta * self.B
        return 0.5 * (-self.ladder_g[n] / bB + self.nu(n))


def morse_existence_bound(A: float, B: float) -> float:
    """At least one bound state exists iff ``beta`` is below this value."""
    return 4 * A * (A + 1) / ((2 * A + 1) * B)


def morse_nmax_bracket(A: float, B: float, beta: float) -> tuple[float, float]:
    """Two-sided bound ``lo <= n_max < hi`` on the index of the top level."""
    bB = beta * B
    Delta = math.sqrt(1 + 0.25 * bB * bB)
    root = math.sqrt(1 + bB * (2 * A + 1))
    return (-1.5 * bB - Delta + root) / bB, (-0.5 * bB - Delta + root) / bB


def morse_delta(A: float, B: float, n: int) -> float:
    """First-order relative correction: ``E_n ~ -(A-n)^2 (1 - beta delta_n)/2``."""
    return B * (2 * n * n + 2 * n + 1) / (2 * (A - n))


def morse_params(A: float, B: float, beta: float, *, strict: bool = False) -> MorseParams:
    """Ladder ``g_i = g + i beta B``, ``r_i = r - i g - i^2 beta B / 2`` and ``n_max``."""
    if not (A > 0 and B > 0):
        raise ParameterRange("A and B must be positive", A=A, B=B)
    if not beta > 0:
        raise ParameterRange("beta must be positive", beta=beta)
    bB = beta * B
    Delta = math.sqrt(1 + 0.25 * bB * bB)
    g = 0.5 * bB + Delta
    r = A + 0.5 - 0.5 * g
    exists = r > 0
    if not exists and strict:
        raise NoBoundStates(
            "r <= 0: beta is above the existence bound", bound=morse_existence_bound(A, B), beta=beta
        )
    n_max = -1
    if exists:
        n = 0
        while r - (n + 1) * g - 0.5 * (n + 1) ** 2 * bB > 0:
            n += 1
        n_max = n
    i = np.arange(max(n_max, 0) + 2, dtype=float)
    ladder_g = g + i * bB
    ladder_r = r - i * g - 0.5 * i * i * bB
    return MorseParams(A, B, beta, B, g, r, Delta, ladder_g, ladder_r, n_max, exists, morse_nmax_bracket(A, B, beta))


def morse_energy(p: MorseParams, n: int) -> float:
    """``E_n = -r_n^2/2``."""
    bB = p.beta * p.B
    r_n = p.r - n * p.g - 0.5 * n * n * bB
    return -0.5 * r_n * r_n


def morse_spectrum(A: float, B: float, beta: float, *, strict: bool = False, flag_threshold: float = FLAG_THRESHOLD):
    """Morse ladder and the levels ``n = 0..n_max``."""
    p = morse_params(A, B, beta, strict=strict)
    levels = []
    for n in range(p.n_max + 1):
        E = morse_energy(p, n)
        if n < A:
            delta = morse_delta(A, B, n)
            E1 = -0.5 * (A - n) ** 2 * (1 - beta * delta)
        else:
            delta, E1 = math.nan, math.nan
        levels.append(Level(n, E, E1, delta, bool(beta * abs(delta) < flag_threshold)))
    report = SpectrumReport(
        "morse", tuple(levels), p.n_max, morse_existence_bound(A, B), {"A": A, "B": B, "beta": beta}
    )
    return p, report


@dataclass(frozen=True)
class MorseWavefunction:
    n: int
    x: np.ndarray
    psi: np.ndarray
    coefficients: np.ndarray
    exponents: np.ndarray
    orders: np.ndarray
    nu: float
    rho: float


def morse_coefficients(p: MorseParams, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expansion ``chi_n(z) ~ sum_j c_j z^{e_j} J_{nu_n + j}(z)``.

    Applies ``prod_j [(g_j + g_n)(z d/dz / 2 - j) + r_j - r_n]`` to
    ``z^{-g_n/(beta B)} J_{nu_n}(z)`` using
    ``z d/dz [z^e J_m] = (e + m) z^e J_m - z^{e+1} J_{m+1}``. Each factor is
    divided by ``(g_j + g_n)/2`` so the top coefficient is ``(-1)^n``.
    Exponent ``e_j = -g_{n-j}/(beta B)``.
    """
    bB = p.beta * p.B
    g_n = p.g + n * bB
    r_n = p.r - n * p.g - 0.5 * n * n * bB
    nu_n = math.sqrt(g_n * g_n + 4 * bB * r_n) / bB
    e0 = -g_n / bB
    c = np.zeros(n + 1)
    c[0] = 1.0
    for j in range(n):
        g_j = p.g + j * bB
        r_j = p.r - j * p.g - 0.5 * j * j * bB
        shift = 2 * (r_j - r_n) / (g_j + g_n) - 2 * j
        new = np.zeros_like(c)
        for k in range(j + 1):
            new[k] += c[k] * (e0 + nu_n + 2 * k + shift)
            new[k + 1] -= c[k]
        c = new
    k = np.arange(n + 1)
    return c, e0 + k, nu_n + k


def _morse_log_terms(p: MorseParams, n: int, x: np.ndarray):
    c, expo, orders = morse_coefficients(p, n)
    log_z = math.log(2.0 / math.sqrt(p.beta)) - 0.5 * x
    z = np.exp(log_z)
    if np.any(z > Z_MAX):
        raise RangeUnsupported(
            "samples reach too far into the exponential wall", x_min=float(x.min())
        )
    logs, signs = [], []
    for ck, ek, mk in zip(c, expo, orders):
        lj, sj = log_bessel_j(mk, z)
        logs.append(ek * log_z + lj + math.log(abs(ck)))
        signs.append(np.sign(ck) * sj)
    return np.array(logs), np.array(signs), (c, expo, orders)


def _morse_unscaled(p: MorseParams, n: int, x: np.ndarray, ref: float) -> np.ndarray:
    logs, signs, _ = _morse_log_terms(p, n, x)
    with np.errstate(under="ignore"):
        return np.sum(signs * np.exp(logs - ref), axis=0)


def _morse_window(p: MorseParams, n: int) -> tuple[float, float]:
    bB = p.beta * p.B
    left_rate = p.ladder_g[0] / (2 * bB) + 0.25
    right_rate = max(p.rho(n), 1e-3)
    # peak of the leading term sits near z ~ nu, i.e. x ~ -2 ln(nu sqrt(beta)/2)
    centre = -2.0 * math.log(max(p.nu(n) * math.sqrt(p.beta) / 2.0, 1e-300))
    x_lo = max(centre - 60.0 / left_rate - 2.0, -2.0 * math.log(Z_MAX * math.sqrt(p.beta) / 2.0) + 1e-9)
    x_hi = centre + 60.0 / right_rate + 5.0
    return x_lo, x_hi


def morse_wavefunction(p: MorseParams, n: int, x_samples, *, panels: int = 400) -> MorseWavefunction:
    """Normalized ``psi_n(x)`` from the Bessel expansion.

    Normalization uses composite Gauss-Legendre quadrature of ``|psi|^2 dx``.
    The sign is fixed so that ``psi`` is positive at its largest sample.
    """
    if not p.exists or n > p.n_max or n < 0:
        raise NotNormalizable("r_n <= 0: the level is not normalizable", n=n, n_max=p.n_max)
    x = np.atleast_1d(np.asarray(x_samples, dtype=float))
    x_lo, x_hi = _morse_window(p, n)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(x_lo, x_hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xq = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wq = (half[:, None] * weights[None, :]).ravel()
    logs_q, _, _ = _morse_log_terms(p, n, xq)
    ref = float(np.max(logs_q))
    psi_q = _morse_unscaled(p, n, xq, ref)
    norm = math.sqrt(float(np.sum(wq * psi_q * psi_q)))

    inside = np.exp(math.log(2.0 / math.sqrt(p.beta)) - 0.5 * x) <= Z_MAX
    psi = np.zeros_like(x)
    if np.any(inside):
        psi[inside] = _morse_unscaled(p, n, x[inside], ref) / norm
    if np.any(psi != 0):
        peak = np.argmax(np.abs(psi))
        if psi[peak] < 0:
            psi = -psi
    c, expo, orders = morse_coefficients(p, n)
    return MorseWavefunction(n, x, psi, c, expo, orders, p.nu(n), p.rho(n))
