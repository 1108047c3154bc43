"""Harmonic oscillator in a uniform field under the rotated quadratic algebra.

The Hamiltonian ``H = (P'^2 + X'^2)/2 - E (X' cos phi + P' sin phi)`` is
factorized as ``B+ B- + eps_0`` with ``B(+-) = (-+ i g P' + s X' + r -+ i nu)/sqrt 2``.
The shape-invariance ladder (g_i, s_i, r_i, nu_i, eps_i) gives the exact
spectrum. A truncated q-boson Fock space provides an independent matrix
realization of every ladder operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FactorizationDomain, OverflowRisk, ParameterRange, UnsupportedDegree

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class OscFieldInput:
    """Rotated algebra parameters, rotation angle and field strength."""

    alpha_p: float
    beta_p: float
    phi: float = 0.0
    field_E: float = 0.0

    def __post_init__(self):
        if not (self.alpha_p > 0 and self.beta_p > 0):
            raise ParameterRange("alpha' and beta' must be positive")
        if not self.alpha_p * self.beta_p < 1:
            raise ParameterRange("alpha' beta' must be < 1 for a finite q")

    def field_off(self) -> "OscFieldInput":
        return OscFieldInput(self.alpha_p, self.beta_p, self.phi, 0.0)


@dataclass(frozen=True)
class FactorizationInit:
    g: float
    s: float
    k: float
    r: float
    nu: float
    eps0: float
    source: OscFieldInput


@dataclass(frozen=True)
class FactorizationLadder:
    g: np.ndarray
    s: np.ndarray
    r: np.ndarray
    nu: np.ndarray
    eps: np.ndarray
    q: float
    t: float
    gamma_ratio: float
    k: float
    u: float
    K: float
    z: np.ndarray
    w: np.ndarray
    source: OscFieldInput = field(repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.g) - 1

    def t_step(self, i: int) -> float:
        """Ladder-step value ``t_i = t q^(-i)`` entering ``B-_i``."""
        return self.t * self.q ** (-i)


@dataclass(frozen=True)
class EnergyLevel:
    n: int
    E: float
    E_field_off: float
    dE1: float
    dE2: float


@dataclass(frozen=True)
class QFockMatrices:
    dim: int
    q: float
    b_matrix: np.ndarray
    b_dag_matrix: np.ndarray
    B_minus: list
    B_plus: list


@dataclass(frozen=True)
class PolynomialInput:
    xi: complex
    q: float
    t: float
    z: float
    w: float


def factorize(inp: OscFieldInput) -> FactorizationInit:
    """Initial factorization parameters ``(g, s, k, r, nu, eps_0)``.

    ``k`` is the positive root of ``k^2 - (beta' - alpha') k - 1 = 0``, the
    condition that removes the cross term between ``X'^2`` and ``P'^2``.
    """
    half_diff = 0.5 * (inp.beta_p - inp.alpha_p)
    k = half_diff + math.sqrt(1.0 + half_diff**2)
    if inp.alpha_p * k >= 1.0:
        raise FactorizationDomain("alpha' k must be < 1", alpha_k=inp.alpha_p * k)
    s = 1.0 / math.sqrt(1.0 - inp.alpha_p * k)
    g = s * k
    r = -inp.field_E * math.cos(inp.phi) / s
    nu = -inp.field_E * math.sin(inp.phi) / g
    eps0 = 0.5 * (g * s - r * r - nu * nu)
    return FactorizationInit(g, s, k, r, nu, eps0, inp)


def si_ladder(init: FactorizationInit, n_levels: int) -> FactorizationLadder:
    """Shape-invariance ladder for ``i = 0..n_levels``."""
    if n_levels < 0:
        raise ParameterRange("n_levels must be >= 0")
    ap, bp = init.source.alpha_p, init.source.beta_p
    root = math.sqrt(ap * bp)
    q = (1.0 + root) / (1.0 - root)
    gamma = math.sqrt(bp / ap)
    g, s, r, nu = init.g, init.s, init.r, init.nu
    u = g + gamma * s
    t = (g - gamma * s) / u
    K = u * math.sqrt((q + 1.0) / (4.0 * gamma))

    i = np.arange(n_levels + 1, dtype=float)
    qh = q ** (i / 2)
    tq = t * q ** (-i)
    g_i = g * qh * (1 + tq) / (1 + t)
    s_i = s * qh * (1 - tq) / (1 - t)
    r_i = r / qh * (1 - t) / (1 - tq)
    nu_i = nu / qh * (1 + t) / (1 + tq)

    eps = np.empty(n_levels + 1)
    eps[0] = init.eps0
    eps[1:] = 0.5 * (
        g_i[:-1] * s_i[:-1]
        + g_i[1:] * s_i[1:]
        + r_i[:-1] ** 2
        - r_i[1:] ** 2
        + nu_i[:-1] ** 2
        - nu_i[1:] ** 2
    )
    z = -r_i / (K * qh)
    w = -nu_i / (K * qh)
    return FactorizationLadder(
        g_i, s_i, r_i, nu_i, eps, q, t, gamma, init.k, u, K, z, w, init.source
    )


def _ascending_sum(values: np.ndarray) -> float:
    total = 0.0
    for v in values:
        total += float(v)
    return total


def energy_spectrum(ladder: FactorizationLadder, n: int) -> EnergyLevel:
    """``E_n`` as a sum of factorization energies and its field decomposition.

    The field-free part is obtained by rerunning the ladder at zero field so
    that ``E_n = E_n(0) + dE1 + dE2`` is a genuine cross-check.
    """
    if not 0 <= n <= ladder.n_levels:
        raise ParameterRange(f"ladder holds levels 0..{ladder.n_levels}", n=n)
    E = _ascending_sum(ladder.eps[: n + 1])
    free = si_ladder(factorize(ladder.source.field_off()), n)
    E0 = _ascending_sum(free.eps[: n + 1])
    scale = 0.5 * ladder.K**2 * ladder.q**n
    dE1 = -scale * ladder.z[n] ** 2
    dE2 = -scale * ladder.w[n] ** 2
    return EnergyLevel(n, E, E0, dE1, dE2)


def field_corrections_closed_form(ladder: FactorizationLadder, n: int) -> tuple[float, float]:
    """Field corrections written through ``gamma``, ``u`` and ``t``."""
    src = ladder.source
    qn = ladder.q ** (-n)
    tq = ladder.t * qn
    E2 = src.field_E**2
    dE1 = -2 * ladder.gamma_ratio**2 * E2 * math.cos(src.phi) ** 2 / ladder.u**2 * qn / (1 - tq) ** 2
    dE2 = -2 * E2 * math.sin(src.phi) ** 2 / ladder.u**2 * qn / (1 + tq) ** 2
    return dE1, dE2


def q_integers(q: float, n: np.ndarray) -> np.ndarray:
    """``[n]_q = (q^n - 1)/(q - 1)``, equal to ``n`` at ``q = 1``."""
    n = np.asarray(n, dtype=float)
    if q == 1.0:
        return n
    return np.expm1(n * math.log(q)) / (q - 1.0)


def build_qfock(ladder: FactorizationLadder, dim: int = 60) -> QFockMatrices:
    """Truncated q-boson matrices and the ladder operators ``B-_i``, ``B+_i``.

    ``b|n> = sqrt([n]_q)|n-1>``. ``B-_i = K q^(i/2) (b - t_i b+ - z_i - i w_i)/sqrt 2``
    with ``t_i = t q^(-i)``; ``B+_i`` is its conjugate transpose.
    """
    if dim < 2:
        raise ParameterRange("dim must be >= 2", dim=dim)
    q = ladder.q
    if q < 1.0:
        raise ParameterRange("q must be >= 1", q=q)
    if dim * math.log(q) + 2 * math.log(ladder.K + 1.0) >= 0.5 * _LOG_FLOAT_MAX:
        raise OverflowRisk(
            "q^dim approaches the floating-point range; reduce dim", q=q, dim=dim
        )
    b = np.diag(np.sqrt(q_integers(q, np.arange(1, dim))), 1).astype(complex)
    bd = b.conj().T
    eye = np.eye(dim)
    B_minus, B_plus = [], []
    for i in range(ladder.n_levels + 1):
        pref = ladder.K * q ** (i / 2) / math.sqrt(2.0)
        shift = ladder.z[i] + 1j * ladder.w[i]
        Bm = pref * (b - ladder.t_step(i) * bd - shift * eye)
        B_minus.append(Bm)
        B_plus.append(Bm.conj().T)
    return QFockMatrices(dim, q, b, bd, B_minus, B_plus)


def q_commutator_residual(mats: QFockMatrices, block: int | None = None) -> float:
    """Max-norm of ``b b+ - q b+ b - 1`` on the leading principal block."""
    block = mats.dim - 1 if block is None else block
    b, bd = mats.b_matrix, mats.b_dag_matrix
    c = b @ bd - mats.q * (bd @ b) - np.eye(mats.dim)
    return float(np.abs(c[:block, :block]).max())


def qfock_hamiltonian(mats: QFockMatrices, ladder: FactorizationLadder, i: int = 0) -> np.ndarray:
    """``H_i = B+_i B-_i + sum_{j<=i} eps_j`` as a dense Hermitian matrix."""
    shift = _ascending_sum(ladder.eps[: i + 1])
    return mats.B_plus[i] @ mats.B_minus[i] + shift * np.eye(mats.dim)


def qfock_spectrum(
    mats: QFockMatrices, ladder: FactorizationLadder, k: int, *, vectors: bool = False
):
    """Lowest ``k`` eigenvalues (and optionally eigenvectors) of ``H_0``."""
    H = qfock_hamiltonian(mats, ladder, 0)
    if vectors:
        vals, vecs = np.linalg.eigh(H)
        return vals[:k], vecs[:, :k]
    return np.linalg.eigvalsh(H)[:k]


def verify_si_matrix(
    mats: QFockMatrices, ladder: FactorizationLadder, i: int, block: int
) -> float:
    """Max-norm of ``B-_i B+_i - B+_{i+1} B-_{i+1} - eps_{i+1}`` on a leading block."""
    if block > mats.dim - 2:
        raise ParameterRange("block must be <= dim - 2", block=block, dim=mats.dim)
    if i + 1 > ladder.n_levels:
        raise ParameterRange("ladder too short for step i+1", i=i)
    lhs = mats.B_minus[i] @ mats.B_plus[i]
    rhs = mats.B_plus[i + 1] @ mats.B_minus[i + 1] + ladder.eps[i + 1] * np.eye(mats.dim)
    return float(np.abs((lhs - rhs)[:block, :block]).max())


def polynomial_coefficients(n: int, q: float, t: float, z: float, w: float) -> list[complex]:
    """Coefficients ``[c_0, c_1, ..., c_n]`` of the Bargmann polynomial ``P_n``.

    ``psi_n ~ P_n(xi) psi_0(q, t_n, z_n, w_n; xi)`` where ``xi`` stands for ``b+``.
    Only degrees 1 and 2 have closed forms.
    """
    if n not in (1, 2):
        raise UnsupportedDegree("only degrees 1 and 2 are available in closed form", n=n)
    qi = 1.0 / q
    if n == 1:
        lead = 1 - t * t * qi
        return [lead * (-z / (1 - t * qi) + 1j * w / (1 + t * qi)), lead]
    q2 = qi * qi
    lead = 1 - t * t * qi
    outer = 1 - t * t * qi**3
    bracket_q = 1 + q
    linear = -bracket_q * lead * (z * qi / (1 - t * q2) - 1j * w * qi / (1 + t * q2))
    const = (
        -t
        + (1 - t) * (1 + t * qi) * z * z * qi / (1 - t * q2) ** 2
        - (1 + t) * (1 - t * qi) * w * w * qi / (1 + t * q2) ** 2
        - 2j * lead * z * w * qi / ((1 - t * q2) * (1 + t * q2))
    )
    return [outer * const, outer * linear, outer * lead]


def polynomial_P(n: int, inp: PolynomialInput) -> complex:
    """Evaluate ``P_n(q, t, z, w; xi)`` for ``n`` in {1, 2}."""
    coeffs = polynomial_coefficients(n, inp.q, inp.t, inp.z, inp.w)
    xi = complex(inp.xi)
    value = 0j
    for c in reversed(coeffs):
        value = value * xi + c
    return value


def bargmann_ground_state(mats: QFockMatrices, t: float, shift: complex) -> np.ndarray:
    """Fock coefficients of the zero mode of ``b - t b+ - shift``.

    Built by forward recursion ``sqrt([n+1]) c_{n+1} = t sqrt([n]) c_{n-1} + shift c_n``;
    all entries are exact except for truncation at the last index.
    """
    d = mats.dim
    qn = q_integers(mats.q, np.arange(d))
    c = np.zeros(d, dtype=complex)
    c[0] = 1.0
    for n in range(d - 1):
        prev = t * math.sqrt(qn[n]) * c[n - 1] if n > 0 else 0.0
        c[n + 1] = (prev + shift * c[n]) / math.sqrt(qn[n + 1])
    return c / np.linalg.norm(c)


def polynomial_matrix(n: int, mats: QFockMatrices, ladder: FactorizationLadder) -> np.ndarray:
    """``P_n(b+)`` for the ladder's base parameters ``(q, t, z_0, w_0)``."""
    coeffs = polynomial_coefficients(n, ladder.q, ladder.t, ladder.z[0], ladder.w[0])
    out = np.zeros((mats.dim, mats.dim), dtype=complex)
    power = np.eye(mats.dim, dtype=complex)
    for c in coeffs:
        out += c * power
        power = mats.b_dag_matrix @ power
    return out
