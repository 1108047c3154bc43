"""Function-deformed commutator ``[f(X), P] = i[f'(X) + beta P^2]`` on grids.

Families with ``f' = a f^2 + b f + c`` admit a first-order quasiposition
representation ``X ~ x``, ``P ~ p + beta A(x, p)`` with
``A = {lambda, p}/2 + {mu, p^3}/2``, ``mu = 1/(3 f')`` and
``lambda = a + (b^2 - 4ac) mu``. Operators are discretized by central
differences on a uniform grid with Dirichlet truncation. Symmetrized
products keep every matrix exactly (anti)symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sps

from .errors import DomainViolation, InsufficientBoundaryData, ParameterRange

Fn = Callable[[np.ndarray], np.ndarray]

# central stencils as {offset: weight}, in units of h^-k
_STENCILS = {
    (1, 2): {-1: -0.5, 1: 0.5},
    (1, 4): {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12},
    (2, 2): {-1: 1.0, 0: -2.0, 1: 1.0},
    (2, 4): {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12},
    (3, 2): {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    (3, 4): {-3: 1 / 8, -2: -1.0, -1: 13 / 8, 1: -13 / 8, 2: 1.0, 3: -1 / 8},
}


def _sech(x):
    ax = np.abs(x)
    e = np.exp(-2.0 * ax)
    return 2.0 * np.exp(-ax) / (1.0 + e)


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class DeformedFunctionFamily:
    """A deforming function ``f`` with its Riccati coefficients ``(a, b, c)``.

    ``derivs`` holds ``f', f'', f'''`` as callables. ``window`` is the
    default sampling interval (used for grids and residual checks), which
    lies inside the open ``domain``.
    """

    name: str
    f: Fn
    derivs: tuple[Fn, Fn, Fn]
    a: float
    b: float
    c: float
    domain: tuple[float, float]
    window: tuple[float, float]

    def f_prime(self, x):
        return self.derivs[0](x)

    def f_second(self, x):
        return self.derivs[1](x)

    def f_third(self, x):
        return self.derivs[2](x)

    def with_coefficients(self, a: float, b: float, c: float, name: str | None = None):
        """Same ``f`` with different Riccati coefficients (for custom families)."""
        return replace(self, a=a, b=b, c=c, name=name or f"{self.name}-custom")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        return bool(np.all((x > lo) & (x < hi)))


def _kempf() -> DeformedFunctionFamily:
    return DeformedFunctionFamily(
        "kempf",
        lambda x: np.asarray(x, dtype=float),
        (np.ones_like, np.zeros_like, np.zeros_like),
        0.0, 0.0, 1.0,
        (-math.inf, math.inf),
        (-10.0, 10.0),
    )


def _morse_exp() -> DeformedFunctionFamily:
    return DeformedFunctionFamily(
        "morse-exp",
        lambda x: -np.exp(-x),
        (lambda x: np.exp(-x), lambda x: -np.exp(-x), lambda x: np.exp(-x)),
        0.0, -1.0, 0.0,
        (-math.inf, math.inf),
        (-5.0, 5.0),
    )


def _pt_tanh() -> DeformedFunctionFamily:
    def d1(x):
        return _sech(x) ** 2

    def d2(x):
        return -2.0 * np.tanh(x) * _sech(x) ** 2

    def d3(x):
        s2 = _sech(x) ** 2
        return 4.0 * np.tanh(x) ** 2 * s2 - 2.0 * s2 * s2

    return DeformedFunctionFamily(
        "pt-tanh", np.tanh, (d1, d2, d3), -1.0, 0.0, 1.0,
        (-math.inf, math.inf), (-5.0, 5.0),
    )


def _pt_tan() -> DeformedFunctionFamily:
    def d1(x):
        return 1.0 / np.cos(x) ** 2

    def d2(x):
        return 2.0 * np.tan(x) / np.cos(x) ** 2

    def d3(x):
        sec2 = 1.0 / np.cos(x) ** 2
        return 2.0 * sec2 * sec2 + 4.0 * np.tan(x) ** 2 * sec2

    edge = math.pi / 2 - 0.05
    return DeformedFunctionFamily(
        "pt-tan", np.tan, (d1, d2, d3), 1.0, 0.0, 1.0,
        (-math.pi / 2, math.pi / 2), (-edge, edge),
    )


FAMILIES: dict[str, Callable[[], DeformedFunctionFamily]] = {
    "kempf": _kempf,
    "morse-exp": _morse_exp,
    "pt-tanh": _pt_tanh,
    "pt-tan": _pt_tan,
}


def get_family(name: str) -> DeformedFunctionFamily:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise DomainViolation(f"unknown family {name!r}", known=sorted(FAMILIES)) from None


@dataclass(frozen=True)
class RepresentationCoefficients:
    """``mu(x)`` and ``lambda(x)`` of the first-order representation."""

    family: DeformedFunctionFamily
    beta: float

    def mu(self, x):
        return 1.0 / (3.0 * self.family.f_prime(x))

    def mu_prime(self, x):
        fp = self.family.f_prime(x)
        return -self.family.f_second(x) / (3.0 * fp * fp)

    def mu_second(self, x):
        fam = self.family
        fp, f2, f3 = fam.f_prime(x), fam.f_second(x), fam.f_third(x)
        return (2.0 * f2 * f2 - fp * f3) / (3.0 * fp**3)

    def lam(self, x):
        fam = self.family
        return fam.a + (fam.b**2 - 4.0 * fam.a * fam.c) * self.mu(x)

    def lam_general(self, x):
        """``lambda`` from ``f'`` and its derivatives, valid for any ``f``."""
        fam = self.family
        fp, f2, f3 = fam.f_prime(x), fam.f_second(x), fam.f_third(x)
        return (-f3 / fp + 3.0 * f2 * f2 / (fp * fp)) / (6.0 * fp)


def representation_coefficients(fam: DeformedFunctionFamily, beta: float) -> RepresentationCoefficients:
    return RepresentationCoefficients(fam, beta)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``x_j = x_lo + j h``, ``j = 0..n_points-1``."""

    x_lo: float
    x_hi: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 16:
            raise ParameterRange("n_points must be >= 16", n_points=self.n_points)
        if not self.x_hi > self.x_lo:
            raise ParameterRange("x_hi must exceed x_lo")

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_points)

    def refined(self) -> "GridSpec":
        """Same interval with the spacing halved."""
        return GridSpec(self.x_lo, self.x_hi, 2 * self.n_points - 1)


@dataclass(frozen=True)
class GridOperator:
    """Real banded matrix ``M`` representing the operator ``phase * M``.

    ``phase`` is 1 for Hermitian operators stored as real symmetric matrices
    and ``-1j`` for momentum-like operators stored as real antisymmetric
    matrices.
    """

    grid: GridSpec
    matrix: sps.csr_matrix
    phase: complex = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def symmetry(self) -> int:
        return 1 if self.phase == 1.0 else -1

    @property
    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0
        return int(np.abs(coo.row - coo.col).max())

    def is_exactly_symmetric(self) -> bool:
        diff = self.matrix - self.symmetry * self.matrix.T
        return diff.count_nonzero() == 0

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply the full (possibly complex) operator to a vector."""
        out = self.matrix @ v
        return out if self.phase == 1.0 else self.phase * out

    def to_banded(self) -> np.ndarray:
        """Upper banded storage (LAPACK ``ab``) of a symmetric matrix."""
        if self.symmetry != 1:
            raise ParameterRange("banded storage is for symmetric operators")
        kd = self.bandwidth
        n = self.matrix.shape[0]
        ab = np.zeros((kd + 1, n))
        for d in range(kd + 1):
            ab[kd - d, d:] = self.matrix.diagonal(d)
        return ab


def stencil_matrix(order_k: int, n: int, h: float, accuracy: int = 2) -> sps.csr_matrix:
    """Central ``k``-th difference matrix (k = 1, 2, 3) with Dirichlet truncation."""
    try:
        weights = _STENCILS[(order_k, accuracy)]
    except KeyError:
        raise ParameterRange("unsupported stencil", derivative=order_k, accuracy=accuracy) from None
    offsets = sorted(weights)
    diags = [np.full(n - abs(o), weights[o]) for o in offsets]
    return sps.diags(diags, offsets, shape=(n, n), format="csr") / h**order_k


def symmetrize(mat: sps.spmatrix, sign: int = 1) -> sps.csr_matrix:
    """Exact (anti)symmetric part, so transpose equality holds bit for bit."""
    mat = sps.csr_matrix(mat)
    out = 0.5 * (mat + sign * mat.T)
    out = sps.csr_matrix(out)
    out.eliminate_zeros()
    return out


def anticommutator(g: np.ndarray, D: sps.spmatrix) -> sps.csr_matrix:
    """``(G D + D G)/2`` with ``G = diag(g)``."""
    G = sps.diags(g)
    return sps.csr_matrix(0.5 * (G @ D + D @ G))


def momentum_matrix(grid: GridSpec, accuracy: int = 2) -> GridOperator:
    """Plain ``p = -i d/dx`` stored as its real antisymmetric factor."""
    D1 = stencil_matrix(1, grid.n_points, grid.h, accuracy)
    return GridOperator(grid, symmetrize(D1, -1), -1j, {"operator": "p", "accuracy": accuracy})


def p_squared_matrix(grid: GridSpec, accuracy: int = 2) -> sps.csr_matrix:
    """``p^2 = -d^2/dx^2`` as a positive symmetric matrix."""
    return symmetrize(-stencil_matrix(2, grid.n_points, grid.h, accuracy))


def _check_grid(fam: DeformedFunctionFamily, grid: GridSpec) -> np.ndarray:
    x = grid.x
    if not fam.contains(x):
        raise DomainViolation(
            f"grid [{grid.x_lo}, {grid.x_hi}] leaves the {fam.name} domain {fam.domain}"
        )
    fp = fam.f_prime(x)
    if np.any(~(fp > 0)):
        raise DomainViolation(f"f' must be positive on the grid for {fam.name}")
    return x


def first_order_momentum(
    fam: DeformedFunctionFamily, beta: float, grid: GridSpec, accuracy: int = 2
) -> GridOperator:
    """``P ~ p + (beta/2){lambda, p} + (beta/2){mu, p^3}`` as ``-i M``.

    With ``p = -i D1`` and ``p^3 = i D3``,
    ``M = D1 + (beta/2)(L D1 + D1 L) - (beta/2)(U D3 + D3 U)`` is real antisymmetric.
    """
    if beta < 0:
        raise ParameterRange("beta must be >= 0", beta=beta)
    x = _check_grid(fam, grid)
    coeffs = RepresentationCoefficients(fam, beta)
    n, h = grid.n_points, grid.h
    D1 = stencil_matrix(1, n, h, accuracy)
    M = D1
    if beta > 0:
        D3 = stencil_matrix(3, n, h, accuracy)
        M = D1 + beta * anticommutator(coeffs.lam(x), D1) - beta * anticommutator(coeffs.mu(x), D3)
    meta = {"operator": "first-order P", "family": fam.name, "beta": beta, "accuracy": accuracy}
    return GridOperator(grid, symmetrize(M, -1), -1j, meta)


def exact_morse_rep(beta: float, grid: GridSpec, accuracy: int = 2) -> tuple[GridOperator, GridOperator]:
    """Exact pair ``f(X) = -e^{-X} = -e^{-x} + beta p^2`` and ``P = p``."""
    x = grid.x
    fX = sps.diags(-np.exp(-x)) + beta * p_squared_matrix(grid, accuracy)
    f_op = GridOperator(grid, symmetrize(fX), 1.0, {"operator": "f(X)", "beta": beta})
    return f_op, momentum_matrix(grid, accuracy)


def default_test_functions(grid: GridSpec) -> np.ndarray:
    """Smooth bumps well inside the grid, one per column."""
    x = grid.x
    length = grid.x_hi - grid.x_lo
    centre = 0.5 * (grid.x_hi + grid.x_lo)
    width = length / 12.0
    cols = [
        np.exp(-(((x - centre) / width) ** 2)),
        np.exp(-(((x - centre - 0.1 * length) / width) ** 2)),
    ]
    return np.column_stack(cols)


def commutator_residual(
    fam: DeformedFunctionFamily,
    beta: float,
    P_op: GridOperator,
    trim: int | None = None,
    *,
    f_op: GridOperator | None = None,
    test_functions: np.ndarray | None = None,
) -> float:
    """Defect of ``[f(X), P] = i(f'(X) + beta P^2)`` on smooth test functions.

    For ``P = -i M`` the defect is ``-i R`` with ``R = [F, M] + F' - beta M^2``.
    ``R`` is applied to each test function and the max-norm is taken over
    interior rows ``trim..N-1-trim``. ``f_op`` replaces ``diag f(x)`` (used by
    the exact Morse representation, where ``f'(X) = -f(X)``).
    """
    grid = P_op.grid
    if P_op.phase != -1j:
        raise ParameterRange("P_op must be momentum-like (stored as -i M)")
    M = P_op.matrix
    kd = P_op.bandwidth
    trim = 2 * kd if trim is None else trim
    if trim < kd:
        raise ParameterRange("trim must cover the stencil radius", trim=trim, radius=kd)
    x = grid.x
    if f_op is None:
        F = sps.diags(fam.f(x))
        Fp = sps.diags(fam.f_prime(x))
    else:
        F = f_op.matrix
        if fam.name != "morse-exp":
            raise ParameterRange("explicit f_op is only defined for the morse-exp family")
        Fp = -F
    phi = default_test_functions(grid) if test_functions is None else np.atleast_2d(test_functions.T).T
    worst = 0.0
    for col in phi.T:
        Mphi = M @ col
        R = F @ Mphi - M @ (F @ col) + Fp @ col - beta * (M @ Mphi)
        worst = max(worst, float(np.abs(R[trim : grid.n_points - trim]).max()))
    return worst


def commutator_residual_matrix(F: np.ndarray, Fp: np.ndarray, M: np.ndarray, beta: float, trim: int) -> float:
    """Entrywise max-norm of ``[F, M] + F' - beta M^2`` on the trimmed block.

    Kept for diagnostics: entries scale like ``1/h^2`` for the first-order
    representation, so this norm does not shrink under refinement.
    """
    R = F @ M - M @ F + Fp - beta * (M @ M)
    n = R.shape[0]
    return float(np.abs(R[trim : n - trim, trim : n - trim]).max())


def riccati_residual(
    fam: DeformedFunctionFamily, samples: int = 1000, window: tuple[float, float] | None = None
) -> float:
    """Max ``|f' - (a f^2 + b f + c)|`` on equispaced points of the window."""
    if samples < 2:
        raise ParameterRange("samples must be >= 2")
    lo, hi = window or fam.window
    x = np.linspace(lo, hi, samples)
    f = fam.f(x)
    return float(np.abs(fam.f_prime(x) - (fam.a * f * f + fam.b * f + fam.c)).max())


def minimal_uncertainty_profile(fam: DeformedFunctionFamily, beta: float, mean_x_list) -> np.ndarray:
    """``Delta X_0(<X>) = sqrt(beta / f'(<X>))``."""
    mx = np.atleast_1d(np.asarray(mean_x_list, dtype=float))
    if not fam.contains(mx):
        raise DomainViolation("<X> outside the family domain")
    fp = fam.f_prime(mx)
    if np.any(~(fp > 0)):
        raise DomainViolation("f' must be positive at every <X>")
    return np.sqrt(beta / fp)


@dataclass(frozen=True)
class HermiticityReport:
    passed: bool
    c1_passed: bool
    c2_passed: bool
    c1_tails: dict
    c2_tails: dict


def _tail_ok(values: np.ndarray, threshold: float) -> bool:
    # values ordered towards the boundary; magnitudes below the floor count as zero
    mags = np.abs(values)
    mags = np.where(mags < 1e-10 * threshold, 0.0, mags)
    return bool(np.all(mags < threshold) and np.all(np.diff(mags) <= 1e-12 * mags[:-1]))


def hermiticity_conditions(
    fam: DeformedFunctionFamily,
    x: np.ndarray,
    psi: np.ndarray,
    dpsi: np.ndarray,
    d2psi: np.ndarray,
    *,
    threshold: float = 1e-6,
    tail: int = 5,
) -> HermiticityReport:
    """Boundary conditions under which the first-order ``P`` stays Hermitian.

    (C1) ``lambda |psi|^2 -> 0`` and
    (C2) ``2 mu'' |psi|^2 + mu' (psi* psi' + c.c.) + 2 mu (psi* psi'' - |psi'|^2 + c.c.) -> 0``
    at both ends of the sample. Each condition passes when its last ``tail``
    values towards a boundary decrease monotonically and stay below
    ``threshold``.
    """
    x = np.asarray(x, dtype=float)
    arrays = [np.asarray(a) for a in (psi, dpsi, d2psi)]
    if any(a.shape != x.shape for a in arrays):
        raise InsufficientBoundaryData("psi and its derivatives must match the sample points")
    if x.size < 2 * tail:
        raise InsufficientBoundaryData(
            f"need at least {tail} samples near each boundary", samples=int(x.size)
        )
    order = np.argsort(x)
    x = x[order]
    psi, dpsi, d2psi = (a[order] for a in arrays)
    coeffs = RepresentationCoefficients(fam, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        rho = np.abs(psi) ** 2
        cross = 2.0 * np.real(np.conj(psi) * dpsi)
        curv = 2.0 * np.real(np.conj(psi) * d2psi) - 2.0 * np.abs(dpsi) ** 2
        c1 = coeffs.lam(x) * rho
        c2 = 2.0 * coeffs.mu_second(x) * rho + coeffs.mu_prime(x) * cross + 2.0 * coeffs.mu(x) * curv
    c1 = np.nan_to_num(c1, nan=np.inf)
    c2 = np.nan_to_num(c2, nan=np.inf)
    tails1 = {"left": c1[:tail][::-1], "right": c1[-tail:]}
    tails2 = {"left": c2[:tail][::-1], "right": c2[-tail:]}
    ok1 = all(_tail_ok(v, threshold) for v in tails1.values())
    ok2 = all(_tail_ok(v, threshold) for v in tails2.values())
    return HermiticityReport(ok1 and ok2, ok1, ok2, tails1, tails2)
