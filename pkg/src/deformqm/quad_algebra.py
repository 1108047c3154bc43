"""General quadratic deformation of the canonical commutator.

The relation ``[X, P] = i(1 + alpha X^2 + beta P^2 + kappa XP + kappa* PX)`` is
reduced to Kempf form in two steps: a rescaling that removes the imaginary part
of ``kappa`` and a rotation in the (X, P) plane that removes the real part.
The reduced form fixes the minimal position and momentum uncertainties.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import (
    DegenerateRescale,
    NoRealRoot,
    NotAdmissible,
    ParameterRange,
    SmallParameterWarning,
)

SMALL_PARAMETER_WARN = 0.1


@dataclass(frozen=True)
class QuadraticAlgebraParams:
    """Deformation parameters ``(alpha, beta, kappa = kappa_re + i kappa_im)``.

    ``operator_scale`` is the factor relating rescaled operators to the
    original ones (``X_tilde = operator_scale * X``); it is 1 for parameters
    that were never rescaled.
    """

    alpha: float
    beta: float
    kappa_re: float = 0.0
    kappa_im: float = 0.0
    operator_scale: float = field(default=1.0, compare=False)

    def __post_init__(self):
        if not 1.0 + self.kappa_im > 0.0:
            raise DegenerateRescale("1 + Im(kappa) must be positive", kappa_im=self.kappa_im)
        values = {"alpha": self.alpha, "beta": self.beta}
        values["kappa"] = math.hypot(self.kappa_re, self.kappa_im)
        for name, v in values.items():
            if not math.isfinite(v) or abs(v) >= 1.0:
                raise ParameterRange(f"|{name}| must be < 1", field=name, value=v)
            if abs(v) > SMALL_PARAMETER_WARN:
                warnings.warn(
                    f"|{name}| = {abs(v):g} exceeds {SMALL_PARAMETER_WARN}; "
                    "deformation is no longer small",
                    SmallParameterWarning,
                    stacklevel=3,
                )

    @property
    def kappa(self) -> complex:
        return complex(self.kappa_re, self.kappa_im)

    @property
    def is_real(self) -> bool:
        return self.kappa_im == 0.0


@dataclass(frozen=True)
class RotationResult:
    phi: float
    alpha_p: float
    beta_p: float
    kappa_p: float
    delta: float
    sigma: int


@dataclass(frozen=True)
class ExpectationContext:
    """Expectation values of X and P in the state under consideration."""

    mean_x: float = 0.0
    mean_p: float = 0.0

    def gamma_exp(self, p: QuadraticAlgebraParams) -> float:
        """``alpha <X>^2 + beta <P>^2 + 2 kappa_re <X><P>``."""
        return (
            p.alpha * self.mean_x**2
            + p.beta * self.mean_p**2
            + 2.0 * p.kappa_re * self.mean_x * self.mean_p
        )


@dataclass(frozen=True)
class MinimalUncertainties:
    dx_min: float
    dp_min: float
    dx0: float
    dp0: float
    gamma_exp: float


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violations: tuple[str, ...]
    kappa_bound: float

    def __bool__(self) -> bool:
        return self.admissible


@dataclass(frozen=True)
class UncertaintyBound:
    """Equality case of the uncertainty relation solved for Delta X.

    ``dx`` is the smaller root when one exists, otherwise the vertex of the
    quadratic, in which case ``in_gap`` is set.
    """

    dx: float
    dx_lower: float
    dx_upper: float
    vertex: float
    discriminant: float
    in_gap: bool


def normalize_complex_kappa(p: QuadraticAlgebraParams) -> QuadraticAlgebraParams:
    """Absorb ``Im kappa`` into a rescaling of the operators.

    Returns real-kappa parameters ``(alpha, beta, kappa_re) / (1 + kappa_im)``
    with ``operator_scale = sqrt(1 + kappa_im)``.
    """
    scale2 = 1.0 + p.kappa_im
    if scale2 <= 0.0:
        raise DegenerateRescale("1 + Im(kappa) must be positive", kappa_im=p.kappa_im)
    if p.kappa_im == 0.0:
        return p
    return QuadraticAlgebraParams(
        p.alpha / scale2,
        p.beta / scale2,
        p.kappa_re / scale2,
        0.0,
        operator_scale=p.operator_scale * math.sqrt(scale2),
    )


def rotate_to_canonical(alpha: float, beta: float, kappa: float) -> RotationResult:
    """Rotate ``(X, P)`` so the symmetrized ``XP + PX`` term disappears."""
    if kappa == 0.0 and alpha != beta:
        return RotationResult(0.0, alpha, beta, 0.0, abs(alpha - beta), 1 if alpha > beta else -1)
    if alpha != beta:
        diff = alpha - beta
        delta = math.hypot(diff, 2.0 * kappa)
        sigma = 1 if diff > 0 else -1
        cos2 = abs(diff) / delta
        sin2 = -2.0 * sigma * kappa / delta
        phi = 0.5 * math.atan2(sin2, cos2)
    else:
        delta = 2.0 * abs(kappa)
        sigma = 1
        cos2, sin2 = 0.0, 1.0
        phi = math.pi / 4
    half_sum = 0.5 * (alpha + beta)
    half_diff = 0.5 * (alpha - beta)
    alpha_p = half_sum + half_diff * cos2 - kappa * sin2
    beta_p = half_sum - half_diff * cos2 + kappa * sin2
    kappa_p = half_diff * sin2 + kappa * cos2
    return RotationResult(phi, alpha_p, beta_p, kappa_p, delta, sigma)


def kempf_admissible(alpha: float, beta: float, kappa: float) -> AdmissibilityReport:
    """Check ``alpha > 0``, ``beta > 0`` and ``|kappa| < sqrt(alpha beta)``."""
    violations = []
    if not alpha > 0:
        violations.append("alpha > 0")
    if not beta > 0:
        violations.append("beta > 0")
    bound = math.sqrt(alpha * beta) if alpha * beta > 0 else 0.0
    if not abs(kappa) < bound:
        violations.append("kappa bound")
    return AdmissibilityReport(not violations, tuple(violations), bound)


def _effective_coupling(p: QuadraticAlgebraParams) -> float:
    # (1 + |kappa|) for real kappa; (1 + kappa_2 + |kappa_1|) after undoing the rescaling
    return 1.0 + p.kappa_im + abs(p.kappa_re)


def _require_admissible(p: QuadraticAlgebraParams) -> None:
    if 1.0 + p.kappa_im <= 0.0:
        raise DegenerateRescale("1 + Im(kappa) must be positive", kappa_im=p.kappa_im)
    report = kempf_admissible(p.alpha, p.beta, p.kappa_re)
    if not report:
        raise NotAdmissible(
            "parameters are not reducible to Kempf form: " + ", ".join(report.violations),
            violations=list(report.violations),
        )


def minimal_uncertainties(
    p: QuadraticAlgebraParams, ctx: ExpectationContext | None = None
) -> MinimalUncertainties:
    """Smallest Delta X and Delta P allowed by the deformed relation.

    Complex kappa is handled through the rescaled algebra, so the
    denominator is ``(1 + kappa_im + |kappa_re|)^2 - alpha beta``.
    """
    _require_admissible(p)
    ctx = ctx or ExpectationContext()
    gamma = ctx.gamma_exp(p)
    denom = _effective_coupling(p) ** 2 - p.alpha * p.beta
    dx0 = math.sqrt(p.beta / denom)
    dp0 = math.sqrt(p.alpha / denom)
    factor = math.sqrt(1.0 + gamma)
    return MinimalUncertainties(dx0 * factor, dp0 * factor, dx0, dp0, gamma)


def uncertainty_lower_bound(
    p: QuadraticAlgebraParams,
    ctx: ExpectationContext | None,
    dP: float,
    *,
    strict: bool = False,
) -> UncertaintyBound:
    """Boundary of the allowed region in the (Delta X, Delta P) plane.

    Solves ``alpha dX^2 - 2 m dP dX + (1 + gamma + beta dP^2) = 0`` with
    ``m = 1 + |kappa|`` (or its complex-kappa analogue). When ``dP`` lies
    in the gap below ``dp_min`` there is no real root; the vertex is
    reported instead, or ``NoRealRoot`` is raised if ``strict``.
    """
    _require_admissible(p)
    if not dP > 0:
        raise ParameterRange("dP must be positive", value=dP)
    ctx = ctx or ExpectationContext()
    gamma = ctx.gamma_exp(p)
    m = _effective_coupling(p)
    a = p.alpha
    half_b = m * dP
    c = 1.0 + gamma + p.beta * dP**2
    disc = half_b**2 - a * c
    vertex = half_b / a
    if disc < 0.0:
        if strict:
            raise NoRealRoot(
                "dP lies inside the forbidden gap", dP=dP, discriminant=4.0 * disc
            )
        return UncertaintyBound(vertex, math.nan, math.nan, vertex, 4.0 * disc, True)
    root = math.sqrt(disc)
    lower = c / (half_b + root)  # cancellation-free smaller root
    upper = (half_b + root) / a
    return UncertaintyBound(lower, lower, upper, vertex, 4.0 * disc, False)
