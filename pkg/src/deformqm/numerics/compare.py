"""Analytic-versus-grid spectrum comparison with split error budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .eigen import EigenResult

if TYPE_CHECKING:
    from ..exact_spectra import SpectrumReport


@dataclass(frozen=True)
class ToleranceProfile:
    """Budget ``disc_coeff * h^2 + rep_coeff * beta^2``.

    ``rep_coeff`` is ignored for exact representations, where only the
    discretization error applies.
    """

    h: float
    beta: float
    disc_coeff: float
    rep_coeff: float = 0.0
    exact_representation: bool = False

    @classmethod
    def nominal(
        cls, total: float, h: float, beta: float, *, exact_representation: bool = False, disc_share: float = 0.5
    ) -> "ToleranceProfile":
        """Profile whose budget equals ``total`` at ``(h, beta)``."""
        if exact_representation or beta == 0:
            return cls(h, beta, total / h**2, 0.0, exact_representation)
        return cls(h, beta, disc_share * total / h**2, (1 - disc_share) * total / beta**2)

    def at(self, h: float, beta: float) -> "ToleranceProfile":
        return ToleranceProfile(h, beta, self.disc_coeff, self.rep_coeff, self.exact_representation)

    @property
    def discretization_budget(self) -> float:
        return self.disc_coeff * self.h**2

    @property
    def representation_budget(self) -> float:
        return 0.0 if self.exact_representation else self.rep_coeff * self.beta**2

    @property
    def budget(self) -> float:
        return self.discretization_budget + self.representation_budget


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    analytic: float
    numeric: float
    abs_err: float
    rel_err: float
    budget: float
    passed: bool


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    profile: ToleranceProfile

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def spectrum_compare(
    analytic: "SpectrumReport", numeric: EigenResult, profile: ToleranceProfile, *, target: str = "exact"
) -> ComparisonTable:
    """Per-level errors of ``numeric`` against ``analytic``.

    ``target`` selects ``E_exact`` or ``E_first_order``; levels without an
    exact value fall back to the first-order one.
    """
    rows = []
    for level, num in zip(analytic.levels, numeric.eigenvalues):
        ref = level.E_exact if target == "exact" else level.E_first_order
        if not math.isfinite(ref):
            ref = level.E_first_order
        err = abs(float(num) - ref)
        rel = err / abs(ref) if ref != 0 else math.inf
        rows.append(ComparisonRow(level.n, ref, float(num), err, rel, profile.budget, bool(err <= profile.budget)))
    return ComparisonTable(tuple(rows), profile)


def dispersion_laplacian(k: np.ndarray, length: float, n_points: int) -> np.ndarray:
    """Eigenvalues of ``-D2/2`` (3-point, Dirichlet) on ``n_points`` nodes including the ends."""
    h = length / (n_points - 1)
    k = np.asarray(k, dtype=float)
    return (2.0 / h**2) * np.sin(k * math.pi * h / (2 * length)) ** 2
