"""Grid Hamiltonians for the deformed potentials.

First-order systems share the form
``H = p c(x) p / 2 + beta p^2 w(x) p^2 + V(x)`` with
``c = 1 + (beta/6)(2a - (b^2 - 4ac)/f')`` and ``w = 1/(3 f')``. The exact Morse
system uses ``Y = e^{-x} - beta p^2`` in ``H = p^2/2 + B^2 Y^2/2 - B(2A+1) Y/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sps

from ..errors import DomainViolation, IndefiniteKinetic, ParameterRange
from ..fdeform import (
    DeformedFunctionFamily,
    GridOperator,
    GridSpec,
    _sech,
    get_family,
    p_squared_matrix,
    stencil_matrix,
    symmetrize,
)

SYSTEMS = ("pt-hyp", "pt-trig", "morse-exact", "morse-first-order", "generic")


def pt_kinetic_cap(beta: float) -> float:
    """Largest ``|x|`` where ``1 - (beta/3)(1 + 2 cosh^2 x)`` stays positive."""
    if beta <= 0:
        return math.inf
    arg = (3.0 / beta - 1.0) / 2.0
    if arg <= 1.0:
        return 0.0
    return math.acosh(math.sqrt(arg))


def cap_grid(grid: GridSpec, cap: float, margin: int = 1) -> GridSpec:
    """Restrict ``grid`` to ``|x| < cap`` keeping the spacing.

    ``margin`` extra points are dropped on each side so that midpoint
    kinetic coefficients also stay inside the cap.
    """
    x = grid.x
    keep = np.flatnonzero(np.abs(x) < cap)
    if keep.size == 0:
        raise IndefiniteKinetic("no grid point lies inside the positive-kinetic region", cap=cap)
    lo, hi = keep[0] + margin, keep[-1] - margin
    if hi - lo + 1 < 16:
        raise IndefiniteKinetic("positive-kinetic region holds fewer than 16 grid points", cap=cap)
    return GridSpec(float(x[lo]), float(x[hi]), int(hi - lo + 1))


def _second_derivative(fn: Callable, x: np.ndarray, step: float) -> np.ndarray:
    w = (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)
    return sum(wk * fn(x + k * step) for wk, k in zip(w, range(-2, 3))) / step**2


def _kinetic(c: Callable, grid: GridSpec, accuracy: int) -> sps.csr_matrix:
    """``p c(x) p`` as a symmetric matrix."""
    n, h = grid.n_points, grid.h
    x = grid.x
    if accuracy == 2:
        cm = c(np.concatenate(([x[0] - 0.5 * h], x + 0.5 * h)))
        main = (cm[:-1] + cm[1:]) / h**2
        off = -cm[1:-1] / h**2
        return sps.diags([off, main, off], [-1, 0, 1], format="csr")
    p2 = -stencil_matrix(2, n, h, accuracy)
    C = sps.diags(c(x))
    return sps.csr_matrix(0.5 * (C @ p2 + p2 @ C) + 0.5 * sps.diags(_second_derivative(c, x, h)))


def _kinetic_points(grid: GridSpec, accuracy: int) -> np.ndarray:
    x = grid.x
    if accuracy == 2:
        return np.concatenate(([x[0] - 0.5 * grid.h], x + 0.5 * grid.h))
    return x


def _first_order(
    fam: DeformedFunctionFamily,
    beta: float,
    potential: Callable,
    grid: GridSpec,
    accuracy: int,
    meta: dict,
) -> GridOperator:
    if beta < 0:
        raise ParameterRange("beta must be >= 0", beta=beta)
    x = grid.x
    probe = _kinetic_points(grid, accuracy)
    lo, hi = fam.domain
    if np.any(probe <= lo) or np.any(probe >= hi):
        raise DomainViolation(f"grid leaves the {fam.name} domain {fam.domain}")
    disc = fam.b**2 - 4 * fam.a * fam.c

    def c(u):
        return 1.0 + (beta / 6.0) * (2 * fam.a - disc / fam.f_prime(u))

    cvals = c(probe)
    if np.any(cvals <= 0):
        bad = probe[cvals <= 0]
        raise IndefiniteKinetic(
            "kinetic coefficient is not positive on the grid; shrink the domain or beta",
            x_first_bad=float(bad[np.argmin(np.abs(bad))]),
            beta=beta,
        )
    H = 0.5 * _kinetic(c, grid, accuracy)
    if beta > 0:
        D2 = stencil_matrix(2, grid.n_points, grid.h, accuracy)
        W = sps.diags(1.0 / (3.0 * fam.f_prime(x)))
        H = H + beta * (D2 @ W @ D2)
    H = H + sps.diags(potential(x))
    meta = dict(meta, beta=beta, accuracy=accuracy, family=fam.name)
    return GridOperator(grid, symmetrize(H), 1.0, meta)


def _sec(u):
    return 1.0 / np.cos(u)


def assemble_hamiltonian(
    system: str,
    params: Mapping,
    grid: GridSpec,
    *,
    accuracy: int = 2,
) -> GridOperator:
    """Real symmetric banded Hamiltonian of ``system`` on ``grid``.

    ``params`` holds ``A``, ``beta`` (and ``B`` for Morse). The ``generic``
    system takes ``family`` (registry name or family object) and a callable
    ``potential``. Dirichlet boundaries throughout.
    """
    if accuracy not in (2, 4):
        raise ParameterRange("accuracy must be 2 or 4", accuracy=accuracy)
    beta = float(params.get("beta", 0.0))
    if system == "pt-hyp":
        A = float(params["A"])
        return _first_order(
            get_family("pt-tanh"), beta, lambda u: -0.5 * A * (A + 1) * _sech(u) ** 2, grid, accuracy,
            {"system": system, "A": A},
        )
    if system == "pt-trig":
        A = float(params["A"])
        return _first_order(
            get_family("pt-tan"), beta, lambda u: 0.5 * A * (A - 1) * _sec(u) ** 2, grid, accuracy,
            {"system": system, "A": A},
        )
    if system == "morse-first-order":
        A, B = float(params["A"]), float(params["B"])
        return _first_order(
            get_family("morse-exp"),
            beta,
            lambda u: 0.5 * B * B * np.exp(-2 * u) - 0.5 * B * (2 * A + 1) * np.exp(-u),
            grid,
            accuracy,
            {"system": system, "A": A, "B": B},
        )
    if system == "morse-exact":
        A, B = float(params["A"]), float(params["B"])
        p2 = p_squared_matrix(grid, accuracy)
        Y = sps.diags(np.exp(-grid.x)) - beta * p2
        H = 0.5 * p2 + 0.5 * B * B * (Y @ Y) - 0.5 * B * (2 * A + 1) * Y
        meta = {"system": system, "A": A, "B": B, "beta": beta, "accuracy": accuracy}
        return GridOperator(grid, symmetrize(H), 1.0, meta)
    if system == "generic":
        fam = params["family"]
        if isinstance(fam, str):
            fam = get_family(fam)
        return _first_order(fam, beta, params["potential"], grid, accuracy, {"system": system})
    raise ParameterRange(f"unknown system {system!r}", choices=list(SYSTEMS))


@dataclass(frozen=True)
class MorseZeroModeCheck:
    residual: float
    norm: float

    @property
    def relative(self) -> float:
        return self.residual / self.norm


def morse_lowering_matrix(g: float, B: float, r: float, beta: float, grid: GridSpec, accuracy: int = 2):
    """``sqrt(2) B- = -beta B d^2 + g d - B e^{-x} + r`` as a sparse matrix."""
    n, h = grid.n_points, grid.h
    D1 = stencil_matrix(1, n, h, accuracy)
    D2 = stencil_matrix(2, n, h, accuracy)
    return (-beta * B * D2 + g * D1 + sps.diags(r - B * np.exp(-grid.x))) / math.sqrt(2.0)
