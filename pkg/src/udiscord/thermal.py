"""Gibbs states of two coupled spins and their correlation measures.

Temperature enters only through ``beta = D / (k T)``, which carries the sign
of the coupling ``D``. The Gibbs weights are ``exp(-c_i * beta)`` where
``E_i = c_i * D`` are the Hamiltonian eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import InvalidArgument
from .geometric import geometric_measure
from .invariant import (
    DEFAULT_SAMPLES_MODIFIED,
    McEstimate,
    modified_averaged_discord,
)
from .linalg import OrderedSpectrum, ordered_spectrum
from .su_param import PAULI

KINDS = ("heisenberg", "xyz", "xy")

# eigenvalues of H / D
ENERGY_COEFFS = {
    "heisenberg": (-0.25, -0.25, -0.25, 0.75),
    "xyz": (0.0, -1.0, 0.5, 0.5),
    "xy": (0.0, 0.0, -0.5, 0.5),
}

# coefficients of (I1x I2x, I1y I2y, I1z I2z) inside H = -D * (...)
_COUPLINGS = {
    "heisenberg": (1.0, 1.0, 1.0),
    "xyz": (1.0, 1.0, -2.0),
    "xy": (1.0, 1.0, 0.0),
}


@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str
    coupling_d: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.coupling_d == 0:
            raise InvalidArgument("coupling D must be nonzero")

    @property
    def sign(self) -> int:
        return 1 if self.coupling_d > 0 else -1


@dataclass(frozen=True)
class ThermalPoint:
    beta: float
    spectrum: OrderedSpectrum


def hamiltonian_matrix(spec: HamiltonianSpec) -> np.ndarray:
    spin = PAULI / 2
    h = np.zeros((4, 4), dtype=complex)
    for k, c in enumerate(_COUPLINGS[spec.kind]):
        h += c * np.kron(spin[k], spin[k])
    return -spec.coupling_d * h


def thermal_spectrum(spec: HamiltonianSpec, beta: float) -> ThermalPoint:
    if not math.isfinite(beta):
        raise InvalidArgument("beta must be finite")
    exponents = sorted(-c * beta for c in ENERGY_COEFFS[spec.kind])
    top = exponents[-1]
    weights = [math.exp(e - top) for e in reversed(exponents)]
    z = math.fsum(weights)
    return ThermalPoint(beta, OrderedSpectrum(2, tuple(w / z for w in weights)))


def gibbs_matrix(spec: HamiltonianSpec, beta: float) -> np.ndarray:
    """``exp(-H/kT) / Z`` built from the Hamiltonian matrix."""
    g = expm(-hamiltonian_matrix(spec) * (beta / spec.coupling_d))
    return g / np.trace(g).real


def analytic_qg(spec: HamiltonianSpec, beta: float) -> float:
    """Closed-form normalized geometric measure of the Gibbs state.

    The negative-coupling branches are written in ``|beta|``. For large
    ``|beta|`` numerator and denominator are divided by their leading
    exponential to avoid overflow.
    """
    if spec.kind == "xy":
        s2 = 1.0 / math.cosh(beta / 4) ** 2 if abs(beta) < 2800 else 0.0
        return (s2 * s2 - 4 * s2 + 3) / 3
    b = beta if spec.sign > 0 else -beta
    if spec.kind == "heisenberg":
        if b > 0:
            y = math.exp(-b)
            ratio = (1 - y) / (3 + y) if spec.sign > 0 else (1 - y) / (1 + 3 * y)
        else:
            y = math.exp(b)
            ratio = (y - 1) / (3 * y + 1) if spec.sign > 0 else (y - 1) / (y + 3)
        return ratio * ratio
    if b > 0:
        # x = e^{-b/2}; everything divided by e^{3b}
        x = math.exp(-b / 2)
        if spec.sign > 0:
            num = 3 - 2 * x**2 - 4 * x**3 + 3 * x**4 - 4 * x**5 + 4 * x**6
            den = 3 * (1 + x**2 + 2 * x**3) ** 2
        else:
            num = 4 - 4 * x + 3 * x**2 - 4 * x**3 - 2 * x**4 + 3 * x**6
            den = 3 * (2 + x + x**3) ** 2
        return num / den
    e = math.exp
    if spec.sign > 0:
        num = 3 * e(3 * b) - 2 * e(2 * b) - 4 * e(1.5 * b) + 3 * e(b) - 4 * e(0.5 * b) + 4
        return num / (3 * (e(1.5 * b) + e(0.5 * b) + 2) ** 2)
    num = 4 * e(3 * b) - 4 * e(2.5 * b) + 3 * e(2 * b) - 4 * e(1.5 * b) - 2 * e(b) + 3
    return num / (3 * (2 * e(1.5 * b) + e(b) + 1) ** 2)


# leading-coefficient ratios of analytic_qg as |beta| -> infinity
_GROUND_QG = {
    ("heisenberg", 1): (1 / 3) ** 2,
    ("heisenberg", -1): 1.0,
    ("xyz", 1): 3 / (3 * 1**2),
    ("xyz", -1): 4 / (3 * 2**2),
    ("xy", 1): 3 / 3,
    ("xy", -1): 3 / 3,
}


def ground_state_qg(spec: HamiltonianSpec) -> float:
    """Zero-temperature limit of ``analytic_qg``."""
    return _GROUND_QG[(spec.kind, spec.sign)]


@dataclass(frozen=True)
class SweepRow:
    beta: float
    qg_analytic: float
    qg_numeric: float
    q_modified: float
    q_modified_stderr: float


def thermal_sweep(
    spec: HamiltonianSpec,
    beta_grid: Sequence[float],
    samples: int = DEFAULT_SAMPLES_MODIFIED,
    seed: int = 0,
    pure_estimate: McEstimate | None = None,
    *,
    workers=None,
) -> list[SweepRow]:
    """One row per beta: analytic and matrix-based geometric measures and the
    normalized modified discord.

    All rows share the sample stream; the pure-state denominator uses it too
    unless ``pure_estimate`` is given.
    """
    beta_grid = list(beta_grid)
    if not beta_grid:
        raise InvalidArgument("beta grid is empty")
    if pure_estimate is None:
        pure_estimate = modified_averaged_discord(OrderedSpectrum.pure(2), samples, seed, workers=workers)
    rows = []
    for beta in beta_grid:
        point = thermal_spectrum(spec, beta)
        numeric = geometric_measure(ordered_spectrum(gibbs_matrix(spec, beta))).normalized
        est = modified_averaged_discord(point.spectrum, samples, seed, workers=workers).ratio(pure_estimate)
        rows.append(SweepRow(beta, analytic_qg(spec, beta), numeric, est.mean, est.std_error))
    return rows
