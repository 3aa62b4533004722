"""Squared Frobenius distance from a state to the maximally mixed state.

The distance is unitarily invariant, so averaging it over basis changes is
the same as evaluating it on the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .invariant import McEstimate, _block_rng, _block_sizes
from .errors import InvalidArgument
from .linalg import OrderedSpectrum, frobenius_dist_sq, ordered_spectrum
from .su_param import product_unitaries, sample_params


@dataclass(frozen=True)
class GeometricResult:
    raw: float
    normalized: float


def geometric_measure(spec: OrderedSpectrum) -> GeometricResult:
    """``sum(l**2) - 2**-N`` and its normalization ``(2**N sum(l**2) - 1) / (2**N - 1)``."""
    lam = spec.as_array()
    d = spec.dim
    purity = math.fsum(lam * lam)
    raw = purity - 1.0 / d
    normalized = (d * purity - 1.0) / (d - 1)
    return GeometricResult(raw, min(max(normalized, 0.0), 1.0))


def geometric_measure_of_matrix(rho) -> GeometricResult:
    return geometric_measure(ordered_spectrum(rho))


def geometric_distance_oracle(spec: OrderedSpectrum, samples: int, seed: int) -> McEstimate:
    """Average over the parameter box of ``||U Lambda U^+ - I/4||^2``, computed
    matrix by matrix. The integrand should not depend on the sample."""
    if spec.n_qubits != 2:
        raise InvalidArgument("the distance oracle is defined for two qubits")
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    lam = np.diag(spec.as_array())
    target = np.eye(4) / 4
    values = []
    for block, size in enumerate(_block_sizes(samples)):
        us = product_unitaries(sample_params(_block_rng(seed, block), size=size))
        for u in us:
            values.append(frobenius_dist_sq(u @ lam @ u.conj().T, target))
    return McEstimate.from_values(np.array(values), seed)
