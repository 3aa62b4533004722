"""Entropies, mutual information, two-side projective measurements and the
two-side discord of a bipartite qubit state. All logarithms are base 2."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import _kernels
from .errors import InvalidArgument, ResourceLimit
from .linalg import (
    BipartiteSplit,
    check_density_matrix,
    clean_eigenvalues,
    n_qubits_of,
    partial_trace,
    permute_qubits,
)
from .su_param import (
    PAULI,
    MeasurementBasis,
    bloch_rotation,
    local_projectors,
    su4_reduced,
)


@dataclass(frozen=True)
class OptimizerConfig:
    multistarts: int = 8
    max_iterations: int = 500
    tolerance: float = 1e-8
    # initial simplex edge in radians
    step: float = 0.4

    def __post_init__(self):
        if self.multistarts < 1:
            raise InvalidArgument("multistarts must be >= 1")
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be positive")

    @property
    def xatol(self) -> float:
        # the objective is quadratic near its maximum
        return max(self.tolerance**0.5, 1e-7)


class SupResult(NamedTuple):
    value: float
    basis: MeasurementBasis
    converged: bool


def shannon_entropy(p) -> float:
    """Entropy in bits of a probability vector, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    rho = check_density_matrix(rho)
    return shannon_entropy(clean_eigenvalues(np.linalg.eigvalsh(rho)))


def _split_for(rho: np.ndarray, split: BipartiteSplit | None) -> BipartiteSplit:
    n = n_qubits_of(rho)
    if split is None:
        if n != 2:
            raise InvalidArgument("a split is required for states of more than two qubits")
        return BipartiteSplit((0,), (1,))
    split.check(n)
    return split


def mutual_information(rho, split: BipartiteSplit | None = None) -> float:
    """S(rho_A) + S(rho_B) - S(rho) in bits."""
    rho = check_density_matrix(rho)
    split = _split_for(rho, split)
    s_a = shannon_entropy(clean_eigenvalues(np.linalg.eigvalsh(partial_trace(rho, split.side_a))))
    s_b = shannon_entropy(clean_eigenvalues(np.linalg.eigvalsh(partial_trace(rho, split.side_b))))
    s_ab = shannon_entropy(clean_eigenvalues(np.linalg.eigvalsh(rho)))
    return s_a + s_b - s_ab


def _check_projectors(projs: Sequence[np.ndarray], dim: int, side: str) -> list[np.ndarray]:
    projs = [np.asarray(p, dtype=complex) for p in projs]
    if any(p.shape != (dim, dim) for p in projs):
        raise InvalidArgument(f"side {side} projectors must be {dim}x{dim}")
    if np.linalg.norm(sum(projs) - np.eye(dim)) > 1e-10:
        raise InvalidArgument(f"side {side} projectors do not sum to the identity")
    for i, p in enumerate(projs):
        if np.linalg.norm(p @ p - p) > 1e-10 or np.linalg.norm(p - p.conj().T) > 1e-10:
            raise InvalidArgument(f"side {side} element {i} is not an orthogonal projector")
        for q in projs[i + 1:]:
            if np.linalg.norm(p @ q) > 1e-10:
                raise InvalidArgument(f"side {side} projectors are not mutually orthogonal")
    return projs


def measure_two_side(
    rho,
    split: BipartiteSplit | None = None,
    basis: MeasurementBasis | None = None,
    projectors_a: Sequence[np.ndarray] | None = None,
    projectors_b: Sequence[np.ndarray] | None = None,
) -> np.ndarray:
    """Outcome table ``probs[i, j] = Tr((P_i x Q_j) rho)``.

    Qubit sides use ``basis``; multiqubit sides need explicit projector lists.
    """
    rho = check_density_matrix(rho)
    split = _split_for(rho, split)
    d_a, d_b = 2 ** len(split.side_a), 2 ** len(split.side_b)
    if projectors_a is None or projectors_b is None:
        if d_a != 2 or d_b != 2:
            raise InvalidArgument("angle-parametrized bases need one qubit per side")
        basis = basis or MeasurementBasis()
        projectors_a = projectors_a or local_projectors(basis, "A")
        projectors_b = projectors_b or local_projectors(basis, "B")
    pa = _check_projectors(projectors_a, d_a, "A")
    pb = _check_projectors(projectors_b, d_b, "B")
    r = permute_qubits(rho, split.order).reshape(d_a, d_b, d_a, d_b)
    probs = np.array(
        [[np.einsum("ki,lj,ijkl->", p, q, r).real for q in pb] for p in pa]
    )
    return np.where(np.abs(probs) < 1e-15, 0.0, probs)


def check_distribution(dist) -> np.ndarray:
    p = np.asarray(dist, dtype=float)
    if p.ndim != 2:
        raise InvalidArgument("joint distribution must be a 2-D table")
    if p.min() < -1e-10 or abs(p.sum() - 1.0) > 1e-10:
        raise InvalidArgument("joint distribution must be nonnegative and sum to 1")
    return np.clip(p, 0.0, None)


def classical_mutual_information(dist) -> float:
    """H(rows) + H(cols) - H(joint) in bits."""
    p = check_distribution(dist)
    return shannon_entropy(p.sum(axis=1)) + shannon_entropy(p.sum(axis=0)) - shannon_entropy(p)


def bloch_data(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local Bloch vectors and correlation matrix of (a batch of) 4x4 states."""
    r = np.asarray(rho).reshape(-1, 2, 2, 2, 2)
    # r[n, i, l, j, m] = rho[(i, l), (j, m)]
    a = np.einsum("kji,niljl->nk", PAULI, r).real
    b = np.einsum("kji,nlilj->nk", PAULI, r).real
    t = np.einsum("kji,mlq,niqjl->nkm", PAULI, PAULI, r).real
    return a, b, t


@lru_cache(maxsize=None)
def multistart_points(count: int, dim: int = 4) -> np.ndarray:
    """Leading points of an unscrambled Sobol sequence on the Bloch-angle box.

    The sequence is a prefix family, so more starts always include fewer.
    The first point is the computational basis on both sides.
    """
    m = max(0, int(np.ceil(np.log2(count))))
    u = qmc.Sobol(d=dim, scramble=False).random_base2(m)[:count]
    scale = np.array([np.pi, 2 * np.pi] * (dim // 2))
    pts = u * scale
    pts.setflags(write=False)
    return pts


def sup_two_qubit_batch(rhos: np.ndarray, cfg: OptimizerConfig):
    """Per-state supremum of the two-side classical mutual information."""
    a, b, t = bloch_data(rhos)
    return sup_from_bloch(a, b, t, cfg)


def sup_from_bloch(a, b, t, cfg: OptimizerConfig):
    starts = multistart_points(cfg.multistarts)
    return _kernels.sup_batch(
        np.ascontiguousarray(a),
        np.ascontiguousarray(b),
        np.ascontiguousarray(t),
        np.ascontiguousarray(starts),
        cfg.step,
        cfg.tolerance,
        cfg.xatol,
        cfg.max_iterations,
    )


def _local_unitary(n_qubits: int, x: np.ndarray) -> np.ndarray:
    if n_qubits == 1:
        return bloch_rotation(x[0], x[1])
    if n_qubits == 2:
        return su4_reduced(x)
    raise ResourceLimit("local measurement optimization supports sides of at most 2 qubits")


def _n_local_params(n_qubits: int) -> int:
    if n_qubits == 1:
        return 2
    if n_qubits == 2:
        return 12
    raise ResourceLimit("local measurement optimization supports sides of at most 2 qubits")


def _local_box(n_qubits: int) -> np.ndarray:
    if n_qubits == 1:
        return np.array([np.pi, 2 * np.pi])
    from .su_param import REDUCED_UPPER

    return REDUCED_UPPER


def _generic_sup(rho: np.ndarray, split: BipartiteSplit, cfg: OptimizerConfig) -> tuple[float, np.ndarray, bool]:
    """Multistart simplex search over local unitary parameters of both sides.

    Used when a side holds more than one qubit. Outcome probabilities are the
    diagonal of ``(V_A x V_B)^+ rho (V_A x V_B)``.
    """
    na, nb = len(split.side_a), len(split.side_b)
    ka, kb = _n_local_params(na), _n_local_params(nb)
    da, db = 2**na, 2**nb
    r = permute_qubits(rho, split.order)

    def neg_mi(x):
        v = np.kron(_local_unitary(na, x[:ka]), _local_unitary(nb, x[ka:]))
        p = np.real(np.einsum("ji,jk,ki->i", v.conj(), r, v)).reshape(da, db)
        p = np.clip(p, 0.0, None)
        p /= p.sum()
        return -(shannon_entropy(p.sum(1)) + shannon_entropy(p.sum(0)) - shannon_entropy(p))

    box = np.concatenate([_local_box(na), _local_box(nb)])
    u = qmc.Sobol(d=ka + kb, scramble=False).random_base2(
        max(0, int(np.ceil(np.log2(cfg.multistarts))))
    )[: cfg.multistarts]
    best_val, best_x, all_ok = -np.inf, None, True
    for x0 in u * box:
        res = minimize(
            neg_mi,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iterations * (ka + kb),
                "fatol": cfg.tolerance,
                "xatol": cfg.xatol,
                "initial_simplex": np.vstack([x0, x0 + cfg.step * np.eye(ka + kb)]),
            },
        )
        all_ok &= bool(res.success)
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    return float(best_val), best_x, all_ok


def classical_correlation_sup(
    rho, split: BipartiteSplit | None = None, cfg: OptimizerConfig | None = None
) -> SupResult:
    """Maximum over local projective bases of the outcome mutual information.

    For multiqubit sides the ``basis`` field of the result is ``None``.
    """
    rho = check_density_matrix(rho)
    split = _split_for(rho, split)
    cfg = cfg or OptimizerConfig()
    if len(split.side_a) == 1 and len(split.side_b) == 1:
        r = permute_qubits(rho, split.order)
        vals, args, fails = sup_two_qubit_batch(r[None], cfg)
        return SupResult(float(vals[0]), MeasurementBasis.from_vector(args[0]), fails[0] == 0)
    value, _, ok = _generic_sup(rho, split, cfg)
    return SupResult(value, None, ok)


def two_side_discord(rho, split: BipartiteSplit | None = None, cfg: OptimizerConfig | None = None) -> float:
    """Mutual information minus its best two-side measured value, floored at 0."""
    rho = check_density_matrix(rho)
    split = _split_for(rho, split)
    sup = classical_correlation_sup(rho, split, cfg)
    return max(0.0, mutual_information(rho, split) - sup.value)
