"""Dense linear algebra for qubit density matrices.

Qubit 0 is the most significant bit of a basis index, so ``|n0 n1 ... >``
maps to ``n0 * 2**(N-1) + ... + n_{N-1}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NotADensityMatrix

MAX_QUBITS = 10

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
CLAMP_TOL = 1e-10
REJECT_TOL = 1e-8


@dataclass(frozen=True)
class OrderedSpectrum:
    """Descending, nonnegative, unit-sum eigenvalue list of an N-qubit state."""

    n_qubits: int
    lambdas: tuple[float, ...]

    def __post_init__(self):
        if len(self.lambdas) != 2**self.n_qubits:
            raise InvalidArgument(
                f"expected {2**self.n_qubits} eigenvalues, got {len(self.lambdas)}"
            )

    @classmethod
    def from_values(cls, values: Sequence[float], tol: float = 1e-12) -> "OrderedSpectrum":
        """Canonicalize raw eigenvalues: sort descending and check the simplex.

        Values must already sum to 1 within ``tol``; they are renormalized so
        the stored sum is 1 to machine precision.
        """
        w = np.asarray(values, dtype=float).ravel()
        n = _qubits_for_dim(w.size)
        if np.any(w < -tol) or np.any(w > 1 + tol):
            raise InvalidArgument("eigenvalues must lie in [0, 1]")
        total = math.fsum(w)
        if abs(total - 1.0) > tol:
            raise InvalidArgument(f"eigenvalues sum to {total!r}, expected 1")
        w = np.clip(w, 0.0, None)
        w = np.sort(w)[::-1]
        w = w / math.fsum(w)
        return cls(n, tuple(float(x) for x in w))

    @classmethod
    def pure(cls, n_qubits: int) -> "OrderedSpectrum":
        return cls(n_qubits, (1.0,) + (0.0,) * (2**n_qubits - 1))

    @classmethod
    def uniform(cls, n_qubits: int) -> "OrderedSpectrum":
        d = 2**n_qubits
        return cls(n_qubits, (1.0 / d,) * d)

    @property
    def dim(self) -> int:
        return len(self.lambdas)

    def as_array(self) -> np.ndarray:
        return np.array(self.lambdas)

    def is_uniform(self) -> bool:
        return all(x == self.lambdas[0] for x in self.lambdas)

    def matrix(self) -> np.ndarray:
        """The state diagonal in its (ordered) eigenbasis."""
        return np.diag(self.as_array()).astype(complex)


@dataclass(frozen=True)
class BipartiteSplit:
    side_a: tuple[int, ...]
    side_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "side_a", tuple(int(i) for i in self.side_a))
        object.__setattr__(self, "side_b", tuple(int(i) for i in self.side_b))
        if not self.side_a or not self.side_b:
            raise InvalidArgument("both sides of a split must be nonempty")
        if set(self.side_a) & set(self.side_b):
            raise InvalidArgument("split sides overlap")
        n = self.n_qubits
        if set(self.side_a) | set(self.side_b) != set(range(n)):
            raise InvalidArgument("split must cover qubits 0..N-1 exactly")
        if len(set(self.side_a)) != len(self.side_a) or len(set(self.side_b)) != len(self.side_b):
            raise InvalidArgument("repeated qubit index in split")

    @property
    def n_qubits(self) -> int:
        return len(self.side_a) + len(self.side_b)

    @property
    def order(self) -> tuple[int, ...]:
        return self.side_a + self.side_b

    def check(self, n_qubits: int) -> None:
        if self.n_qubits != n_qubits:
            raise InvalidArgument(
                f"split covers {self.n_qubits} qubits, state has {n_qubits}"
            )

    def __str__(self) -> str:
        a = ",".join(map(str, self.side_a))
        b = ",".join(map(str, self.side_b))
        return f"{{{a}}}|{{{b}}}"


def all_bipartitions(n_qubits: int) -> list[BipartiteSplit]:
    """Every unordered split of ``{0..N-1}`` into two nonempty parts.

    Qubit 0 always sits on side A, so each partition appears once.
    """
    if n_qubits < 2:
        raise InvalidArgument("need at least two qubits to split")
    rest = list(range(1, n_qubits))
    splits = []
    for mask in range(2 ** (n_qubits - 1) - 1):
        a = [0] + [q for k, q in enumerate(rest) if mask >> k & 1]
        b = [q for k, q in enumerate(rest) if not mask >> k & 1]
        splits.append(BipartiteSplit(tuple(a), tuple(b)))
    splits.sort(key=lambda s: (len(s.side_a), s.side_a))
    return splits


def _qubits_for_dim(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 0 or 2**n != dim:
        raise InvalidArgument(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise InvalidArgument(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
    return n


def n_qubits_of(mat: np.ndarray) -> int:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {mat.shape}")
    return _qubits_for_dim(mat.shape[0])


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    n_qubits_of(rho)
    if np.linalg.norm(rho - rho.conj().T) > HERMITIAN_TOL:
        raise NotADensityMatrix("matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotADensityMatrix(f"trace is {tr.real:.12g}, expected 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -REJECT_TOL:
        raise NotADensityMatrix(f"negative eigenvalue {w[0]:.3g}")
    return rho


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def permute_qubits(rho: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new qubit ``k`` is old qubit ``order[k]``."""
    rho = np.asarray(rho)
    n = n_qubits_of(rho)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InvalidArgument(f"{order} is not a permutation of 0..{n - 1}")
    if order == list(range(n)):
        return rho
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(order + [n + q for q in order])
    return t.reshape(2**n, 2**n)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Trace out every qubit not listed in ``keep``.

    The kept qubits appear in the result in the order given by ``keep``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho)
    keep = [int(q) for q in keep]
    if not keep or len(set(keep)) == n:
        raise InvalidArgument("keep must be a nonempty strict subset of the qubits")
    if len(set(keep)) != len(keep) or any(q < 0 or q >= n for q in keep):
        raise InvalidArgument(f"invalid qubit indices {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = permute_qubits(rho, keep + traced)
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    return np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))


def hermitian_eig(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {mat.shape}")
    if np.linalg.norm(mat - mat.conj().T) > 1e-8:
        raise InvalidArgument("matrix is not Hermitian")
    return np.linalg.eigh(mat)


def clean_eigenvalues(w: np.ndarray) -> np.ndarray:
    """Clamp roundoff negatives to zero, renormalize, sort descending."""
    w = np.asarray(w, dtype=float)
    if w.min() < -REJECT_TOL:
        raise NotADensityMatrix(f"negative eigenvalue {w.min():.3g}")
    w = np.where(w < 0, 0.0, w)
    w = np.minimum(w, 1.0)
    w = np.sort(w)[::-1]
    return w / math.fsum(w)


def ordered_spectrum(rho: np.ndarray) -> OrderedSpectrum:
    rho = check_density_matrix(rho)
    w, _ = hermitian_eig(rho)
    w = clean_eigenvalues(w)
    return OrderedSpectrum(n_qubits_of(rho), tuple(float(x) for x in w))


def frobenius_dist_sq(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    return float(np.real(np.vdot(d, d)))


def load_density_matrix(path) -> np.ndarray:
    """Read ``{"n_qubits": N, "re": [[...]], "im": [[...]]}`` from ``path``."""
    with open(path) as fh:
        data = json.load(fh)
    return density_matrix_from_json(data)


def density_matrix_from_json(data: dict) -> np.ndarray:
    try:
        n = int(data["n_qubits"])
        re = np.array(data["re"], dtype=float)
        im = np.array(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed density-matrix document: {exc}") from exc
    d = 2**n
    if re.shape != (d, d) or im.shape != (d, d):
        raise InvalidArgument(f"expected {d}x{d} arrays for n_qubits={n}")
    return re + 1j * im


def density_matrix_to_json(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {
        "n_qubits": n_qubits_of(rho),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }
