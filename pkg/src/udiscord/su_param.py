"""SU(4) generators, the product-of-exponentials parametrization, samplers,
and single-qubit measurement bases.

Every factor ``exp(i * gamma_k * phi)`` is evaluated in closed form: the
off-diagonal generators act as a Pauli matrix on one 2x2 subblock and the
rest are diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

# (kind, i, j) for off-diagonal generators; "x" puts 1 at (i,j),(j,i),
# "y" puts -i at (i,j) and +i at (j,i).
_OFFDIAG = {
    1: ("x", 0, 1),
    2: ("y", 0, 1),
    4: ("x", 0, 2),
    5: ("y", 0, 2),
    6: ("x", 1, 2),
    7: ("y", 1, 2),
    9: ("x", 0, 3),
    10: ("y", 0, 3),
    11: ("x", 1, 3),
    12: ("y", 1, 3),
    13: ("x", 2, 3),
    14: ("y", 2, 3),
}
_DIAG = {
    3: np.array([1.0, -1.0, 0.0, 0.0]),
    8: np.array([1.0, 1.0, -2.0, 0.0]) / math.sqrt(3.0),
    15: np.array([1.0, 1.0, 1.0, -3.0]) / math.sqrt(6.0),
}

REDUCED_SEQUENCE = (3, 2, 3, 5, 3, 10, 3, 2, 3, 5, 3, 2)
FULL_SEQUENCE = REDUCED_SEQUENCE + (3, 8, 15)

_PI = math.pi
REDUCED_UPPER = np.array([_PI if k % 2 == 0 else _PI / 2 for k in range(12)])
# Upper ends for phi13..phi15. Only conjugation-invariant diagonal phases;
# they never affect U Lambda U^+.
FULL_UPPER = np.concatenate(
    [REDUCED_UPPER, [_PI, 2 * _PI / math.sqrt(3.0), math.sqrt(6.0) * _PI / 2]]
)


def generator(i: int) -> np.ndarray:
    """The i-th (1-based) SU(4) generator, normalized to Tr(g_i g_j) = 2 delta_ij."""
    if i in _DIAG:
        return np.diag(_DIAG[i]).astype(complex)
    if i not in _OFFDIAG:
        raise InvalidArgument(f"generator index must be in 1..15, got {i}")
    kind, a, b = _OFFDIAG[i]
    g = np.zeros((4, 4), dtype=complex)
    if kind == "x":
        g[a, b] = g[b, a] = 1.0
    else:
        g[a, b], g[b, a] = -1j, 1j
    return g


def generators() -> list[np.ndarray]:
    return [generator(i) for i in range(1, 16)]


def expi_generator(i: int, phi: float) -> np.ndarray:
    """exp(i * phi * gamma_i) in closed form."""
    if i in _DIAG:
        return np.diag(np.exp(1j * phi * _DIAG[i]))
    if i not in _OFFDIAG:
        raise InvalidArgument(f"generator index must be in 1..15, got {i}")
    kind, a, b = _OFFDIAG[i]
    c, s = math.cos(phi), math.sin(phi)
    m = np.eye(4, dtype=complex)
    m[a, a] = m[b, b] = c
    if kind == "x":
        m[a, b] = m[b, a] = 1j * s
    else:
        # i * sigma_y = [[0, 1], [-1, 0]]
        m[a, b], m[b, a] = s, -s
    return m


def _apply_right(u: np.ndarray, i: int, phi: np.ndarray) -> None:
    """In place: u[k] <- u[k] @ exp(i * phi[k] * gamma_i) for a batch."""
    if i in _DIAG:
        u *= np.exp(1j * phi[:, None] * _DIAG[i][None, :])[:, None, :]
        return
    kind, a, b = _OFFDIAG[i]
    c = np.cos(phi)[:, None]
    s = np.sin(phi)[:, None]
    ca = u[:, :, a].copy()
    cb = u[:, :, b]
    if kind == "x":
        u[:, :, a] = c * ca + 1j * s * cb
        u[:, :, b] = 1j * s * ca + c * cb
    else:
        u[:, :, a] = c * ca - s * cb
        u[:, :, b] = s * ca + c * cb


def product_unitaries(params: np.ndarray, sequence=REDUCED_SEQUENCE) -> np.ndarray:
    """Batched product of exponentials; ``params`` has shape (n, len(sequence))."""
    params = np.asarray(params, dtype=float)
    if params.ndim != 2 or params.shape[1] != len(sequence):
        raise InvalidArgument(
            f"expected parameters of shape (n, {len(sequence)}), got {params.shape}"
        )
    u = np.broadcast_to(np.eye(4, dtype=complex), (params.shape[0], 4, 4)).copy()
    for k, i in enumerate(sequence):
        _apply_right(u, i, params[:, k])
    return u


def su4_reduced(params) -> np.ndarray:
    """The 12-angle product that survives conjugation of a diagonal matrix."""
    p = np.asarray(params, dtype=float)
    if p.shape != (12,):
        raise InvalidArgument(f"su4_reduced takes 12 angles, got shape {p.shape}")
    return product_unitaries(p[None, :], REDUCED_SEQUENCE)[0]


def su4_full(params) -> np.ndarray:
    p = np.asarray(params, dtype=float)
    if p.shape != (15,):
        raise InvalidArgument(f"su4_full takes 15 angles, got shape {p.shape}")
    return product_unitaries(p[None, :], FULL_SEQUENCE)[0]


def sample_params(rng: np.random.Generator, reduced: bool = True, size: int | None = None):
    """Draw angles uniformly on the parameter box (12 or 15 angles).

    With the reduced box this is the flat measure of density 2**6 / pi**12.
    """
    upper = REDUCED_UPPER if reduced else FULL_UPPER
    shape = upper.shape if size is None else (size,) + upper.shape
    return rng.uniform(0.0, 1.0, size=shape) * upper


def haar_unitary(rng: np.random.Generator, dim: int, size: int | None = None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    if dim < 2:
        raise InvalidArgument("dim must be at least 2")
    n = 1 if size is None else size
    z = (rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    q = q * (d / np.abs(d))[:, None, :]
    return q[0] if size is None else q


@dataclass(frozen=True)
class MeasurementBasis:
    """Bloch angles fixing one projective qubit basis on each side."""

    theta_a: float = 0.0
    phi_a: float = 0.0
    theta_b: float = 0.0
    phi_b: float = 0.0

    @classmethod
    def from_vector(cls, x) -> "MeasurementBasis":
        """Wrap four raw optimizer angles into theta in [0, pi], phi in [0, 2 pi)."""
        ta, pa = _wrap_bloch(x[0], x[1])
        tb, pb = _wrap_bloch(x[2], x[3])
        return cls(ta, pa, tb, pb)


def _wrap_bloch(theta: float, phi: float) -> tuple[float, float]:
    theta = float(theta) % (2 * _PI)
    phi = float(phi)
    if theta > _PI:
        theta = 2 * _PI - theta
        phi += _PI
    return theta, phi % (2 * _PI)


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def local_projectors(basis: MeasurementBasis, side: str) -> tuple[np.ndarray, np.ndarray]:
    """Rank-1 projectors (P1, P2) onto +n and -n for the chosen side."""
    if side == "A":
        n = bloch_vector(basis.theta_a, basis.phi_a)
    elif side == "B":
        n = bloch_vector(basis.theta_b, basis.phi_b)
    else:
        raise InvalidArgument(f"side must be 'A' or 'B', got {side!r}")
    p1 = 0.5 * (np.eye(2) + np.einsum("k,kij->ij", n, PAULI))
    return p1, np.eye(2) - p1


def bloch_rotation(theta: float, phi: float) -> np.ndarray:
    """SU(2) element taking |0> to the Bloch direction (theta, phi)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, -s / e], [e * s, c]], dtype=complex)
