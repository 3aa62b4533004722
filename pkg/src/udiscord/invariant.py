"""Monte Carlo averages of the two-side discord over global basis changes.

Sample ``k`` is drawn from a generator seeded by ``(seed, k // BLOCK)`` and
consumed in a fixed order inside its block, so every estimate is a
deterministic function of ``(spectrum, samples, seed, sampler)`` whatever
the number of worker threads. Sample prefixes are shared: the first ``n``
samples of a ``2n`` run are the samples of the ``n`` run.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .linalg import (
    BipartiteSplit,
    OrderedSpectrum,
    all_bipartitions,
    partial_trace,
)
from .measures import OptimizerConfig, _generic_sup, sup_two_qubit_batch
from .su_param import haar_unitary, product_unitaries, sample_params

BLOCK = 1024
MC_MAX_QUBITS = 3

DEFAULT_SAMPLES = 20_000
DEFAULT_SAMPLES_MODIFIED = 200_000

BOX = "box"
HAAR = "haar"


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    nonconverged: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidArgument("an estimate needs at least one sample")
        if self.std_error < 0:
            raise InvalidArgument("std_error must be nonnegative")

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int, nonconverged: int = 0) -> "McEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = math.fsum(values) / n
        if n > 1:
            var = math.fsum((values - mean) ** 2) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = 0.0
        return cls(mean, se, n, seed, nonconverged)

    def ratio(self, other: "McEstimate") -> "McEstimate":
        """Quotient with first-order error propagation (samples independent)."""
        if other.mean == 0:
            raise ZeroDivisionError("normalization constant is zero")
        q = self.mean / other.mean
        if self.mean == 0:
            rel = 0.0
        else:
            rel = math.hypot(self.std_error / self.mean, other.std_error / other.mean)
        return McEstimate(q, abs(q) * rel, self.samples, self.seed, self.nonconverged)


@dataclass(frozen=True)
class NormalizationConstants:
    """Pure-state denominators of the normalized discords, in bits."""

    qbar_pure: float
    qbar_up_pure: float
    samples: int
    seed: int
    qbar_pure_stderr: float = 0.0
    qbar_up_pure_stderr: float = 0.0
    samples_up: int | None = None
    entropy_base: int = 2

    def __post_init__(self):
        if not self.qbar_pure > 0:
            raise InvalidArgument("qbar_pure must be positive")
        if self.samples_up is None:
            object.__setattr__(self, "samples_up", self.samples)

    @property
    def plain(self) -> McEstimate:
        return McEstimate(self.qbar_pure, self.qbar_pure_stderr, self.samples, self.seed)

    @property
    def modified(self) -> McEstimate:
        return McEstimate(self.qbar_up_pure, self.qbar_up_pure_stderr, self.samples_up, self.seed)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _block_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def rotated_states(spec: OrderedSpectrum, unitaries: np.ndarray) -> np.ndarray:
    """``U Lambda U^+`` per unitary, written as ``mean*I + U (Lambda - mean*I) U^+``.

    The shift makes the maximally mixed state come out exactly proportional
    to the identity.
    """
    lam = spec.as_array()
    shift = 1.0 / spec.dim
    dev = lam - shift
    rhos = np.einsum("nij,j,nkj->nik", unitaries, dev, unitaries.conj())
    idx = np.arange(spec.dim)
    rhos[:, idx, idx] += shift
    return rhos


def _block_unitaries(rng, size: int, n_qubits: int, sampler: str) -> np.ndarray:
    if sampler == BOX:
        if n_qubits != 2:
            raise InvalidArgument("the parameter-box sampler exists only for two qubits")
        return product_unitaries(sample_params(rng, reduced=True, size=size))
    if sampler == HAAR:
        return haar_unitary(rng, 2**n_qubits, size=size)
    raise InvalidArgument(f"unknown sampler {sampler!r}")


def _entropy_rows(w: np.ndarray) -> np.ndarray:
    """Row-wise entropy in bits of (possibly roundoff-negative) eigenvalue arrays."""
    w = np.where(w > 0, w, 0.0)
    w = w / w.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log2(w), 0.0)
    return -terms.sum(axis=-1)


def _batched_marginal(rhos: np.ndarray, n_qubits: int, keep) -> np.ndarray:
    keep = list(keep)
    traced = [q for q in range(n_qubits) if q not in keep]
    n = rhos.shape[0]
    t = rhos.reshape((n,) + (2,) * (2 * n_qubits))
    perm = [0] + [1 + q for q in keep + traced] + [1 + n_qubits + q for q in keep + traced]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = t.transpose(perm).reshape(n, dk, dt, dk, dt)
    return np.einsum("najbj->nab", t)


def _quantum_mi(rhos, spec: OrderedSpectrum, split: BipartiteSplit) -> np.ndarray:
    # S(U Lambda U^+) = S(Lambda) for every sample
    s_ab = _entropy_rows(spec.as_array()[None, :])[0]
    n = spec.n_qubits
    s_a = _entropy_rows(np.linalg.eigvalsh(_batched_marginal(rhos, n, split.side_a)))
    s_b = _entropy_rows(np.linalg.eigvalsh(_batched_marginal(rhos, n, split.side_b)))
    return s_a + s_b - s_ab


def _diagonal_mi(rhos, spec: OrderedSpectrum, split: BipartiteSplit) -> np.ndarray:
    """Classical mutual information of the diagonal of each state, read as a table."""
    n = spec.n_qubits
    diag = np.real(np.diagonal(rhos, axis1=1, axis2=2))
    t = diag.reshape((-1,) + (2,) * n).transpose([0] + [1 + q for q in split.order])
    t = t.reshape(-1, 2 ** len(split.side_a), 2 ** len(split.side_b))
    h_a = _entropy_rows(t.sum(axis=2))
    h_b = _entropy_rows(t.sum(axis=1))
    h_ab = _entropy_rows(t.reshape(t.shape[0], -1))
    return h_a + h_b - h_ab


def _check_spec(spec: OrderedSpectrum, sampler: str) -> None:
    if spec.n_qubits < 2:
        raise InvalidArgument("need at least two qubits")
    if spec.n_qubits > MC_MAX_QUBITS:
        raise ResourceLimit(
            f"Monte Carlo measures are capped at {MC_MAX_QUBITS} qubits, got {spec.n_qubits}"
        )
    if spec.n_qubits > 2 and sampler == BOX:
        raise InvalidArgument("states above two qubits need the Haar sampler")


def _default_sampler(spec: OrderedSpectrum, haar: bool) -> str:
    return HAAR if haar or spec.n_qubits > 2 else BOX


def _run_blocks(task, samples: int, workers: int | None) -> list:
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    jobs = list(enumerate(_block_sizes(samples)))
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda j: task(*j), jobs))
    return [task(b, m) for b, m in jobs]


def per_sample_terms(
    spec: OrderedSpectrum,
    samples: int,
    seed: int,
    kind: str,
    split: BipartiteSplit | None = None,
    cfg: OptimizerConfig | None = None,
    sampler: str | None = None,
    workers: int | None = None,
) -> tuple[np.ndarray, int]:
    """Per-sample integrand values and the count of non-converged optimizer starts.

    ``kind`` is one of ``"mi"`` (quantum mutual information), ``"modified"``
    (mutual information minus that of the diagonal part) and ``"discord"``
    (mutual information minus its optimized two-side measured value).
    """
    sampler = sampler or _default_sampler(spec, False)
    _check_spec(spec, sampler)
    split = split or BipartiteSplit((0,), tuple(range(1, spec.n_qubits)))
    split.check(spec.n_qubits)
    cfg = cfg or OptimizerConfig()
    if kind not in ("mi", "modified", "discord"):
        raise InvalidArgument(f"unknown integrand {kind!r}")

    def task(block: int, size: int):
        rng = _block_rng(seed, block)
        us = _block_unitaries(rng, size, spec.n_qubits, sampler)
        rhos = rotated_states(spec, us)
        mi = _quantum_mi(rhos, spec, split)
        if kind == "mi":
            return mi, 0
        if kind == "modified":
            return np.maximum(mi - _diagonal_mi(rhos, spec, split), 0.0), 0
        if spec.is_uniform():
            # every rotated state is exactly I/d: nothing to measure
            return np.zeros(size), 0
        if len(split.side_a) == 1 and len(split.side_b) == 1:
            sup, _, fails = sup_two_qubit_batch(rhos, cfg)
            return np.maximum(mi - sup, 0.0), int(fails.sum())
        sups = np.empty(size)
        fails = 0
        for k in range(size):
            sups[k], _, ok = _generic_sup(rhos[k], split, cfg)
            fails += not ok
        return np.maximum(mi - sups, 0.0), fails

    results = _run_blocks(task, samples, workers)
    values = np.concatenate([r[0] for r in results])
    return values, sum(r[1] for r in results)


def averaged_mutual_information(spec, samples: int, seed: int, *, haar=False, workers=None) -> McEstimate:
    vals, _ = per_sample_terms(spec, samples, seed, "mi", sampler=_default_sampler(spec, haar), workers=workers)
    return McEstimate.from_values(vals, seed)


def averaged_discord(
    spec, samples: int, seed: int, cfg: OptimizerConfig | None = None, *,
    split: BipartiteSplit | None = None, haar=False, workers=None,
) -> McEstimate:
    """Average over basis changes of the two-side discord (bits)."""
    vals, fails = per_sample_terms(
        spec, samples, seed, "discord", split=split, cfg=cfg,
        sampler=_default_sampler(spec, haar), workers=workers,
    )
    return McEstimate.from_values(vals, seed, fails)


def modified_averaged_discord(
    spec, samples: int, seed: int, *, split: BipartiteSplit | None = None, haar=False, workers=None,
) -> McEstimate:
    """Average of mutual information minus that of the diagonal part (bits)."""
    vals, _ = per_sample_terms(
        spec, samples, seed, "modified", split=split,
        sampler=_default_sampler(spec, haar), workers=workers,
    )
    return McEstimate.from_values(vals, seed)


def _check_budget(samples: int, have: int) -> None:
    if have < samples:
        raise InvalidArgument(
            f"normalization constants use {have} samples, fewer than the {samples} requested"
        )


def normalized_invariant_discord(
    spec, samples: int, seed: int, cfg: OptimizerConfig | None, consts: NormalizationConstants,
    *, workers=None,
) -> McEstimate:
    _check_budget(samples, consts.samples)
    est = averaged_discord(spec, samples, seed, cfg, workers=workers)
    return est.ratio(consts.plain)


def modified_normalized_discord(
    spec, samples: int, seed: int, consts: NormalizationConstants, *, workers=None,
) -> McEstimate:
    _check_budget(samples, consts.samples_up)
    est = modified_averaged_discord(spec, samples, seed, workers=workers)
    return est.ratio(consts.modified)


def compute_normalization_constants(
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
    samples_up: int | None = None,
    *,
    workers=None,
) -> NormalizationConstants:
    """Evaluate both averages at the pure two-qubit spectrum.

    ``samples_up`` sets the (cheaper) modified average's budget separately.
    """
    pure = OrderedSpectrum.pure(2)
    samples_up = samples if samples_up is None else samples_up
    plain = averaged_discord(pure, samples, seed, cfg, workers=workers)
    mod = modified_averaged_discord(pure, samples_up, seed, workers=workers)
    return NormalizationConstants(
        qbar_pure=plain.mean,
        qbar_up_pure=mod.mean,
        samples=samples,
        seed=seed,
        qbar_pure_stderr=plain.std_error,
        qbar_up_pure_stderr=mod.std_error,
        samples_up=samples_up,
    )


def default_cache_path() -> Path:
    env = os.environ.get("UDISCORD_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "udiscord" / "constants.json"


def save_constants(consts: NormalizationConstants, path=None) -> Path:
    """Write the cache atomically (temp file + rename)."""
    path = Path(path) if path is not None else default_cache_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(asdict(consts), indent=2, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".constants-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_constants(path=None) -> NormalizationConstants | None:
    path = Path(path) if path is not None else default_cache_path()
    if not path.exists():
        return None
    with open(path) as fh:
        data = json.load(fh)
    if data.get("entropy_base", 2) != 2:
        return None
    return NormalizationConstants(**data)


def sample_states(
    spec: OrderedSpectrum, samples: int, seed: int, sampler: str | None = None
) -> np.ndarray:
    """The rotated states behind an estimate, in sample order."""
    sampler = sampler or _default_sampler(spec, False)
    _check_spec(spec, sampler)
    blocks = [
        rotated_states(spec, _block_unitaries(_block_rng(seed, b), m, spec.n_qubits, sampler))
        for b, m in enumerate(_block_sizes(samples))
    ]
    return np.concatenate(blocks)


def estimates_by_split(
    spec: OrderedSpectrum,
    samples: int,
    seed: int,
    cfg: OptimizerConfig | None = None,
    variant: str = "modified",
    *,
    normalize: bool = True,
    haar: bool = False,
    workers=None,
) -> dict[BipartiteSplit, McEstimate]:
    """Per-split estimate for every bipartition.

    With ``normalize`` each split's average is divided by the same average
    at the pure spectrum, computed with the same samples.
    """
    if variant not in ("plain", "modified"):
        raise InvalidArgument(f"variant must be 'plain' or 'modified', got {variant!r}")
    sampler = _default_sampler(spec, haar)
    _check_spec(spec, sampler)
    pure = OrderedSpectrum.pure(spec.n_qubits)
    kind = "discord" if variant == "plain" else "modified"
    out = {}
    for split in all_bipartitions(spec.n_qubits):
        vals, fails = per_sample_terms(spec, samples, seed, kind, split, cfg, sampler, workers)
        est = McEstimate.from_values(vals, seed, fails)
        if normalize:
            pv, _ = per_sample_terms(pure, samples, seed, kind, split, cfg, sampler, workers)
            est = est.ratio(McEstimate.from_values(pv, seed))
        out[split] = est
    return out


def min_over_bipartitions(
    spec: OrderedSpectrum,
    samples: int,
    seed: int,
    cfg: OptimizerConfig | None = None,
    variant: str = "modified",
    *,
    normalize: bool = True,
    haar: bool = False,
    workers=None,
) -> tuple[McEstimate, BipartiteSplit]:
    """Smallest per-split estimate over all bipartitions, with its split."""
    per_split = estimates_by_split(
        spec, samples, seed, cfg, variant, normalize=normalize, haar=haar, workers=workers
    )
    split = min(per_split, key=lambda sp: per_split[sp].mean)
    return per_split[split], split


def reduced_pair_spectrum(spec: OrderedSpectrum, keep) -> OrderedSpectrum:
    """Spectrum of the two-qubit reduction of ``diag(spec)``.

    Eigenvalue ``i`` sits on the ``i``-th product basis vector.
    """
    keep = [int(q) for q in keep]
    if spec.n_qubits < 3:
        raise InvalidArgument("reduction to a pair needs at least three qubits")
    if len(keep) != 2 or len(set(keep)) != 2 or not all(0 <= q < spec.n_qubits for q in keep):
        raise InvalidArgument(f"keep must name two distinct qubits, got {keep}")
    red = partial_trace(spec.matrix(), keep)
    # the reduction of a diagonal matrix is diagonal
    return OrderedSpectrum.from_values(np.real(np.diag(red)), tol=1e-10)


def reduced_pair_discord(
    spec: OrderedSpectrum,
    keep,
    variant: str = "modified",
    samples: int = DEFAULT_SAMPLES_MODIFIED,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
    consts: NormalizationConstants | None = None,
    *,
    workers=None,
) -> McEstimate:
    """Normalized two-qubit measure of a pair of virtual qubits.

    ``variant`` is ``"plain"``, ``"modified"`` or ``"geometric"`` (exact,
    reported with zero error). Without ``consts`` the pure-state denominator
    is recomputed with the same samples, so a pure reduction gives exactly 1.
    """
    red = reduced_pair_spectrum(spec, keep)
    if variant == "geometric":
        from .geometric import geometric_measure

        return McEstimate(geometric_measure(red).normalized, 0.0, 1, seed)
    pure = OrderedSpectrum.pure(2)
    if variant == "modified":
        est = modified_averaged_discord(red, samples, seed, workers=workers)
        den = consts.modified if consts else modified_averaged_discord(pure, samples, seed, workers=workers)
    elif variant == "plain":
        est = averaged_discord(red, samples, seed, cfg, workers=workers)
        den = consts.plain if consts else averaged_discord(pure, samples, seed, cfg, workers=workers)
    else:
        raise InvalidArgument(f"unknown variant {variant!r}")
    return est.ratio(den)
