"""Block decompositions of the path chain and their structural checks.

The state space splits three ways: by the number k of up steps, then by
the level-step color word q, then by the up/down skeleton s.  Every
block inherits a restriction chain (reject moves that leave the block)
and induces a projection chain (pi-weighted aggregate transitions).
This module rebuilds all three levels from a verified model, compares
the projected k-distribution against its closed form, and checks the
product lower bound relating the full spectral gap to the projection
and restriction gaps.

Verification instrument only: dense spectral work keeps it to small m.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.special import logsumexp

from .energy import EnergyParams, path_energy
from .errors import EmptyBlockError, NotAPartitionError
from .exact import StateIndex, TransitionModel, build_transition_model, spectral_gap
from .paths import D, TwoMotzkinPath, U, catalan


@dataclass(frozen=True)
class PartitionLabel:
    """Classification of a path: up-step count, color word, skeleton."""

    k: int
    q: str
    s: str


def classify(x: TwoMotzkinPath) -> PartitionLabel:
    """Split a path into its (k, q, s) coordinates."""
    vertical = []
    level = []
    for sym in x.symbols:
        if sym == U or sym == D:
            vertical.append(sym)
        else:
            level.append(sym)
    return PartitionLabel(
        k=sum(1 for sym in vertical if sym == U),
        q=bytes(level).decode("ascii"),
        s=bytes(vertical).decode("ascii"),
    )


def blocks_by_k(index: StateIndex) -> dict[int, np.ndarray]:
    """State indices grouped by up-step count, keyed 0..floor(m/2)."""
    grouped: dict[int, list[int]] = {}
    for i, p in enumerate(index.paths):
        grouped.setdefault(p.symbols.count(U), []).append(i)
    return {k: np.array(v, dtype=int) for k, v in sorted(grouped.items())}


def blocks_by_kq(index: StateIndex) -> dict[tuple[int, str], np.ndarray]:
    grouped: dict[tuple[int, str], list[int]] = {}
    for i, p in enumerate(index.paths):
        label = classify(p)
        grouped.setdefault((label.k, label.q), []).append(i)
    return {key: np.array(v, dtype=int) for key, v in sorted(grouped.items())}


def blocks_by_kqs(index: StateIndex) -> dict[tuple[int, str, str], np.ndarray]:
    grouped: dict[tuple[int, str, str], list[int]] = {}
    for i, p in enumerate(index.paths):
        label = classify(p)
        grouped.setdefault((label.k, label.q, label.s), []).append(i)
    return {key: np.array(v, dtype=int) for key, v in sorted(grouped.items())}


@dataclass
class RestrictionModel:
    """The chain confined to one block; departures fold into the diagonal."""

    block: np.ndarray  # original state indices, in index order
    P: np.ndarray  # dense |block| x |block| kernel
    pi: np.ndarray  # stationary law: pi restricted and renormalized

    @property
    def n(self) -> int:
        return len(self.block)


def restriction_chain(model: TransitionModel, block: np.ndarray) -> RestrictionModel:
    """Restrict the kernel to ``block``, rejecting transitions that leave it."""
    block = np.asarray(block, dtype=int)
    if block.size == 0:
        raise EmptyBlockError("restriction over an empty block")
    sub = np.asarray(model.P[block][:, block].todense())
    # Rejected mass joins the self-loop, restoring stochastic rows.
    np.fill_diagonal(sub, sub.diagonal() + (1.0 - sub.sum(axis=1)))
    weight = model.pi[block]
    return RestrictionModel(block=block, P=sub, pi=weight / weight.sum())


@dataclass
class ProjectionModel:
    """Aggregate chain over blocks with pi-weighted transitions."""

    labels: list
    P: np.ndarray
    pi: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)


def _project(
    P: sp.spmatrix, pi: np.ndarray, blocks: list[np.ndarray], labels: list | None
) -> ProjectionModel:
    n = len(pi)
    flat = np.concatenate([np.asarray(b, dtype=int) for b in blocks])
    if flat.size != n or len(np.unique(flat)) != n:
        raise NotAPartitionError("blocks must partition the state space")
    n_blocks = len(blocks)
    membership = np.empty(n, dtype=int)
    for b_idx, block in enumerate(blocks):
        membership[np.asarray(block, dtype=int)] = b_idx
    # Aggregate flows pi(x) P(x, y) by block of x and block of y.
    flow = P.multiply(pi[:, None]).tocoo()
    P_bar = np.zeros((n_blocks, n_blocks))
    np.add.at(P_bar, (membership[flow.row], membership[flow.col]), flow.data)
    pi_bar = np.array([pi[np.asarray(b, dtype=int)].sum() for b in blocks])
    P_bar /= pi_bar[:, None]
    return ProjectionModel(
        labels=list(labels) if labels is not None else list(range(n_blocks)),
        P=P_bar,
        pi=pi_bar,
    )


def projection_chain(
    model: TransitionModel,
    blocks: list[np.ndarray],
    labels: list | None = None,
) -> ProjectionModel:
    """Project the kernel onto a partition of the state space."""
    return _project(model.P, model.pi, blocks, labels)


def projected_k_distribution(m: int, params: EnergyParams) -> np.ndarray:
    """Closed-form law of the up-step count k under the Gibbs distribution.

    The block weight is binom(m, 2k) * catalan(k) * exp(-alpha k)
    * (exp(-alpha) + exp(-beta))^(m - 2k), normalized in log space.
    """
    a, b = params.alpha, params.beta
    log_t = np.logaddexp(-a, -b)
    ks = np.arange(m // 2 + 1)
    log_w = np.array(
        [
            float(np.log(comb(m, 2 * k) * catalan(k))) - a * k + (m - 2 * k) * log_t
            for k in ks
        ]
    )
    return np.exp(log_w - logsumexp(log_w))


def dense_gap(P: np.ndarray, pi: np.ndarray) -> float:
    """Spectral gap of a small reversible kernel; one-state chains get gap 1."""
    if len(pi) == 1:
        return 1.0
    root = np.sqrt(pi)
    sym = (root[:, None] * P) / root[None, :]
    eigvals = scipy.linalg.eigvalsh(sym)
    return float(1.0 - eigvals[-2])


@dataclass
class SkeletonProjectionReport:
    """Structure of one (k, q) block: skeleton family sizes and the induced
    chain over skeletons."""

    m: int
    k: int
    q: str
    skeleton_sizes: dict[str, int]
    expected_size: int
    sizes_match: bool
    energy_spread: float
    pi_uniform_maxdev: float
    offdiag_values: list[float]
    offdiag_expected: float
    offdiag_maxdev: float

    @property
    def uniform_ok(self) -> bool:
        return self.pi_uniform_maxdev <= 1e-12

    @property
    def matches_expected_rate(self) -> bool:
        return self.offdiag_maxdev <= 1e-12 * max(self.offdiag_expected, 1.0)


def check_skeleton_projection(
    m: int,
    k: int,
    q: str,
    params: EnergyParams,
    model: TransitionModel | None = None,
) -> SkeletonProjectionReport:
    """Verify the skeleton-level structure of the block with coordinates (k, q).

    Checks that every skeleton family inside the block has size
    binom(m, 2k), that all block states share one energy, that the
    projected chain over skeletons is uniform, and reports the measured
    off-diagonal projected rates next to the nominal 1 / (4 m^2).
    """
    if model is None:
        model = build_transition_model(m, params)
    block_map = blocks_by_kqs(model.index)
    families = {s: idx for (kk, qq, s), idx in block_map.items() if kk == k and qq == q}
    if not families:
        raise EmptyBlockError(f"no states with k={k}, q={q!r} at m={m}")
    expected_size = comb(m, 2 * k)
    sizes = {s: len(idx) for s, idx in families.items()}

    block = np.concatenate(list(families.values()))
    energies = np.array([path_energy(model.index.paths[i], params) for i in block])
    energy_spread = float(energies.max() - energies.min())

    restricted = restriction_chain(model, block)
    # Positions of each skeleton family inside the restricted ordering.
    offsets = np.cumsum([0] + [len(idx) for idx in families.values()])
    sub_blocks = [np.arange(offsets[j], offsets[j + 1]) for j in range(len(families))]
    proj = _project(
        sp.csr_matrix(restricted.P), restricted.pi, sub_blocks, list(families)
    )
    uniform = np.full(proj.n, 1.0 / proj.n)
    pi_dev = float(np.abs(proj.pi - uniform).max())
    off = proj.P[~np.eye(proj.n, dtype=bool)]
    positive = [float(v) for v in off if v > 0.0]
    expected_rate = 1.0 / (4.0 * m * m)
    maxdev = max((abs(v - expected_rate) for v in positive), default=0.0)
    return SkeletonProjectionReport(
        m=m,
        k=k,
        q=q,
        skeleton_sizes=sizes,
        expected_size=expected_size,
        sizes_match=all(v == expected_size for v in sizes.values()),
        energy_spread=energy_spread,
        pi_uniform_maxdev=pi_dev,
        offdiag_values=positive,
        offdiag_expected=expected_rate,
        offdiag_maxdev=maxdev,
    )


@dataclass
class DecompositionBoundReport:
    """Gap(P) versus the product bound from one partition level."""

    gap_full: float
    gap_projection: float
    restriction_gaps: dict
    min_restriction_gap: float
    bound: float
    holds: bool


def check_decomposition_bound(
    model: TransitionModel,
    blocks: list[np.ndarray] | None = None,
    labels: list | None = None,
) -> DecompositionBoundReport:
    """Check Gap(P) >= 1/2 * Gap(projection) * min(block restriction gaps).

    Defaults to the up-step-count partition.  One-state blocks contribute
    gap 1 so the product stays meaningful.
    """
    if blocks is None:
        by_k = blocks_by_k(model.index)
        labels = list(by_k)
        blocks = list(by_k.values())
    gap_full = spectral_gap(model, method="dense").gap
    proj = projection_chain(model, blocks, labels=labels)
    gap_proj = dense_gap(proj.P, proj.pi)
    restriction_gaps = {}
    for label, block in zip(proj.labels, blocks):
        restricted = restriction_chain(model, block)
        restriction_gaps[label] = dense_gap(restricted.P, restricted.pi)
    min_gap = min(restriction_gaps.values())
    bound = 0.5 * gap_proj * min_gap
    return DecompositionBoundReport(
        gap_full=gap_full,
        gap_projection=gap_proj,
        restriction_gaps=restriction_gaps,
        min_restriction_gap=min_gap,
        bound=bound,
        holds=gap_full >= bound - 1e-13,
    )


def decomposition_report(m: int, params: EnergyParams, level: str = "k") -> dict:
    """JSON-ready structural report at the requested partition depth."""
    if level not in ("k", "kq", "kqs"):
        raise ValueError(f"level must be one of k, kq, kqs; got {level!r}")
    model = build_transition_model(m, params)
    by_k = blocks_by_k(model.index)

    closed = projected_k_distribution(m, params)
    pi_bar = np.array([model.pi[idx].sum() for idx in by_k.values()])
    bound = check_decomposition_bound(model)
    log_closed = np.log(closed)
    interior = range(1, len(closed) - 1)
    report: dict = {
        "m": m,
        "params": {"alpha": params.alpha, "beta": params.beta},
        "level": level,
        "k_partition": {
            "block_sizes": {int(k): int(len(idx)) for k, idx in by_k.items()},
            "pi_bar_closed_form": closed.tolist(),
            "pi_bar_from_model": pi_bar.tolist(),
            "pi_bar_max_abs_diff": float(np.abs(closed - pi_bar).max()),
            "log_concave": bool(
                all(
                    2 * log_closed[i] + 1e-12 >= log_closed[i - 1] + log_closed[i + 1]
                    for i in interior
                )
            ),
            "gap_full": bound.gap_full,
            "gap_projection": bound.gap_projection,
            "restriction_gaps": {int(k): float(v) for k, v in bound.restriction_gaps.items()},
            "product_bound": bound.bound,
            "bound_holds": bound.holds,
        },
    }
    if level in ("kq", "kqs"):
        by_kq = blocks_by_kq(model.index)
        spreads = []
        for (k, q), idx in by_kq.items():
            energies = [path_energy(model.index.paths[i], params) for i in idx]
            spreads.append(max(energies) - min(energies))
        report["kq_partition"] = {
            "num_blocks": len(by_kq),
            "block_size_formula_ok": all(
                len(idx) == comb(m, 2 * k) * catalan(k) for (k, q), idx in by_kq.items()
            ),
            "max_energy_spread_within_block": float(max(spreads)),
        }
    if level == "kqs":
        rows = []
        all_sizes_ok = True
        all_uniform_ok = True
        all_rates_ok = True
        for (k, q) in blocks_by_kq(model.index):
            rep = check_skeleton_projection(m, k, q, params, model=model)
            all_sizes_ok &= rep.sizes_match
            all_uniform_ok &= rep.uniform_ok
            all_rates_ok &= rep.matches_expected_rate
            rows.append(
                {
                    "k": k,
                    "q": q,
                    "family_size": rep.expected_size,
                    "sizes_match": rep.sizes_match,
                    "pi_uniform_maxdev": rep.pi_uniform_maxdev,
                    "offdiag_maxdev": rep.offdiag_maxdev,
                }
            )
        report["kqs_partition"] = {
            "family_size_binomial_ok": bool(all_sizes_ok),
            "skeleton_projection_uniform_ok": bool(all_uniform_ok),
            "offdiag_rate_expected": 1.0 / (4.0 * m * m),
            "offdiag_rate_matches": bool(all_rates_ok),
            "blocks": rows,
        }
    return report
