"""Exhaustive small-instance ground truth for the path chain.

Builds the full transition matrix over all catalan(m + 1) states, the
exact Gibbs distribution, and spectral diagnostics.  Everything here is
a verification instrument: state spaces are enumerated, matrices are
sparse but complete, and every model is checked for stochasticity,
stationarity, and detailed balance before it is handed out.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .chain import transition_distribution
from .energy import EnergyParams, path_energy
from .errors import (
    BalanceViolationError,
    CapExceededError,
    ConfigInvalidError,
    LengthMismatchError,
    NoConvergenceError,
)
from .paths import TwoMotzkinPath, enumerate_paths

EXACT_CAP = 10  # catalan(11) = 58786 states; sparse machinery only
DENSE_CAP_STATES = 5000  # above this the eigensolver switches to power iteration

_POWER_SEED = 0x5EED


@dataclass(frozen=True)
class StateIndex:
    """Bidirectional map between paths of length m and dense indices."""

    m: int
    paths: tuple[TwoMotzkinPath, ...]
    _pos: dict[bytes, int]

    @classmethod
    def build(cls, m: int, cap: int = EXACT_CAP) -> "StateIndex":
        if m > cap:
            raise CapExceededError("exact state space length m", m, cap)
        paths = tuple(enumerate_paths(m))
        pos = {p.symbols: i for i, p in enumerate(paths)}
        return cls(m=m, paths=paths, _pos=pos)

    def __len__(self) -> int:
        return len(self.paths)

    def index_of(self, path: TwoMotzkinPath) -> int:
        return self._pos[path.symbols]

    def order_hash(self) -> str:
        """SHA-256 of the newline-joined state order; identifies the indexing."""
        return hashlib.sha256(b"\n".join(p.symbols for p in self.paths)).hexdigest()


@dataclass
class TransitionModel:
    """Verified sparse kernel with its stationary law over an enumerated space."""

    index: StateIndex
    params: EnergyParams
    P: sp.csr_matrix
    pi: np.ndarray
    log_z: float

    @property
    def n(self) -> int:
        return len(self.pi)


@dataclass(frozen=True)
class SpectralReport:
    """Second eigenvalue diagnostics of a verified model."""

    lambda1: float
    gap: float
    relaxation_time: float
    method: str
    residual: float
    iterations: int = 0


def gibbs_distribution(
    m: int,
    params: EnergyParams,
    cap: int = EXACT_CAP,
    index: StateIndex | None = None,
) -> tuple[np.ndarray, float]:
    """Exact Gibbs law over all paths of length m and its log partition value."""
    if index is None:
        index = StateIndex.build(m, cap)
    log_w = np.array([-path_energy(p, params) for p in index.paths])
    log_z = float(logsumexp(log_w))
    return np.exp(log_w - log_z), log_z


def build_transition_model(
    m: int,
    params: EnergyParams,
    cap: int = EXACT_CAP,
    verify: bool = True,
) -> TransitionModel:
    """Assemble and verify the full kernel at length m.

    Raises :class:`BalanceViolationError` if row sums, stationarity, or
    detailed balance fail their 1e-12-scale checks.
    """
    index = StateIndex.build(m, cap)
    pi, log_z = gibbs_distribution(m, params, cap=cap, index=index)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i, x in enumerate(index.paths):
        for target, mass in transition_distribution(x, params).items():
            rows.append(i)
            cols.append(index._pos[target])
            vals.append(mass)
    n = len(index)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    model = TransitionModel(index=index, params=params, P=P, pi=pi, log_z=log_z)
    if verify:
        verify_model(model)
    return model


def verify_model(model: TransitionModel, tol: float = 1e-12) -> None:
    """Stochasticity, stationarity, and detailed balance, or raise."""
    row_err = float(np.abs(np.asarray(model.P.sum(axis=1)).ravel() - 1.0).max())
    if row_err > tol:
        raise BalanceViolationError(f"row sums off by {row_err:.3e}", magnitude=row_err)
    stat_err = stationarity_residual(model)
    if stat_err > tol:
        raise BalanceViolationError(f"pi P != pi, residual {stat_err:.3e}", magnitude=stat_err)
    worst, pair = detailed_balance_violation(model)
    flow_scale = float((model.P.multiply(model.pi[:, None])).max())
    if worst > tol * flow_scale:
        x, y = pair
        raise BalanceViolationError(
            f"detailed balance violated by {worst:.3e} at pair "
            f"({model.index.paths[x].word!r}, {model.index.paths[y].word!r})",
            worst_pair=pair,
            magnitude=worst,
        )


def stationarity_residual(model: TransitionModel) -> float:
    """Max-norm of pi^T P - pi^T."""
    return float(np.abs(model.pi @ model.P - model.pi).max())


def detailed_balance_violation(model: TransitionModel) -> tuple[float, tuple[int, int]]:
    """Largest |pi(x)P(x,y) - pi(y)P(y,x)| and the offending index pair."""
    flow = model.P.multiply(model.pi[:, None]).tocsr()
    asym = (flow - flow.T).tocoo()
    if asym.nnz == 0:
        return 0.0, (0, 0)
    k = int(np.abs(asym.data).argmax())
    return float(abs(asym.data[k])), (int(asym.row[k]), int(asym.col[k]))


def is_strongly_connected(model: TransitionModel) -> bool:
    """Strong connectivity of the positive-transition directed graph."""
    off = model.P.tocoo()
    mask = off.row != off.col
    graph = sp.csr_matrix(
        (np.ones(mask.sum()), (off.row[mask], off.col[mask])), shape=off.shape
    )
    n_comp, _ = connected_components(graph, directed=True, connection="strong")
    return n_comp == 1


def _symmetrized(P: sp.csr_matrix, pi: np.ndarray) -> sp.csr_matrix:
    """Similarity transform diag(pi)^{1/2} P diag(pi)^{-1/2} (symmetric when
    the chain is reversible)."""
    root = np.sqrt(pi)
    return sp.diags(root) @ P @ sp.diags(1.0 / root)


def spectral_gap(
    model: TransitionModel,
    method: str = "auto",
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
    dense_cap: int = DENSE_CAP_STATES,
    seed: int = _POWER_SEED,
) -> SpectralReport:
    """Second-largest eigenvalue modulus of the kernel and the gap 1 - lambda1.

    Dense path: full symmetric eigensolve.  Iterative path: power
    iteration on the symmetrized matrix, deflating the top eigenvector
    sqrt(pi) each step.  Laziness makes the spectrum nonnegative, so the
    modulus equals the second eigenvalue itself.
    """
    n = model.n
    if n < 2:
        raise ConfigInvalidError("spectral gap needs at least two states")
    if method == "auto":
        method = "dense" if n <= dense_cap else "power-iteration"

    A = _symmetrized(model.P, model.pi)
    if method == "dense":
        eigvals = scipy.linalg.eigvalsh(A.toarray())
        lambda1 = float(eigvals[-2])
        residual = float(abs(eigvals[-1] - 1.0))
        iterations = 0
    elif method == "power-iteration":
        lambda1, residual, iterations = _deflated_power_iteration(A, model.pi, tol, max_iter, seed)
    else:
        raise ValueError(f"unknown spectral method {method!r}")

    gap = 1.0 - lambda1
    return SpectralReport(
        lambda1=lambda1,
        gap=gap,
        relaxation_time=1.0 / gap,
        method=method,
        residual=residual,
        iterations=iterations,
    )


def _deflated_power_iteration(
    A: sp.spmatrix, pi: np.ndarray, tol: float, max_iter: int, seed: int
) -> tuple[float, float, int]:
    top = np.sqrt(pi)
    top /= np.linalg.norm(top)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(len(pi))
    v -= (top @ v) * top
    v /= np.linalg.norm(v)
    lam = 0.0
    residual = float("inf")
    check_every = 20
    for it in range(1, max_iter + 1):
        w = A @ v
        w -= (top @ w) * top
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, 0.0, it  # kernel is rank one off the top eigenvector
        w /= norm
        if it % check_every == 0 or it == max_iter:
            av = A @ w
            av -= (top @ av) * top
            lam = float(w @ av)
            residual = float(np.linalg.norm(av - lam * w))
            if residual <= tol:
                return lam, residual, it
        v = w
    raise NoConvergenceError(max_iter, residual)


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance (half the L1 distance) between two laws."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatchError(f"distributions of size {p.size} and {q.size}")
    return float(0.5 * np.abs(p - q).sum())


def tv_decay_curve(
    model: TransitionModel,
    x0: TwoMotzkinPath | int,
    horizon: int,
) -> list[tuple[int, float]]:
    """TV(P^t(x0, .), pi) for t = 0..horizon via iterated row products."""
    if horizon < 0:
        raise ConfigInvalidError("horizon must be nonnegative")
    start = x0 if isinstance(x0, int) else model.index.index_of(x0)
    dist = np.zeros(model.n)
    dist[start] = 1.0
    curve = [(0, tv_distance(dist, model.pi))]
    for t in range(1, horizon + 1):
        dist = dist @ model.P
        curve.append((t, tv_distance(dist, model.pi)))
    return curve


def empirical_distribution(
    occupancy: dict[bytes, int], index: StateIndex
) -> np.ndarray:
    """Normalized visit counts aligned with a state index."""
    total = sum(occupancy.values())
    if total == 0:
        raise ConfigInvalidError("occupancy is empty")
    out = np.zeros(len(index))
    for key, count in occupancy.items():
        out[index._pos[key]] = count / total
    return out
