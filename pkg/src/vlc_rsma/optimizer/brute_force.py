"""Exhaustive grid search over precoders, used as an optimality oracle.

Each fixture row is enumerated over the signed lattice ``(eps / n) * z`` with
integer ``z`` and ``||z||_1 <= n``; all combinations of rows are evaluated in
vectorized chunks. Grids with ``n`` a multiple of a coarser ``n`` contain the
coarser grid, so refining never lowers the result.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..schemes import StreamPlan
from .wmmse import Problem, Solution, make_solution, resolve_instance

MAX_FIXTURES = 2
MAX_STREAMS = 3
SPLIT_GRID = 11
_CHUNK_ELEMENTS = 4_000_000


def lattice_rows(n_streams: int, steps: int) -> np.ndarray:
    """All integer vectors of length ``n_streams`` with L1 norm <= ``steps``, lexicographic."""
    rng = range(-steps, steps + 1)
    rows = [z for z in itertools.product(rng, repeat=n_streams) if sum(abs(v) for v in z) <= steps]
    return np.array(rows, dtype=float)


def _split_coefficient(problem: Problem) -> float:
    """Best weight on the common rate over a 1-D grid of splits between holders.

    The WSR is linear in the split, so the grid search lands on the
    highest-weight holder; kept as a search to stay independent of the
    optimizer's closed-form allocation.
    """
    c = problem.plan.common_index
    if c is None:
        return 0.0
    holders = sorted(problem.plan.streams[c].holders)
    w = problem.weights
    if len(holders) == 1:
        return float(w[holders[0]])
    best = -np.inf
    for theta in np.linspace(0.0, 1.0, SPLIT_GRID):
        for a, b in itertools.permutations(holders, 2):
            best = max(best, theta * w[a] + (1.0 - theta) * w[b])
    return float(best)


def _batch_wsr(problem: Problem, eff: np.ndarray, common_weight: float) -> np.ndarray:
    """WSR for a batch of effective-gain tensors of shape (..., users, streams)."""
    plan = problem.plan
    sq = eff * eff
    private = list(plan.private_indices)
    priv_power = sq[..., private].sum(axis=-1)  # (..., users)
    noise = problem.noise
    total = np.zeros(eff.shape[:-2])
    for k in range(plan.n_users):
        i = plan.private_of(k)
        if i is not None:
            interf = priv_power[..., k] - sq[..., k, i] + noise[k]
            total += problem.weights[k] * np.log2(1.0 + sq[..., k, i] / interf)
    c = plan.common_index
    if c is not None:
        rates = [
            np.log2(1.0 + sq[..., k, c] / (priv_power[..., k] + noise[k])) for k in plan.streams[c].decoders
        ]
        total += common_weight * np.minimum.reduce(rates)
    return total


def brute_force_wsr(target, plan: StreamPlan, weights, epsilon: float, grid_resolution: float, noise_vars=None) -> Solution:
    """Best WSR over a signed lattice of precoders with spacing ``grid_resolution``.

    ``grid_resolution`` is an amplitude step; ``epsilon / grid_resolution``
    is rounded to the nearest integer number of lattice steps.
    """
    H, noise = resolve_instance(target, plan, epsilon, noise_vars)
    problem = Problem.build(H, noise, weights, plan, epsilon)
    L, S = problem.shape
    if L > MAX_FIXTURES or S > MAX_STREAMS:
        raise ValueError(
            f"brute force limited to {MAX_FIXTURES} fixtures and {MAX_STREAMS} streams, got {L} x {S}"
        )
    if not grid_resolution > 0:
        raise ValueError("grid_resolution must be positive")
    steps = max(1, int(round(epsilon / grid_resolution)))
    rows = lattice_rows(S, steps) * (epsilon / steps)
    N = len(rows)
    Hm = problem.H
    common_weight = _split_coefficient(problem)

    # contribution of fixture l with row candidate r to every user's effective gains
    contrib = Hm.T[:, None, :, None] * rows[None, :, None, :]  # (L, N, users, streams)
    if L == 1:
        values = _batch_wsr(problem, contrib[0], common_weight)
        best_idx = (int(np.argmax(values)),)
    else:
        chunk = max(1, _CHUNK_ELEMENTS // (N * Hm.shape[0] * S))
        best_val, best_idx = -np.inf, None
        for start in range(0, N, chunk):
            eff = contrib[0, start : start + chunk, None] + contrib[1][None, :]
            values = _batch_wsr(problem, eff, common_weight)
            flat = int(np.argmax(values))
            if values.flat[flat] > best_val:
                best_val = float(values.flat[flat])
                a, b = np.unravel_index(flat, values.shape)
                best_idx = (start + int(a), int(b))
    P = np.stack([rows[i] for i in best_idx])
    return make_solution(problem, P, iterations=0, trace=[problem.wsr(P)], converged=True, flags=("brute_force",))
