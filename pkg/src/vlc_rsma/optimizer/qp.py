"""Column-separable convex quadratics over per-row L1 balls.

Every solver here minimizes

    f(P) = sum_i  p_i^T A_i p_i - 2 b_i^T p_i,   subject to  ||P[l, :]||_1 <= radius

where ``p_i`` is column i of ``P`` (fixtures x streams), ``A`` has shape
(streams, fixtures, fixtures) with PSD blocks and ``b`` has shape
(streams, fixtures). Problems are tiny (at most a handful of fixtures and
three streams) and solved thousands of times per sweep, so the inner loops
are compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .config import SubproblemConfig


@numba.njit(cache=True)
def _project_inplace(P, radius):
    # Duchi et al. (2008) sort-based projection, one row at a time
    L, S = P.shape
    for l in range(L):
        total = 0.0
        for i in range(S):
            total += abs(P[l, i])
        if total <= radius:
            continue
        u = np.sort(np.abs(P[l]))[::-1]
        css = 0.0
        theta = 0.0
        for j in range(S):
            css += u[j]
            t = (css - radius) / (j + 1)
            if u[j] - t > 0:
                theta = t
        if theta < 0.0:
            theta = 0.0
        total = 0.0
        for i in range(S):
            v = abs(P[l, i]) - theta
            if v < 0.0:
                v = 0.0
            P[l, i] = v if P[l, i] >= 0 else -v
            total += v
        # rounding can leave a row a few ulps over the budget
        if total > radius:
            scale = radius / total
            for i in range(S):
                P[l, i] *= scale


@numba.njit(cache=True)
def _value(A, b, P):
    S, L, _ = A.shape
    f = 0.0
    for i in range(S):
        for l in range(L):
            acc = 0.0
            for m in range(L):
                acc += A[i, l, m] * P[m, i]
            f += P[l, i] * acc - 2.0 * b[i, l] * P[l, i]
    return f


@numba.njit(cache=True)
def _grad(A, b, P, out):
    S, L, _ = A.shape
    for i in range(S):
        for l in range(L):
            acc = 0.0
            for m in range(L):
                acc += A[i, l, m] * P[m, i]
            out[l, i] = 2.0 * (acc - b[i, l])


@numba.njit(cache=True)
def _fista(A, b, radius, x0, step, backtrack, tol, max_iter):
    x = x0.copy()
    _project_inplace(x, radius)
    y = x.copy()
    g = np.empty_like(x)
    fx = _value(A, b, x)
    t = 1.0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        _grad(A, b, y, g)
        fy = _value(A, b, y)
        while True:
            x_new = y - step * g
            _project_inplace(x_new, radius)
            d = x_new - y
            f_new = _value(A, b, x_new)
            if f_new <= fy + np.sum(g * d) + np.sum(d * d) / (2.0 * step) + 1e-12 * abs(fy):
                break
            step *= backtrack
        if f_new > fx:
            # momentum overshoot: restart from the last iterate
            t = 1.0
            y = x.copy()
            continue
        move = np.max(np.abs(x_new - x))
        if np.sum((y - x_new) * (x_new - x)) > 0:
            t = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_next) * (x_new - x)
        x = x_new
        fx = f_new
        t = t_next
        if move <= tol:
            converged = True
            break
    return x, fx, it, converged


@numba.njit(cache=True)
def _admm(inv, b, rho, radius, z0, tol, max_iter):
    S, L, _ = inv.shape
    z = z0.copy()
    _project_inplace(z, radius)
    v = np.zeros_like(z)
    x = np.zeros_like(z)
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        for i in range(S):
            for l in range(L):
                acc = 0.0
                for m in range(L):
                    acc += inv[i, l, m] * (2.0 * b[i, m] + rho * (z[m, i] - v[m, i]))
                x[l, i] = acc
        z_old = z
        z = x + v
        _project_inplace(z, radius)
        v = v + x - z
        primal = np.max(np.abs(x - z))
        dual = np.max(np.abs(z - z_old))
        if primal <= tol and dual <= tol:
            converged = True
            break
    return z, it, converged


def project_rows_l1(M, radius: float) -> np.ndarray:
    """Euclidean projection of each row of ``M`` onto the L1 ball of ``radius``."""
    out = np.array(M, dtype=float, order="C")
    _project_inplace(out, float(radius))
    return out


def quad_value(A, b, P) -> float:
    return float(_value(A, b, np.ascontiguousarray(P, dtype=float)))


def _lipschitz(A) -> float:
    if A.shape[1] == 1:
        return 2.0 * float(np.max(A[:, 0, 0], initial=0.0))
    return 2.0 * float(np.max(np.linalg.eigvalsh(A)[:, -1], initial=0.0))


@dataclass
class QPResult:
    P: np.ndarray
    value: float
    iterations: int
    converged: bool


def solve_pg(A, b, radius, P0, config: SubproblemConfig) -> QPResult:
    """Accelerated projected gradient (FISTA) with adaptive restart and backtracking."""
    lip = _lipschitz(A)
    if lip <= 0.0:
        lip = 1.0 / max(radius, 1e-300)
    step = config.step_scale / lip
    x, fx, it, conv = _fista(
        A, b, float(radius), np.array(P0, dtype=float), step, config.backtrack,
        config.tolerance * radius, config.max_iterations,
    )
    return QPResult(x, float(fx), int(it), bool(conv))


def solve_admm(A, b, radius, P0, config: SubproblemConfig) -> QPResult:
    """ADMM splitting: exact per-column quadratic step, then row-wise L1 projection."""
    L = A.shape[1]
    rho = config.admm_rho * max(_lipschitz(A), 1e-12)
    # x-update solves (2 A_i + rho I) p_i = 2 b_i + rho (z_i - v_i)
    inv = np.linalg.inv(2.0 * A + rho * np.eye(L)[None, :, :])
    z, it, conv = _admm(
        inv, b, rho, float(radius), np.array(P0, dtype=float), config.tolerance * radius, config.max_iterations
    )
    return QPResult(z, quad_value(A, b, z), int(it), bool(conv))


def polish(A, b, radius, P) -> np.ndarray:
    """Exact minimizer on the face identified by ``P``, or ``P`` itself.

    First-order methods find the support, the signs and the saturated rows
    long before they pin down the values. On that face the problem is an
    equality-constrained quadratic, solved here through its KKT system. The
    result is kept only if it stays on the face (same signs, rows within
    budget) and does not raise the objective.
    """
    L, S = P.shape
    tiny = 1e-12 * max(radius, 1e-300)
    support = np.abs(P) > tiny
    if not support.any():
        return P
    idx = np.argwhere(support)  # (l, i) pairs, row-major
    n = len(idx)
    sign = np.sign(P[support])
    active = [l for l in range(L) if support[l].any() and np.abs(P[l]).sum() >= radius * (1 - 1e-9)]
    Q = np.zeros((n, n))
    q = np.empty(n)
    for a, (l, i) in enumerate(idx):
        q[a] = 2.0 * b[i, l]
        for c, (m, j) in enumerate(idx):
            if i == j:
                Q[a, c] = 2.0 * A[i, l, m]
    C = np.zeros((len(active), n))
    for r, l in enumerate(active):
        for a, (m, _) in enumerate(idx):
            if m == l:
                C[r, a] = sign[a]
    K = np.block([[Q, C.T], [C, np.zeros((len(active), len(active)))]])
    rhs = np.concatenate([q, np.full(len(active), radius)])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return P
    x = sol[:n]
    if not np.all(np.isfinite(x)) or np.any(np.sign(x) != sign):
        return P
    out = np.zeros_like(P)
    out[support] = x
    if np.any(np.abs(out).sum(axis=1) > radius * (1 + 1e-12)):
        return P
    _project_inplace(out, float(radius))
    return out if _value(A, b, out) <= _value(A, b, P) else P


def solve_qp(A, b, radius, P0, config: SubproblemConfig) -> QPResult:
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if config.method == "admm":
        res = solve_admm(A, b, radius, P0, config)
    else:
        res = solve_pg(A, b, radius, P0, config)
    P = polish(A, b, radius, res.P)
    if P is not res.P:
        res = QPResult(P, quad_value(A, b, P), res.iterations, res.converged)
    # never hand back something worse than the feasible warm start
    start = project_rows_l1(P0, radius)
    f_start = quad_value(A, b, start)
    if f_start < res.value:
        return QPResult(start, f_start, res.iterations, res.converged)
    return res
