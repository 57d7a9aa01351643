"""WMMSE alternating optimization for weighted-sum-rate precoding.

Rate/MSE relationship. With the MMSE receiver, every decoded stream has
rate ``-log2(e)`` where ``e`` is its minimum MSE, and for any receive
coefficient ``g`` and weight ``u > 0``

    -log2(e*) = max_{g, u}  log2(u) + (1 - u * e(g, P)) / ln 2 =: max psi(g, u, P)

with the maximum at ``g = MMSE coefficient`` and ``u = 1 / e*``. For fixed
``(g, u)``, ``psi`` is a concave quadratic in the precoder and a lower bound
on the rate, tight at the precoder the pair was computed from.

The common-rate constraint ``sum_k c_k <= min_j R_common_j`` with ``c >= 0``
puts the whole common rate on the highest-weight holder, so the precoder
subproblem is

    max_P  sum_k w_k psi_k(P) + W * max(0, min_j psi_common_j(P))   s.t. row L1 <= eps.

This is the larger of two concave problems: the private-only one and the one
with ``min_j``. The second is solved through its Lagrange dual over the
decoder multipliers, each dual evaluation being a column-separable quadratic
over per-row L1 balls (see ``qp``). Because the current precoder is always
among the candidates and the surrogate is tight there, the true WSR never
decreases across AO steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from ..geometry import ChannelMatrix, RoomScenario, channel_matrix
from ..noise import normalized_variance
from ..schemes import NOMA, RSMA, SDMA, Precoder, RateReport, Stream, StreamPlan, default_split, rate_report
from .config import OptimizerConfig, SubproblemConfig
from .qp import project_rows_l1, solve_qp

LN2 = math.log(2.0)
TRACE_SLACK = 1e-9
_DUAL_TOL = 1e-7
_DUAL_MAX_EVALS = 24
_DUAL_STEP = 0.05


@dataclass(frozen=True)
class Problem:
    """A WSR instance plus precomputed decoding-event bookkeeping."""

    H: np.ndarray  # users x fixtures
    noise: np.ndarray  # per-user noise variance
    weights: np.ndarray
    plan: StreamPlan
    epsilon: float
    # one "term" per (stream, decoding user) event
    term_stream: np.ndarray
    term_user: np.ndarray
    term_visible: np.ndarray  # streams present when the term's stream is decoded
    term_interf: np.ndarray  # visible minus the stream itself
    term_common: np.ndarray
    outer: np.ndarray  # h h^T of the term's user
    holder_weight: float

    @classmethod
    def build(cls, H, noise, weights, plan: StreamPlan, epsilon: float) -> "Problem":
        H = np.array(H.gains if isinstance(H, ChannelMatrix) else H, dtype=float)
        K, L = H.shape
        if K != plan.n_users:
            raise ValueError(f"channel has {K} users but plan expects {plan.n_users}")
        if not epsilon > 0:
            raise ValueError(f"amplitude budget must be > 0, got {epsilon}")
        if not np.any(H > 0):
            raise ValueError("channel matrix is identically zero")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (K,) or np.any(weights < 0):
            raise ValueError("weights must be nonnegative, one per user")
        noise = np.broadcast_to(np.asarray(noise, dtype=float), (K,)).copy()
        if np.any(noise <= 0):
            raise ValueError("noise variances must be positive")
        S = plan.n_streams
        private_mask = np.array([not s.is_common for s in plan.streams], dtype=float)
        streams, users, visible, interf, common = [], [], [], [], []
        for x, s in enumerate(plan.streams):
            vis = np.ones(S) if s.is_common else private_mask.copy()
            for k in (s.decoders if s.is_common else (s.user,)):
                own = np.zeros(S)
                own[x] = 1.0
                streams.append(x)
                users.append(k)
                visible.append(vis)
                interf.append(vis - own)
                common.append(s.is_common)
        c = plan.common_index
        if c is not None and len(plan.streams[c].decoders) > 2:
            raise NotImplementedError("precoder optimization supports common streams with at most two decoders")
        holder = plan.common_holder(weights)
        users = np.array(users, dtype=int)
        return cls(
            H=H,
            noise=noise,
            weights=weights,
            plan=plan,
            epsilon=float(epsilon),
            term_stream=np.array(streams, dtype=int),
            term_user=users,
            term_visible=np.array(visible),
            term_interf=np.array(interf),
            term_common=np.array(common, dtype=bool),
            outer=np.einsum("tl,tm->tlm", H[users], H[users]),
            holder_weight=float(weights[holder]) if holder is not None else 0.0,
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.H.shape[1], self.plan.n_streams

    def term_powers(self, P):
        """Per term: own effective gain, interference power, total visible power."""
        eff = (self.H @ P)[self.term_user]  # (T, S)
        own = eff[np.arange(len(self.term_stream)), self.term_stream]
        sq = eff * eff
        interf = np.sum(self.term_interf * sq, axis=1) + self.noise[self.term_user]
        return own, interf, interf + own * own

    def term_rates(self, P) -> np.ndarray:
        own, interf, total = self.term_powers(P)
        return np.log2(total / interf)

    def wsr(self, P) -> float:
        """True WSR with the whole common rate on the highest-weight holder."""
        rates = self.term_rates(P)
        value = float(np.sum(self.weights[self.term_user[~self.term_common]] * rates[~self.term_common]))
        if np.any(self.term_common):
            value += self.holder_weight * float(np.min(rates[self.term_common]))
        return value


def mmse_terms(problem: Problem, P) -> Tuple[np.ndarray, np.ndarray]:
    """MMSE receive coefficients and the resulting minimum MSEs, per term."""
    own, interf, total = problem.term_powers(P)
    return own / total, interf / total


def surrogate_terms(problem: Problem, g, u, P) -> np.ndarray:
    """psi(g, u, P) per term: a concave lower bound on each term's rate."""
    eff = (problem.H @ P)[problem.term_user]
    own = eff[np.arange(len(problem.term_stream)), problem.term_stream]
    visible = np.sum(problem.term_visible * eff * eff, axis=1) + problem.noise[problem.term_user]
    mse = g * g * visible - 2.0 * g * own + 1.0
    return np.log2(u) + (1.0 - u * mse) / LN2


def surrogate_value(problem: Problem, g, u, P) -> float:
    psi = surrogate_terms(problem, g, u, P)
    priv = ~problem.term_common
    value = float(np.sum(problem.weights[problem.term_user[priv]] * psi[priv]))
    if np.any(problem.term_common):
        value += problem.holder_weight * max(0.0, float(np.min(psi[problem.term_common])))
    return value


def _quadratic(problem: Problem, g, u, coeff):
    """(A, b) of  sum_t coeff_t u_t e_t(P)  in the column-separable form used by ``qp``."""
    cu = coeff * u
    curv = (cu * g * g)[:, None] * problem.term_visible  # (T, S)
    A = np.einsum("ti,tlm->ilm", curv, problem.outer)
    lin = np.zeros((len(coeff), problem.plan.n_streams))
    lin[np.arange(len(coeff)), problem.term_stream] = cu * g
    b = lin.T @ problem.H[problem.term_user]
    return A, b


@dataclass(frozen=True)
class SubproblemResult:
    P: np.ndarray
    common_split: np.ndarray
    value: float
    dual: float
    converged: bool


def _split_for(problem: Problem, P) -> np.ndarray:
    rates = problem.term_rates(P)
    common = float(np.min(rates[problem.term_common])) if np.any(problem.term_common) else 0.0
    return default_split(problem.plan, problem.weights, max(common, 0.0))


def solve_precoder_subproblem(
    problem: Problem,
    equalizers,
    mse_weights,
    P_start,
    subconfig: SubproblemConfig = SubproblemConfig(),
    dual_start: float = 0.5,
) -> SubproblemResult:
    """Maximize the WMMSE surrogate over the precoder for fixed equalizers and MSE weights.

    ``P_start`` must be feasible; it warm-starts the inner solver and is kept
    as a fallback candidate, so the returned value is never below its value.
    """
    g = np.asarray(equalizers, dtype=float)
    u = np.asarray(mse_weights, dtype=float)
    eps = problem.epsilon
    plan = problem.plan
    priv_coeff = np.where(problem.term_common, 0.0, problem.weights[problem.term_user])
    value = lambda P: surrogate_value(problem, g, u, P)  # noqa: E731

    candidates = [np.array(P_start, dtype=float)]
    all_converged = True

    # private-only branch: the common column is released to zero
    A, b = _quadratic(problem, g, u, priv_coeff)
    c = plan.common_index
    if c is None:
        res = solve_qp(A, b, eps, P_start, subconfig)
        candidates.append(res.P)
        all_converged &= res.converged
        dual = 0.0
    else:
        keep = [i for i in range(plan.n_streams) if i != c]
        start = np.array(P_start, dtype=float)[:, keep]
        res = solve_qp(A[keep], b[keep], eps, start, subconfig)
        P0 = np.zeros(problem.shape)
        P0[:, keep] = res.P
        candidates.append(P0)
        all_converged &= res.converged

        decoders = plan.streams[c].decoders
        term_of = {k: int(np.flatnonzero(problem.term_common & (problem.term_user == k))[0]) for k in decoders}
        W = problem.holder_weight

        def dual_eval(s, warm):
            coeff = priv_coeff.copy()
            if len(decoders) == 1:
                coeff[term_of[decoders[0]]] = W
            else:
                coeff[term_of[decoders[0]]] = W * s
                coeff[term_of[decoders[1]]] = W * (1.0 - s)
            A_s, b_s = _quadratic(problem, g, u, coeff)
            r = solve_qp(A_s, b_s, eps, warm, subconfig)
            psi = surrogate_terms(problem, g, u, r.P)
            slope = W * (psi[term_of[decoders[0]]] - psi[term_of[decoders[-1]]])
            return r, slope

        if len(decoders) == 1 or W == 0.0:
            r, _ = dual_eval(1.0, P_start)
            candidates.append(r.P)
            all_converged &= r.converged
            dual = 1.0
        else:
            dual, extra, conv = _dual_search(dual_eval, P_start, dual_start, eps)
            candidates.extend(extra)
            all_converged &= conv
            lo, hi = extra[-2], extra[-1]
            candidates.append(_segment_search(problem, g, u, lo, hi, eps))

    values = [value(P) for P in candidates]
    best = int(np.argmax(values))  # first index wins ties, so P_start is preferred
    P_best = candidates[best]
    return SubproblemResult(P_best, _split_for(problem, P_best), values[best], float(dual), all_converged)


def _dual_search(dual_eval, P_start, s0, eps):
    """Minimize the convex dual over the decoder multiplier split s in [0, 1].

    The dual slope is nondecreasing in s. Starting from ``s0`` (the previous
    AO step's multiplier, which moves little between steps) the root is
    bracketed by geometrically growing steps, then refined with
    Illinois-modified regula falsi. Returns the final s, the evaluated
    precoders (last two bracket the root) and a convergence flag.
    """
    s0 = min(max(s0, 0.0), 1.0)
    r0, d0 = dual_eval(s0, P_start)
    evaluated = [r0.P]
    conv = r0.converged
    if d0 == 0.0:
        return s0, evaluated + [r0.P, r0.P], conv
    direction = -1.0 if d0 > 0 else 1.0
    s_prev, d_prev, P_prev = s0, d0, r0.P
    step = _DUAL_STEP
    while True:
        s1 = min(max(s_prev + direction * step, 0.0), 1.0)
        r1, d1 = dual_eval(s1, P_prev)
        evaluated.append(r1.P)
        conv &= r1.converged
        if d1 == 0.0:
            return s1, evaluated + [r1.P, r1.P], conv
        if (d1 > 0) != (d0 > 0):
            break
        if s1 in (0.0, 1.0):
            # slope keeps its sign up to the boundary: the minimizer is there
            return s1, evaluated + [r1.P, r1.P], conv
        s_prev, d_prev, P_prev = s1, d1, r1.P
        step *= 2.0
    # bracket: slope(lo) < 0 < slope(hi)
    if d1 < 0:
        lo, f_lo, P_lo, hi, f_hi, P_hi = s1, d1, r1.P, s_prev, d_prev, P_prev
    else:
        lo, f_lo, P_lo, hi, f_hi, P_hi = s_prev, d_prev, P_prev, s1, d1, r1.P
    side = 0
    s = lo
    for _ in range(_DUAL_MAX_EVALS):
        if hi - lo <= _DUAL_TOL:
            break
        s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        if not lo < s < hi:
            s = 0.5 * (lo + hi)
        r, d = dual_eval(s, P_lo if abs(s - lo) < abs(s - hi) else P_hi)
        evaluated.append(r.P)
        conv &= r.converged
        if d == 0.0:
            return s, evaluated + [r.P, r.P], conv
        if d < 0:
            lo, f_lo, P_lo = s, d, r.P
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi, P_hi = s, d, r.P
            if side == 1:
                f_lo *= 0.5
            side = 1
        if abs(d) <= 1e-9 * (abs(f_lo) + abs(f_hi)):
            break
    return s, evaluated + [P_lo, P_hi], conv


def _quadratic_roots(a, b, c):
    """Real roots of a t^2 + b t + c in [0, 1]."""
    if abs(a) <= 1e-14 * (abs(b) + abs(c) + 1e-300):
        return [-c / b] if b != 0.0 else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return roots


def _segment_search(problem, g, u, P_a, P_b, eps):
    """Maximize the surrogate objective on the segment [P_a, P_b] exactly.

    Along the segment every term's surrogate is a concave quadratic in the
    interpolation parameter, recovered from three evaluations. The objective
    is piecewise quadratic, so its maximizer is an endpoint, a piece's
    stationary point or a breakpoint; all of these are evaluated.
    """
    if np.array_equal(P_a, P_b):
        return P_a
    point = lambda t: project_rows_l1((1.0 - t) * P_a + t * P_b, eps)  # noqa: E731
    f0 = surrogate_terms(problem, g, u, P_a)
    fh = surrogate_terms(problem, g, u, 0.5 * (P_a + P_b))
    f1 = surrogate_terms(problem, g, u, P_b)
    qa = 2.0 * f0 - 4.0 * fh + 2.0 * f1
    qb = -3.0 * f0 + 4.0 * fh - f1
    qc = f0
    priv = ~problem.term_common
    wp = np.where(priv, problem.weights[problem.term_user], 0.0)
    pa, pb = float(wp @ qa), float(wp @ qb)
    common = np.flatnonzero(problem.term_common)
    W = problem.holder_weight
    ts = [0.0, 1.0]
    pieces = [(pa, pb)] + [(pa + W * qa[j], pb + W * qb[j]) for j in common]
    for a2, b2 in pieces:
        if a2 < 0.0:
            ts.append(-b2 / (2.0 * a2))
    for j in common:
        ts.extend(_quadratic_roots(qa[j], qb[j], qc[j]))
        for k in common:
            if k > j:
                ts.extend(_quadratic_roots(qa[j] - qa[k], qb[j] - qb[k], qc[j] - qc[k]))
    ts = sorted({min(max(float(t), 0.0), 1.0) for t in ts if np.isfinite(t)})
    points = [point(t) for t in ts]
    values = [surrogate_value(problem, g, u, P) for P in points]
    return points[int(np.argmax(values))]


@dataclass(frozen=True)
class AOState:
    problem: Problem
    P: np.ndarray
    equalizers: Optional[np.ndarray] = None
    mse_weights: Optional[np.ndarray] = None
    dual: float = 0.5
    wsr: float = 0.0
    subconfig: SubproblemConfig = field(default_factory=SubproblemConfig)
    inner_converged: bool = True


def init_state(problem: Problem, P0, subconfig: SubproblemConfig = SubproblemConfig()) -> AOState:
    P0 = project_rows_l1(np.asarray(P0, dtype=float), problem.epsilon)
    return AOState(problem, P0, wsr=problem.wsr(P0), subconfig=subconfig)


def ao_step(state: AOState) -> AOState:
    """One AO cycle: MMSE equalizers, MSE weights, then the precoder subproblem."""
    problem = state.problem
    g, mse = mmse_terms(problem, state.P)
    u = 1.0 / mse
    sub = solve_precoder_subproblem(problem, g, u, state.P, state.subconfig, state.dual)
    new_wsr = problem.wsr(sub.P)
    if new_wsr < state.wsr:
        # rounding-level regressions are rejected so the trace stays monotone
        return replace(state, equalizers=g, mse_weights=u, dual=sub.dual, inner_converged=sub.converged)
    return replace(
        state, P=sub.P, equalizers=g, mse_weights=u, dual=sub.dual, wsr=new_wsr, inner_converged=sub.converged
    )


@dataclass(frozen=True)
class Solution:
    plan: StreamPlan
    precoder: Precoder
    common_split: np.ndarray
    report: RateReport
    iterations_used: int
    wsr_trace: Tuple[float, ...]
    converged: bool = True
    restart_index: int = 0
    flags: Tuple[str, ...] = ()

    @property
    def wsr(self) -> float:
        return self.report.wsr


def run_ao(problem: Problem, P0, config: OptimizerConfig, restart_index: int = 0) -> Solution:
    state = init_state(problem, P0, config.subproblem)
    trace = [state.wsr]
    converged = False
    inner_ok = True
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        prev = state.wsr
        state = ao_step(state)
        inner_ok &= state.inner_converged
        trace.append(state.wsr)
        if abs(state.wsr - prev) <= config.rel_tolerance * max(abs(prev), 1e-12):
            converged = True
            break
    flags = []
    if not converged:
        flags.append("max_iterations reached")
    if not inner_ok:
        flags.append("inner solver hit its iteration cap")
    return make_solution(problem, state.P, iterations, trace, converged, restart_index, tuple(flags))


def make_solution(problem, P, iterations, trace, converged, restart_index=0, flags=()) -> Solution:
    precoder = Precoder(P, problem.epsilon)
    split = _split_for(problem, P)
    report = rate_report(problem.H, problem.plan, precoder, split, problem.weights, problem.noise)
    return Solution(
        plan=problem.plan,
        precoder=precoder,
        common_split=report.common_split,
        report=report,
        iterations_used=iterations,
        wsr_trace=tuple(float(v) for v in trace),
        converged=converged,
        restart_index=restart_index,
        flags=tuple(flags),
    )


def _scale_rows(M: np.ndarray, eps: float) -> np.ndarray:
    l1 = np.abs(M).sum(axis=1)
    out = np.array(M, dtype=float)
    empty = l1 == 0
    out[empty] = 1.0
    l1[empty] = M.shape[1]
    return out * (eps / l1)[:, None]


def initial_points(problem: Problem, config: OptimizerConfig):
    """Restart initializations: channel-matched, uniform, then seeded random."""
    L, S = problem.shape
    eps = problem.epsilon
    matched = np.zeros((L, S))
    for i, s in enumerate(problem.plan.streams):
        users = s.decoders if s.is_common else (s.user,)
        matched[:, i] = problem.H[list(users)].sum(axis=0)
    points = [_scale_rows(matched, eps), np.full((L, S), eps / S)]
    rng = np.random.default_rng(config.rng_seed)
    while len(points) < config.restarts:
        points.append(_scale_rows(rng.standard_normal((L, S)), eps))
    return points[: config.restarts]


def single_stream_points(problem: Problem):
    """Whole budget on one stream, matched to its intended users.

    AO keeps zero columns at zero, so these are fixed points that pin the
    single-user operating points WMMSE otherwise approaches very slowly.
    """
    L, S = problem.shape
    points = []
    for i, s in enumerate(problem.plan.streams):
        users = s.decoders if s.is_common else (s.user,)
        if s.is_common and len(s.holders) == 1:
            users = s.holders
        P = np.zeros((L, S))
        P[:, i] = problem.epsilon * np.sign(problem.H[list(users)].sum(axis=0))
        points.append(P)
    return points


def embed(solution: Solution, plan: StreamPlan) -> np.ndarray:
    """Map a solution's columns onto ``plan``'s streams (missing streams get zero columns)."""
    src = solution.plan
    P = np.zeros((solution.precoder.n_fixtures, plan.n_streams))
    for i, s in enumerate(plan.streams):
        j = src.common_index if s.is_common else src.private_of(s.user)
        if j is not None:
            P[:, i] = solution.precoder.matrix[:, j]
    return P


def resolve_instance(target, plan: StreamPlan, epsilon: float, noise_vars=None):
    """Channel gains and normalized noise for a scenario or a raw channel."""
    if isinstance(target, RoomScenario):
        H = channel_matrix(target).gains
        if noise_vars is None:
            # shot noise evaluated at the mean drive, taken as a DC bias of eps on every fixture
            rx = H.sum(axis=1) * epsilon * target.conversion_factor
            noise_vars = [normalized_variance(target, k, float(rx[k])) for k in range(target.n_users)]
        return H, np.asarray(noise_vars, dtype=float)
    H = target.gains if isinstance(target, ChannelMatrix) else np.asarray(target, dtype=float)
    return H, np.asarray(1.0 if noise_vars is None else noise_vars, dtype=float)


def canonical_users(problem: Problem) -> Tuple[int, ...]:
    """User order by (weight desc, noise, channel row desc); identical users keep index order."""
    K = problem.H.shape[0]
    key = lambda k: (-problem.weights[k], problem.noise[k], tuple(-problem.H[k]), k)  # noqa: E731
    return tuple(sorted(range(K), key=key))


def _stream_key(s: Stream):
    return (s.is_common, -1 if s.is_common else s.user)


def relabel(plan: StreamPlan, mapping) -> Tuple[StreamPlan, Tuple[int, ...]]:
    """Rename user k to mapping[k] and put streams in canonical order.

    Returns the new plan and, for each of its streams, the index of the
    corresponding stream in ``plan``.
    """
    streams = []
    for s in plan.streams:
        if s.is_common:
            streams.append(Stream.common(sorted(mapping[d] for d in s.decoders), sorted(mapping[h] for h in s.holders)))
        else:
            streams.append(Stream.private(mapping[s.user]))
    source = tuple(sorted(range(len(streams)), key=lambda i: _stream_key(streams[i])))
    strong = None if plan.noma_strong_user is None else mapping[plan.noma_strong_user]
    return StreamPlan(plan.scheme, plan.n_users, tuple(streams[i] for i in source), strong), source


def optimize_wsr(
    target,
    plan: StreamPlan,
    weights: Sequence[float],
    epsilon: float,
    config: OptimizerConfig = OptimizerConfig(),
    noise_vars=None,
    seed_solutions: Sequence[Solution] = (),
) -> Solution:
    """Best WSR precoder over multi-start WMMSE-AO runs.

    ``target`` is a RoomScenario or a users x fixtures gain matrix. For RSMA
    plans, converged SDMA and NOMA solutions (computed here unless passed in
    ``seed_solutions``) are embedded into the restart pool, so the result is
    never below either special case.
    """
    H, noise = resolve_instance(target, plan, epsilon, noise_vars)
    problem = Problem.build(H, noise, weights, plan, epsilon)
    order = canonical_users(problem)
    inv = {k: pos for pos, k in enumerate(order)}
    canon_plan, source = relabel(plan, inv)
    if order != tuple(range(len(order))) or canon_plan != plan:
        # solve in canonical user and stream order so relabelled inputs give the same run
        idx = list(order)
        seeds = [
            replace(s, plan=relabel(s.plan, inv)[0], precoder=Precoder(
                s.precoder.matrix[:, list(relabel(s.plan, inv)[1])], s.precoder.amplitude_budget))
            for s in seed_solutions
        ]
        sol = optimize_wsr(
            problem.H[idx], canon_plan, problem.weights[idx], epsilon, config, problem.noise[idx], seeds
        )
        P = np.zeros(problem.shape)
        P[:, list(source)] = sol.precoder.matrix
        return make_solution(
            problem, P, sol.iterations_used, sol.wsr_trace, sol.converged, sol.restart_index, sol.flags
        )
    pool = initial_points(problem, config) + single_stream_points(problem)
    starts = [(P, i) for i, P in enumerate(pool)]
    if plan.scheme == RSMA and plan.n_users == 2:
        given = {s.plan.scheme: s for s in seed_solutions}
        for scheme in (SDMA, NOMA):
            seed = given.get(scheme)
            if seed is None:
                sub_plan = StreamPlan.for_scheme(scheme, H, plan.n_users)
                seed = optimize_wsr(H, sub_plan, weights, epsilon, config, noise)
            starts.append((embed(seed, plan), len(starts)))

    best: Optional[Solution] = None
    for P0, idx in starts:
        sol = run_ao(problem, P0, config, restart_index=idx)
        if best is None or sol.wsr > best.wsr:
            best = sol
    return best
