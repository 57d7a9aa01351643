"""Stream plans for RSMA / SDMA / NOMA and the rate bookkeeping around them.

A plan is an ordered list of streams. Each user decodes the (single) common
stream first while treating every private stream as noise, removes it by SIC,
then decodes its own private stream with the other private streams as noise.
SDMA is the plan without a common stream. Two-user NOMA is the plan where the
weak user has no private stream and its whole message rides on the common
stream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .geometry import ChannelMatrix

RSMA = "RSMA"
SDMA = "SDMA"
NOMA = "NOMA"
SCHEMES = (RSMA, NOMA, SDMA)

FEASIBILITY_SLACK = 1e-12
SPLIT_SLACK = 1e-9


@dataclass(frozen=True)
class Stream:
    kind: str  # "private" | "common"
    user: Optional[int] = None  # owner of a private stream
    decoders: Tuple[int, ...] = ()  # users that decode a common stream
    holders: Tuple[int, ...] = ()  # users allowed a share of the common rate

    @classmethod
    def private(cls, user: int) -> "Stream":
        return cls("private", user=user)

    @classmethod
    def common(cls, decoders: Sequence[int], holders: Optional[Sequence[int]] = None) -> "Stream":
        decoders = tuple(decoders)
        return cls("common", decoders=decoders, holders=tuple(holders) if holders is not None else decoders)

    @property
    def is_common(self) -> bool:
        return self.kind == "common"


@dataclass(frozen=True)
class StreamPlan:
    scheme: str
    n_users: int
    streams: Tuple[Stream, ...]
    noma_strong_user: Optional[int] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        commons = [s for s in self.streams if s.is_common]
        if len(commons) > 1:
            raise ValueError("at most one common stream is supported")
        owners = [s.user for s in self.streams if not s.is_common]
        if len(set(owners)) != len(owners):
            raise ValueError("a user may own at most one private stream")
        for s in self.streams:
            users = (s.user,) if not s.is_common else s.decoders + s.holders
            if any(u is None or not 0 <= u < self.n_users for u in users):
                raise ValueError(f"stream {s} references a user outside 0..{self.n_users - 1}")
        if self.scheme == SDMA and commons:
            raise ValueError("SDMA plans carry private streams only")

    @classmethod
    def rsma(cls, n_users: int = 2) -> "StreamPlan":
        users = tuple(range(n_users))
        return cls(RSMA, n_users, tuple(Stream.private(k) for k in users) + (Stream.common(users),))

    @classmethod
    def sdma(cls, n_users: int = 2) -> "StreamPlan":
        return cls(SDMA, n_users, tuple(Stream.private(k) for k in range(n_users)))

    @classmethod
    def noma(cls, strong_user: int = 0, n_users: int = 2) -> "StreamPlan":
        if n_users != 2:
            raise ValueError("NOMA plans are defined for two users")
        weak = 1 - strong_user
        streams = (Stream.private(strong_user), Stream.common((0, 1), holders=(weak,)))
        return cls(NOMA, 2, streams, noma_strong_user=strong_user)

    @classmethod
    def for_scheme(cls, scheme: str, channel=None, n_users: int = 2) -> "StreamPlan":
        """Build the default plan; NOMA picks the user with the largest channel norm as strong."""
        if scheme == RSMA:
            return cls.rsma(n_users)
        if scheme == SDMA:
            return cls.sdma(n_users)
        if scheme == NOMA:
            strong = 0
            if channel is not None:
                norms = np.linalg.norm(_gains(channel), axis=1)
                strong = int(np.argmax(norms))  # argmax keeps the lower index on ties
            return cls.noma(strong, n_users)
        raise ValueError(f"unknown scheme {scheme!r}")

    @property
    def n_streams(self) -> int:
        return len(self.streams)

    @property
    def common_index(self) -> Optional[int]:
        for i, s in enumerate(self.streams):
            if s.is_common:
                return i
        return None

    @property
    def private_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.streams) if not s.is_common)

    def private_of(self, user: int) -> Optional[int]:
        for i, s in enumerate(self.streams):
            if not s.is_common and s.user == user:
                return i
        return None

    def common_holder(self, weights: Sequence[float]) -> Optional[int]:
        """User that receives the whole common rate at a WSR optimum.

        Largest weight wins; ties go to the lower index.
        """
        c = self.common_index
        if c is None:
            return None
        holders = sorted(self.streams[c].holders)
        return max(holders, key=lambda k: (weights[k], -k))


@dataclass(frozen=True)
class Precoder:
    """Precoding matrix, one row per fixture and one column per stream."""

    matrix: np.ndarray
    amplitude_budget: float
    dc_bias: Optional[np.ndarray] = None
    p_max: Optional[float] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("precoder matrix must be 2-D (fixtures x streams)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.amplitude_budget > 0:
            raise ValueError(f"amplitude budget must be > 0, got {self.amplitude_budget}")
        if self.dc_bias is not None:
            d = np.broadcast_to(np.asarray(self.dc_bias, dtype=float), (m.shape[0],)).copy()
            if np.any(d <= 0):
                raise ValueError("dc_bias must be positive")
            object.__setattr__(self, "dc_bias", d)

    @classmethod
    def from_dc(cls, matrix, dc_bias, p_max: float) -> "Precoder":
        d = np.asarray(dc_bias, dtype=float)
        eps = float(np.min(np.minimum(d, p_max - d)))
        return cls(matrix, eps, dc_bias=d, p_max=p_max)

    @property
    def n_fixtures(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_streams(self) -> int:
        return self.matrix.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i]

    def row_l1(self) -> np.ndarray:
        return np.abs(self.matrix).sum(axis=1)


def check_feasible(precoder: Precoder) -> bool:
    """True iff every fixture row satisfies L1 <= budget (and the budget is consistent)."""
    eps = precoder.amplitude_budget
    slack = FEASIBILITY_SLACK * max(1.0, eps)
    if np.any(precoder.row_l1() > eps + slack):
        return False
    if precoder.dc_bias is not None and precoder.p_max is not None:
        d = precoder.dc_bias
        if np.any(d > precoder.p_max):
            return False
        if eps > float(np.min(np.minimum(d, precoder.p_max - d))) + slack:
            return False
    return True


def _gains(H) -> np.ndarray:
    return H.gains if isinstance(H, ChannelMatrix) else np.asarray(H, dtype=float)


def effective_gains(H, P) -> np.ndarray:
    """users x streams matrix of h_k^T p_i.

    Computed per entry with a fixed reduction order so a column's result
    does not depend on which other columns are present.
    """
    H = _gains(H)
    P = P.matrix if isinstance(P, Precoder) else np.asarray(P, dtype=float)
    return (H[:, :, None] * P[None, :, :]).sum(axis=1)


def mmse_equalizer(h_k, p_i, noise_var: float, interference: float = 0.0) -> float:
    """Scalar MMSE receive coefficient for one stream at one user.

    ``interference`` is the power of every other stream still present when
    this stream is decoded.
    """
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    a = float(np.dot(np.asarray(h_k, dtype=float), np.asarray(p_i, dtype=float)))
    return a / (a * a + interference + noise_var)


def _as_noise(noise_vars, n_users: int) -> np.ndarray:
    s = np.broadcast_to(np.asarray(noise_vars, dtype=float), (n_users,)).copy()
    if np.any(s <= 0):
        raise ValueError("noise variances must be positive")
    return s


def _private_interference(eff: np.ndarray, plan: StreamPlan, k: int, exclude: Optional[int]) -> float:
    total = 0.0
    for j in plan.private_indices:
        if j != exclude:
            total += eff[k, j] ** 2
    return total


def common_sinr(H, plan: StreamPlan, precoder, k: int, noise_var: float) -> float:
    """SINR of the common stream at user k, all private streams as noise."""
    c = plan.common_index
    if c is None:
        raise ValueError(f"{plan.scheme} plan has no common stream")
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    eff = effective_gains(H, precoder)
    return eff[k, c] ** 2 / (_private_interference(eff, plan, k, None) + noise_var)


def private_sinr(H, plan: StreamPlan, precoder, k: int, noise_var: float) -> float:
    """SINR of user k's private stream after the common stream is cancelled."""
    i = plan.private_of(k)
    if i is None:
        raise ValueError(f"user {k} owns no private stream in the {plan.scheme} plan")
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    eff = effective_gains(H, precoder)
    return eff[k, i] ** 2 / (_private_interference(eff, plan, k, i) + noise_var)


@dataclass(frozen=True)
class RateReport:
    """Per-user SINRs and rates (bits/s/Hz). Users without the relevant stream get 0."""

    common_sinr_per_user: np.ndarray
    private_sinr_per_user: np.ndarray
    achievable_common_rate: float
    common_split: np.ndarray
    private_rate_per_user: np.ndarray
    overall_rate_per_user: np.ndarray
    wsr: float
    diagnostics: Tuple[str, ...] = field(default=(), compare=False)

    def equals(self, other: "RateReport") -> bool:
        """Bit-exact equality of every numeric field."""
        pairs = [
            (self.common_sinr_per_user, other.common_sinr_per_user),
            (self.private_sinr_per_user, other.private_sinr_per_user),
            (self.common_split, other.common_split),
            (self.private_rate_per_user, other.private_rate_per_user),
            (self.overall_rate_per_user, other.overall_rate_per_user),
        ]
        return (
            all(np.array_equal(a, b) for a, b in pairs)
            and self.achievable_common_rate == other.achievable_common_rate
            and self.wsr == other.wsr
        )


def default_split(plan: StreamPlan, weights, common_rate: float) -> np.ndarray:
    split = np.zeros(plan.n_users)
    holder = plan.common_holder(weights)
    if holder is not None:
        split[holder] = common_rate
    return split


def wsr(weights, report: RateReport) -> float:
    """Weighted sum of overall per-user rates."""
    w = np.asarray(weights, dtype=float)
    if w.shape != report.overall_rate_per_user.shape:
        raise ValueError("one weight per user is required")
    return float(np.sum(w * report.overall_rate_per_user))


def rate_report(H, plan: StreamPlan, precoder: Precoder, common_split=None, weights=None, noise_vars=1.0) -> RateReport:
    """Evaluate every SINR and rate for ``precoder`` under ``plan``.

    ``common_split=None`` hands the whole common rate to the highest-weight
    holder. A split exceeding the achievable common rate is scaled down
    proportionally with a warning; negative shares raise.
    """
    gains = _gains(H)
    n_users = gains.shape[0]
    if n_users != plan.n_users:
        raise ValueError(f"channel has {n_users} users but plan expects {plan.n_users}")
    if precoder.matrix.shape != (gains.shape[1], plan.n_streams):
        raise ValueError(
            f"precoder shape {precoder.matrix.shape} does not match "
            f"{gains.shape[1]} fixtures x {plan.n_streams} streams"
        )
    if not check_feasible(precoder):
        raise ValueError("precoder violates the per-fixture L1 amplitude budget")
    weights = np.full(n_users, 1.0 / n_users) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (n_users,) or np.any(weights < 0):
        raise ValueError("weights must be nonnegative, one per user")
    sigma2 = _as_noise(noise_vars, n_users)
    eff = effective_gains(gains, precoder)

    private_sinrs = np.zeros(n_users)
    for k in range(n_users):
        i = plan.private_of(k)
        if i is not None:
            private_sinrs[k] = eff[k, i] ** 2 / (_private_interference(eff, plan, k, i) + sigma2[k])
    private_rates = np.log2(1.0 + private_sinrs)

    common_sinrs = np.zeros(n_users)
    c = plan.common_index
    diagnostics = []
    if c is None:
        common_rate = 0.0
        split = np.zeros(n_users)
        if common_split is not None and np.any(np.asarray(common_split, dtype=float) != 0):
            raise ValueError("SDMA plans cannot carry a common-rate split")
    else:
        decoders = plan.streams[c].decoders
        for k in decoders:
            common_sinrs[k] = eff[k, c] ** 2 / (_private_interference(eff, plan, k, None) + sigma2[k])
        common_rate = float(min(math.log2(1.0 + common_sinrs[k]) for k in decoders))
        if common_split is None:
            split = default_split(plan, weights, common_rate)
        else:
            split = np.array(common_split, dtype=float)
            if split.shape != (n_users,):
                raise ValueError("common_split needs one entry per user")
            if np.any(split < 0):
                raise ValueError("common_split entries must be nonnegative")
            holders = set(plan.streams[c].holders)
            if any(split[k] > 0 for k in range(n_users) if k not in holders):
                raise ValueError(f"only users {sorted(holders)} may hold common rate under {plan.scheme}")
            total = float(split.sum())
            if total > common_rate + SPLIT_SLACK:
                msg = f"common split {total:.6g} exceeds achievable common rate {common_rate:.6g}; scaled down"
                warnings.warn(msg, RuntimeWarning, stacklevel=2)
                diagnostics.append(msg)
                split = split * (common_rate / total)

    overall = split + private_rates
    report = RateReport(
        common_sinr_per_user=common_sinrs,
        private_sinr_per_user=private_sinrs,
        achievable_common_rate=common_rate,
        common_split=split,
        private_rate_per_user=private_rates,
        overall_rate_per_user=overall,
        wsr=0.0,
        diagnostics=tuple(diagnostics),
    )
    object.__setattr__(report, "wsr", wsr(weights, report))
    return report
