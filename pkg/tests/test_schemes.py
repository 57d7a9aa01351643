import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vlc_rsma.schemes import (
    NOMA,
    RSMA,
    SDMA,
    Precoder,
    StreamPlan,
    check_feasible,
    common_sinr,
    mmse_equalizer,
    private_sinr,
    rate_report,
    wsr,
)

RS = StreamPlan.rsma(2)
SD = StreamPlan.sdma(2)
NO = StreamPlan.noma(strong_user=0)


def random_feasible(rng, L, S, eps):
    M = rng.standard_normal((L, S))
    scale = rng.uniform(0.0, 1.0, size=L) * eps / np.abs(M).sum(axis=1)
    return M * scale[:, None]


def test_plan_layouts():
    assert RS.n_streams == 3 and RS.common_index == 2 and RS.private_indices == (0, 1)
    assert SD.common_index is None and SD.n_streams == 2
    assert NO.streams[NO.common_index].holders == (1,)
    assert NO.private_of(1) is None and NO.private_of(0) == 0


def test_noma_strong_user_follows_channel_norm():
    H = np.array([[0.1, 0.2], [0.5, 0.4]])
    assert StreamPlan.for_scheme(NOMA, H).noma_strong_user == 1
    assert StreamPlan.for_scheme(NOMA, np.ones((2, 2))).noma_strong_user == 0


def test_feasibility_boundary_and_violation():
    eps = 2.0
    assert check_feasible(Precoder([[1.0, -0.5, 0.5], [2.0, 0.0, 0.0]], eps))
    assert not check_feasible(Precoder([[1.01 * eps, 0.0, 0.0], [0.0, 0.0, 0.0]], eps))
    assert check_feasible(Precoder(np.zeros((4, 3)), 1e-3))


def test_from_dc_budget():
    p = Precoder.from_dc(np.zeros((2, 2)), [3.0, 4.0], 10.0)
    assert p.amplitude_budget == 3.0


def test_mmse_equalizer_examples():
    assert mmse_equalizer([1.0, 0.0], [1.0, 0.0], 1.0) == pytest.approx(0.5, rel=1e-15)
    assert mmse_equalizer([1.0, 0.0], [0.0, 3.0], 1.0) == 0.0


def test_common_sinr_hand_case():
    H = np.array([[1.0, 1.0], [1.0, 1.0]])
    P = Precoder([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]], 2.0)
    assert common_sinr(H, RS, P, 0, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-15)


def test_common_sinr_degenerate_cases():
    H = np.array([[0.3, 0.7], [0.6, 0.2]])
    P = Precoder([[1.0, 0.5, 0.0], [0.2, 1.0, 0.0]], 2.0)
    assert common_sinr(H, RS, P, 1, 1.0) == 0.0
    Q = Precoder([[0.0, 0.0, 1.5], [0.0, 0.0, 2.0]], 2.0)
    assert common_sinr(H, RS, Q, 0, 0.5) == pytest.approx((0.3 * 1.5 + 0.7 * 2.0) ** 2 / 0.5, rel=1e-15)


def test_private_sinr_hand_cases():
    H = np.array([[1.0, 0.0], [0.3, 0.4]])
    P = Precoder([[2.0, 0.0], [0.0, 5.0]], 5.0)
    assert private_sinr(H, SD, P, 0, 1.0) == pytest.approx(4.0, rel=1e-15)
    Z = Precoder([[0.0, 1.0], [0.0, 1.0]], 5.0)
    assert private_sinr(H, SD, Z, 0, 1.0) == 0.0


def test_noma_strong_user_private_sinr():
    H = np.array([[1.0, 1.0], [0.2, 0.1]])
    P = Precoder([[1.0, 0.0], [1.0, 0.0]], 1.0)
    assert private_sinr(H, NO, P, 0, 1.0) == pytest.approx(4.0, rel=1e-15)


def test_sic_ordering_common_sees_private_but_private_does_not_see_common():
    H = np.array([[1.0, 0.0], [0.0, 1.0]])
    P = Precoder([[1.0, 0.0, 3.0], [0.0, 1.0, 0.0]], 4.0)
    # user 0: common stream sees its own private stream as interference
    assert common_sinr(H, RS, P, 0, 1.0) == pytest.approx(9.0 / 2.0)
    # private stream is unaffected by the (cancelled) common stream
    assert private_sinr(H, RS, P, 0, 1.0) == pytest.approx(1.0)


def test_sdma_interference_free_report():
    H = np.array([[1.0, 0.0], [0.0, 2.0]])
    P = Precoder([[3.0, 0.0], [0.0, 1.5]], 3.0)
    rep = rate_report(H, SD, P, weights=[0.25, 0.75])
    r = [math.log2(1 + 9.0), math.log2(1 + 9.0)]
    np.testing.assert_allclose(rep.overall_rate_per_user, r, rtol=1e-15)
    assert rep.wsr == pytest.approx(0.25 * r[0] + 0.75 * r[1], rel=1e-15)


def test_wsr_arithmetic():
    H = np.array([[1.0, 0.0], [0.0, 1.0]])
    rep = rate_report(H, SD, Precoder([[1.0, 0.0], [0.0, 1.0]], 1.0))
    object.__setattr__(rep, "overall_rate_per_user", np.array([10.0, 6.0]))
    assert wsr([0.5, 0.5], rep) == 8.0
    assert wsr([1.0, 0.0], rep) == 10.0
    assert wsr([0.0, 0.0], rep) == 0.0


def test_infeasible_precoder_rejected():
    H = np.ones((2, 2))
    with pytest.raises(ValueError):
        rate_report(H, SD, Precoder([[2.0, 0.0], [0.0, 0.0]], 1.0))


def test_overcap_split_clipped_with_diagnostic():
    H = np.array([[1.0, 0.2], [0.3, 1.0]])
    P = Precoder([[0.5, 0.0, 0.5], [0.0, 0.5, 0.5]], 1.0)
    base = rate_report(H, RS, P)
    cap = base.achievable_common_rate
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = rate_report(H, RS, P, common_split=[cap, cap])
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert rep.diagnostics
    assert rep.common_split.sum() == pytest.approx(cap, rel=1e-12)
    np.testing.assert_allclose(rep.common_split, [cap / 2, cap / 2], rtol=1e-12)


def test_negative_split_rejected():
    H = np.eye(2)
    with pytest.raises(ValueError):
        rate_report(H, RS, Precoder(np.zeros((2, 3)), 1.0), common_split=[-0.1, 0.0])


def test_noma_split_must_go_to_weak_user():
    H = np.eye(2)
    with pytest.raises(ValueError):
        rate_report(H, NO, Precoder([[0.5, 0.5], [0.5, 0.5]], 1.0), common_split=[0.01, 0.0])


def test_symmetric_instance_equalizes_common_rates():
    H = np.array([[0.9, 0.4], [0.4, 0.9]])
    P = Precoder([[0.6, 0.1, 0.3], [0.1, 0.6, 0.3]], 1.0)
    rep = rate_report(H, RS, P)
    assert rep.common_sinr_per_user[0] == pytest.approx(rep.common_sinr_per_user[1], rel=1e-14)


def test_rsma_null_common_equals_sdma_on_random_precoders():
    rng = np.random.default_rng(7)
    for _ in range(100):
        L = int(rng.integers(1, 5))
        eps = float(rng.uniform(0.1, 50.0))
        H = rng.uniform(0.0, 0.05, size=(2, L))
        priv = random_feasible(rng, L, 2, eps)
        P_rs = Precoder(np.column_stack([priv, np.zeros(L)]), eps)
        P_sd = Precoder(priv, eps)
        w = rng.dirichlet([1.0, 1.0])
        noise = rng.uniform(0.5, 2.0, size=2)
        a = rate_report(H, RS, P_rs, common_split=[0.0, 0.0], weights=w, noise_vars=noise)
        b = rate_report(H, SD, P_sd, weights=w, noise_vars=noise)
        assert a.equals(b)


def test_noma_equals_rsma_with_weak_private_zeroed():
    rng = np.random.default_rng(11)
    for _ in range(50):
        L = int(rng.integers(1, 5))
        eps = float(rng.uniform(0.1, 50.0))
        H = rng.uniform(0.0, 0.05, size=(2, L))
        cols = random_feasible(rng, L, 2, eps)  # strong private, common
        P_no = Precoder(cols, eps)
        P_rs = Precoder(np.column_stack([cols[:, 0], np.zeros(L), cols[:, 1]]), eps)
        w = [0.5, 0.5]
        a = rate_report(H, NO, P_no, weights=w)
        b = rate_report(H, RS, P_rs, common_split=[0.0, a.achievable_common_rate], weights=w)
        assert a.equals(b)


finite = st.floats(-1.0, 1.0, allow_nan=False)


@given(
    arrays(float, (2, 3), elements=st.floats(0.0, 0.1)),
    arrays(float, (3, 3), elements=finite),
    st.floats(0.1, 10.0),
    st.floats(0.01, 100.0),
)
def test_joint_amplitude_noise_scaling_invariance(H, M, noise, alpha):
    l1 = np.abs(M).sum(axis=1).max()
    eps = max(l1, 1e-6)
    a = rate_report(H, RS, Precoder(M, eps), noise_vars=noise)
    b = rate_report(H, RS, Precoder(alpha * M, alpha * eps), noise_vars=alpha**2 * noise)
    np.testing.assert_allclose(b.common_sinr_per_user, a.common_sinr_per_user, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(b.private_sinr_per_user, a.private_sinr_per_user, rtol=1e-9, atol=1e-12)
    assert b.wsr == pytest.approx(a.wsr, rel=1e-9, abs=1e-12)


@given(
    arrays(float, (2, 2), elements=st.floats(0.0, 0.1)),
    arrays(float, (2, 3), elements=finite),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
def test_admissible_splits_respect_common_cap(H, M, a, b):
    eps = max(np.abs(M).sum(axis=1).max(), 1e-6)
    P = Precoder(M, eps)
    cap = rate_report(H, RS, P).achievable_common_rate
    split = np.array([a, b]) * cap
    if split.sum() > cap:
        split = split * (cap / split.sum())
    rep = rate_report(H, RS, P, common_split=split)
    assert rep.common_split.sum() <= cap * (1 + 1e-12) + 1e-15
    caps = [math.log2(1 + s) for s in rep.common_sinr_per_user]
    assert rep.common_split.sum() <= min(caps) + 1e-12


@given(arrays(float, (2, 2), elements=st.floats(0.001, 0.1)), st.floats(0.1, 0.9), st.floats(1.01, 1.9))
def test_own_power_increases_own_sdma_rate(H, frac, boost):
    # own column boosted, interference at that user unchanged
    eps = 1.0
    P = np.array([[frac * 0.5, 0.0], [frac * 0.5, 0.0]])
    Q = P * boost
    P[:, 1] = Q[:, 1] = [0.1, 0.1]
    a = rate_report(H, SD, Precoder(P, eps))
    b = rate_report(H, SD, Precoder(Q, eps))
    assert b.private_rate_per_user[0] > a.private_rate_per_user[0]
