import os

import numpy as np
import pytest

from ybbp.laws import FiniteSupportLaw
from ybbp.observation import BasicSample, ExtendedSample, SchemeVariant

# Example finite-support reproduction laws used across the tests
# (litter-size probabilities on 0..7, means 3.2 / 4.0 / 3.0 / 3.5).
LAW_MEAN_32 = FiniteSupportLaw((0.0139, 0.0819, 0.2069, 0.2904, 0.2445, 0.1236, 0.0347, 0.0041))
LAW_MEAN_40 = FiniteSupportLaw((0.0027, 0.0248, 0.0991, 0.2203, 0.2938, 0.2350, 0.1044, 0.0199))
LAW_MEAN_30 = FiniteSupportLaw((0.0199, 0.1044, 0.2350, 0.2938, 0.2203, 0.0991, 0.0248, 0.0027))
LAW_MEAN_35 = FiniteSupportLaw((0.0078, 0.0547, 0.1641, 0.2734, 0.2734, 0.1641, 0.0547, 0.0078))
LAW_ZERO = FiniteSupportLaw((1.0,))


def n_workers() -> int:
    return int(os.environ.get("YBBP_TEST_WORKERS", min(2, os.cpu_count() or 1)))


def random_basic(rng, N=6) -> BasicSample:
    F = rng.integers(1, 200, size=N + 1)
    M = rng.integers(1, 200, size=N)
    return BasicSample(F, M, int(rng.integers(1, 100)), int(rng.integers(1, 100)))


def random_extended(rng, N=6, variant=SchemeVariant.BOTH_POSITIVE) -> ExtendedSample:
    b = random_basic(rng, N)
    if variant is SchemeVariant.BOTH_POSITIVE:
        m_r_last = int(b.M_r_last) + (b.M_r_last < 2) * 2
        b = BasicSample(b.F, b.M, b.M_R_last, m_r_last)
        m_Rr = int(rng.integers(1, m_r_last))
        split = (m_Rr, m_r_last - m_Rr)
    elif variant is SchemeVariant.RR_ZERO:
        split = (int(b.M_r_last), 0)
    else:
        split = (0, int(b.M_r_last))
    prev_total = int(b.M[-1])
    if prev_total < 2:
        M = b.M.copy()
        M[-1] = 2
        b = BasicSample(b.F, M, b.M_R_last, b.M_r_last)
        prev_total = 2
    m_R_prev = int(rng.integers(1, prev_total))
    return ExtendedSample(b, m_R_prev, prev_total - m_R_prev, *split)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
