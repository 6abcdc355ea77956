"""Process dynamics: reproduction splits, mating, paths, growth theory."""

import numpy as np
import pytest
from scipy import stats

from ybbp.laws import PoissonLaw
from ybbp.process import (
    GenerationState,
    ParamVector,
    PathRecord,
    REGIME_DEGENERATE,
    REGIME_EQUAL,
    REGIME_NO_DOMINANT,
    REGIME_R_DOMINANT,
    initial_state,
    mate,
    reproduce,
    simulate_path,
    step,
    survival_condition,
    theoretical_rates,
)
from ybbp.rng import substream

from conftest import LAW_MEAN_32, LAW_MEAN_40

THETA_R_DOM = ParamVector(0.46, 0.005, 3.2, 4.0)
POIS_32, POIS_40 = PoissonLaw(3.2), PoissonLaw(4.0)


def test_param_vector_validation():
    with pytest.raises(ValueError):
        ParamVector(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ParamVector(0.5, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ParamVector(0.5, 0.0, -1.0, 1.0)
    assert ParamVector(0.5, 0.0, 0.0, 0.0).as_tuple() == (0.5, 0.0, 0.0, 0.0)


def test_reproduce_empty(rng):
    assert reproduce(0, 0, THETA_R_DOM, POIS_32, POIS_40, rng) == (0, 0, 0, 0)


def test_reproduce_proportions(rng):
    # average female share and mutant share across 100 replicates
    theta = ParamVector(0.46, 0.005, 3.2, 4.0)
    fem_share, mut_share = [], []
    for _ in range(100):
        F, M_R, M_Rr, M_rr = reproduce(10_000, 0, theta, POIS_32, POIS_40, rng)
        total = F + M_R + M_Rr
        fem_share.append(F / total)
        mut_share.append(M_Rr / (M_R + M_Rr))
    assert abs(np.mean(fem_share) - 0.46) < 0.01
    assert abs(np.mean(mut_share) - 0.005) < 0.002


def test_reproduce_r_side_mean(rng):
    theta = ParamVector(0.5, 0.0, 3.2, 2.0)
    females = [reproduce(0, 10_000, theta, POIS_32, PoissonLaw(2.0), rng)[0] for _ in range(50)]
    # E[F] = 10^4 * alpha * m_r = 10^4; binomial-plus-poisson spread
    se = np.std(females) / np.sqrt(len(females))
    assert abs(np.mean(females) - 10_000) < 3 * se + 1


def test_reproduce_matches_percouple_oracle(rng):
    # aggregated splitting vs brute-force per-couple multinomial thinning
    theta = ParamVector(0.46, 0.2, 3.2, 4.0)
    z_R, z_r, reps = 5, 4, 100_000

    agg = np.array([reproduce(z_R, z_r, theta, LAW_MEAN_32, LAW_MEAN_40, rng) for _ in range(reps)])

    tot_R = LAW_MEAN_32.sample_many((reps, z_R), rng)
    fem_R = rng.binomial(tot_R, theta.alpha)
    sons_R = tot_R - fem_R
    mut_R = rng.binomial(sons_R, theta.beta)
    tot_r = LAW_MEAN_40.sample_many((reps, z_r), rng)
    fem_r = rng.binomial(tot_r, theta.alpha)
    brute = np.column_stack([
        (fem_R.sum(axis=1) + fem_r.sum(axis=1)),
        (sons_R - mut_R).sum(axis=1),
        mut_R.sum(axis=1),
        (tot_r - fem_r).sum(axis=1),
    ])
    for j in range(4):
        assert stats.ks_2samp(agg[:, j], brute[:, j], method="asymp").pvalue > 0.01, j


def test_mate_branches(rng):
    assert mate(10, 5, 5, rng) == (5, 5)        # every male finds a mate
    assert mate(0, 7, 3, rng) == (0, 0)
    assert mate(4, 0, 9, rng) == (0, 4)
    assert mate(4, 9, 0, rng) == (4, 0)


def test_mate_hypergeometric_mean(rng):
    draws = np.array([mate(50, 60, 40, rng)[0] for _ in range(100_000)])
    assert abs(draws.mean() - 30.0) < 0.1


def test_mate_conservation(rng):
    for _ in range(2000):
        F = int(rng.integers(0, 50))
        M_R = int(rng.integers(0, 50))
        M_r = int(rng.integers(0, 50))
        z_R, z_r = mate(F, M_R, M_r, rng)
        assert z_R + z_r == min(F, M_R + M_r)
        assert 0 <= z_R <= M_R and 0 <= z_r <= M_r


def test_step_from_extinct_couples(rng):
    state = GenerationState(3, 5, 0, 0, 0, 0, 0)  # females but no males: no couples
    nxt = step(state, THETA_R_DOM, POIS_32, POIS_40, rng)
    assert (nxt.F, nxt.M_R, nxt.M_Rr, nxt.M_rr) == (0, 0, 0, 0)
    assert nxt.n == 4


def test_step_no_r_couples_no_rline_sons(rng):
    theta = ParamVector(0.5, 0.9, 3.0, 3.0)
    for _ in range(50):
        state = initial_state(20, 0, 10, rng)
        nxt = step(state, theta, POIS_32, POIS_40, rng)
        assert nxt.M_Rr == 0  # mutants need R-couples


def test_sex_ratio_converges(rng):
    total_f = total = 0
    for _ in range(200):
        F, M_R, M_Rr, M_rr = reproduce(200, 200, THETA_R_DOM, POIS_32, POIS_40, rng)
        total_f += F
        total += F + M_R + M_Rr + M_rr
    se = np.sqrt(0.46 * 0.54 / total)
    assert abs(total_f / total - 0.46) < 4 * se


def test_simulate_path_zero_means(rng):
    path = simulate_path((10, 5, 5), ParamVector(0.5, 0.0, 0.0, 0.0),
                         PoissonLaw(0.0), PoissonLaw(0.0), 6, rng)
    assert len(path) == 7
    assert path.F[0] == 10
    assert not path.F[1:].any() and not path.M[1:].any()


def test_simulate_path_seed_determinism():
    a = simulate_path((10, 5, 5), THETA_R_DOM, POIS_32, POIS_40, 15, substream(5, (1, 2)))
    b = simulate_path((10, 5, 5), THETA_R_DOM, POIS_32, POIS_40, 15, substream(5, (1, 2)))
    assert a == b


def test_simulate_path_coexistence_possible():
    hits = 0
    for i in range(60):
        p = simulate_path((10, 5, 5), THETA_R_DOM, POIS_32, POIS_40, 15, substream(77, (1, i)))
        if p.M_R[15] > 0 and p.M_r[15] > 0:
            hits += 1
    assert hits > 10


def test_mutation_flow_is_one_way():
    # R-males at n+1 descend only from R-couples at n: with no R-couples
    # anywhere, M_R stays zero along the whole path.
    for i in range(40):
        p = simulate_path((30, 0, 15), ParamVector(0.5, 0.3, 3.0, 3.0),
                          POIS_32, POIS_40, 8, substream(123, (1, i)))
        assert not p.M_R.any()
        assert not p.Z_R.any()


def test_path_record_roundtrip(tmp_path, rng):
    p = simulate_path((10, 5, 5), THETA_R_DOM, POIS_32, POIS_40, 10, rng)
    f = tmp_path / "path.csv"
    p.to_csv(f, meta={"seed": 1})
    q = PathRecord.from_csv(f)
    assert p == q
    assert q.horizon == 10


def test_survival_condition():
    assert survival_condition(THETA_R_DOM)  # 0.46*0.995*3.2 = 1.46464
    assert not survival_condition(ParamVector(0.5, 0.0, 2.0, 0.0))  # boundary value 1
    assert survival_condition(ParamVector(0.45, 0.10, 3.0, 0.0))  # 1.215


def test_theoretical_rates_r_dominant():
    report = theoretical_rates(THETA_R_DOM)
    assert report.tau_R == pytest.approx(1.46464)
    assert report.tau_r == pytest.approx(1.84)
    assert report.regime == REGIME_R_DOMINANT
    assert report.ratio_limit_or_slope == pytest.approx(4.0 / (0.995 * 3.2))


def test_theoretical_rates_no_dominant():
    report = theoretical_rates(ParamVector(0.45, 0.01, 3.5, 2.6))
    assert report.regime == REGIME_NO_DOMINANT
    assert report.ratio_limit_or_slope == pytest.approx(0.035 / 0.865)
    assert report.gap < 0


def test_theoretical_rates_equal_and_degenerate():
    report = theoretical_rates(ParamVector(0.4, 0.0, 2.0, 2.0))
    assert report.regime == REGIME_EQUAL
    assert report.ratio_limit_or_slope == 0.0
    degenerate = theoretical_rates(ParamVector(0.4, 0.1, 0.0, 2.0))
    assert degenerate.regime == REGIME_DEGENERATE
    assert degenerate.ratio_limit_or_slope is None


def _surviving_paths(theta, law_R, law_r, initial, n_target, seed):
    paths = []
    i = 0
    while len(paths) < n_target:
        p = simulate_path(initial, theta, law_R, law_r, 15, substream(seed, (1, i)))
        i += 1
        if p.Z_R[15] > 0 and p.Z_r[15] > 0:
            paths.append(p)
        if i > 20 * n_target:
            raise AssertionError("survival too rare for the test configuration")
    return paths


def test_empirical_growth_rates():
    paths = _surviving_paths(THETA_R_DOM, POIS_32, POIS_40, (10, 5, 5), 500, 1001)
    ratios_R, ratios_r = [], []
    for p in paths:
        zR = p.Z_R.astype(float)
        zr = p.Z_r.astype(float)
        for n in range(10, 15):
            ratios_R.append(zR[n + 1] / zR[n])
            ratios_r.append(zr[n + 1] / zr[n])
    assert abs(np.mean(ratios_R) - 1.46464) / 1.46464 < 0.05
    assert abs(np.mean(ratios_r) - 1.84) / 1.84 < 0.05


def test_empirical_ratio_limit():
    # couple-count ratio settles near beta*m_R/((1-beta)*m_R - m_r); the
    # start census keeps the initial ratio small so 15 generations suffice
    theta = ParamVector(0.45, 0.01, 3.5, 2.6)
    paths = _surviving_paths(theta, PoissonLaw(3.5), PoissonLaw(2.6), (10, 9, 1), 500, 1002)
    ratios = [p.Z_r[15] / p.Z_R[15] for p in paths]
    limit = 0.01 * 3.5 / (0.99 * 3.5 - 2.6)
    assert abs(np.mean(ratios) - limit) / limit < 0.25
