"""Observation schemes, distances, and observed-sample files."""

import math

import numpy as np
import pytest

from ybbp.laws import PoissonLaw
from ybbp.observation import (
    BasicSample,
    ExtendedSample,
    ObservationError,
    SchemeVariant,
    extract_basic,
    extract_extended,
    load_observed_csv,
    rho,
    rho_star,
    rho_star_terms,
    rho_terms,
    simulate_compatible,
    write_observed_csv,
)
from ybbp.process import ParamVector, PathRecord, simulate_path
from ybbp.rng import substream

from conftest import LAW_MEAN_32, LAW_MEAN_40, random_basic as _random_basic
from conftest import random_extended as _random_extended

THETA = ParamVector(0.46, 0.005, 3.2, 4.0)


def _basic(F, M, m_R_last, m_r_last):
    return BasicSample(np.array(F), np.array(M), m_R_last, m_r_last)


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def test_extract_all_zero_path_incompatible(rng):
    p = simulate_path((10, 5, 5), ParamVector(0.5, 0.0, 0.0, 0.0),
                      PoissonLaw(0.0), PoissonLaw(0.0), 5, rng)
    assert extract_basic(p) is None
    assert extract_extended(p) is None


def test_extract_requires_both_genotypes():
    # r-males present, R-males gone at the horizon: incompatible
    p = PathRecord(F=[10, 8], M_R=[5, 0], M_Rr=[0, 1], M_rr=[5, 6], Z_R=[5, 0], Z_r=[5, 7])
    assert extract_basic(p) is None
    p2 = PathRecord(F=[10, 8], M_R=[5, 3], M_Rr=[0, 0], M_rr=[5, 0], Z_R=[5, 3], Z_r=[5, 0])
    assert extract_basic(p2) is None  # M_r at horizon is 0


def test_extract_basic_fields(rng):
    path, sample, _ = simulate_compatible(THETA, LAW_MEAN_32, LAW_MEAN_40, (10, 5, 5), 15,
                                          substream(31, (1, 0)), scheme="basic")
    assert sample.N == 15
    assert sample.M_R_last == path.M_R[15]
    assert sample.M_r_last == path.M_Rr[15] + path.M_rr[15]
    assert np.array_equal(sample.M, path.M[:15])
    assert sample.M_last == path.M[15]


def test_extract_extended_variant_matching(rng):
    path, sample, _ = simulate_compatible(THETA, LAW_MEAN_32, LAW_MEAN_40, (10, 5, 5), 15,
                                          substream(32, (1, 0)), scheme="extended",
                                          variant=SchemeVariant.BOTH_POSITIVE)
    assert sample.variant is SchemeVariant.BOTH_POSITIVE
    assert sample.M_Rr_last + sample.M_rr_last == sample.basic.M_r_last
    assert sample.M_R_prev + sample.M_r_prev == sample.basic.M[-1]
    # the same path must refuse a different declared pattern
    assert extract_extended(path, SchemeVariant.RR_ZERO) is None


def test_extended_identities_enforced():
    b = _basic([10, 20, 30], [10, 15], 5, 7)
    with pytest.raises(ObservationError):
        ExtendedSample(b, 10, 5, 3, 3)  # split does not sum to M_r_last
    with pytest.raises(ObservationError):
        ExtendedSample(b, 9, 5, 3, 4)  # N-1 split does not sum to M[N-1]
    with pytest.raises(ObservationError):
        ExtendedSample(b, 15, 0, 3, 4)  # both genotypes required at N-1


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def test_rho_identity_and_symmetry(rng):
    for _ in range(200):
        a = _random_basic(rng)
        b = _random_basic(rng)
        assert rho(a, a) == 0.0
        assert rho(a, b) == rho(b, a)
        assert rho(a, b) >= 0.0


def test_rho_single_term_hand_value():
    obs = _basic([5, 2], [5], 1, 1)
    sim = _basic([5, 4], [5], 1, 1)
    # only the females term differs: (4/2 - 2/4)^2 = 2.25
    assert rho(sim, obs) == pytest.approx(1.5)


def test_rho_term_ranges():
    obs = _random_basic(np.random.default_rng(0), N=9)
    sim = _random_basic(np.random.default_rng(1), N=9)
    terms = rho_terms(sim, obs)
    # females 1..9, male totals 1..8, two final genotype terms
    assert len(terms) == 9 + 8 + 2
    assert "F_9" in terms and "M_8" in terms and "M_0" not in terms and "F_0" not in terms


def test_rho_star_hand_value():
    # doubling every retained coordinate: each term (2 - 1/2)^2 = 2.25;
    # N=2 keeps 7 terms (F_1, F_2, M^R_1, M^r_1, M^R_2 and the origin split)
    obs = ExtendedSample(_basic([3, 1, 1], [4, 4], 3, 5), 2, 2, 1, 4)
    sim = ExtendedSample(_basic([3, 2, 2], [4, 8], 6, 10), 4, 4, 2, 8)
    assert rho_star(sim, obs) == pytest.approx(math.sqrt(7 * 2.25))
    assert rho_star(sim, obs) == pytest.approx(3.968626966596886)


def test_rho_star_variant_term_deletion(rng):
    for variant, dropped in ((SchemeVariant.RR_ZERO, "M_rr_6"), (SchemeVariant.RMUT_ZERO, "M_Rr_6")):
        obs = _random_extended(rng, N=6, variant=variant)
        sim = _random_extended(rng, N=6, variant=variant)
        terms = rho_star_terms(sim, obs)
        assert dropped not in terms
        assert len(terms) == 6 + 4 + 3 + 1  # F_1..6, M_1..4, N-1 pair + M_R_N, one origin term


def test_rho_star_rejects_variant_mismatch(rng):
    both = _random_extended(rng, variant=SchemeVariant.BOTH_POSITIVE)
    rr = _random_extended(rng, variant=SchemeVariant.RR_ZERO)
    with pytest.raises(ValueError):
        rho_star(both, rr)


def test_rho_rejects_horizon_mismatch(rng):
    with pytest.raises(ValueError):
        rho(_random_basic(rng, N=5), _random_basic(rng, N=6))


def test_unretained_coordinates_do_not_matter(rng):
    # generation-0 entries never enter either distance
    obs = _random_extended(rng, N=6)
    sim = _random_extended(rng, N=6)
    F2 = sim.basic.F.copy()
    F2[0] += 17
    M2 = sim.basic.M.copy()
    M2[0] += 9
    sim2 = ExtendedSample(_basic(F2, M2, sim.basic.M_R_last, sim.basic.M_r_last),
                          sim.M_R_prev, sim.M_r_prev, sim.M_Rr_last, sim.M_rr_last)
    assert rho_star(sim, obs) == rho_star(sim2, obs)
    assert rho(sim.basic, obs.basic) == rho(sim2.basic, obs.basic)


def test_monotone_in_each_retained_coordinate(rng):
    # pushing one coordinate further from the observation strictly grows rho
    obs = _random_basic(rng, N=5)
    base = BasicSample(obs.F.copy(), obs.M.copy(), obs.M_R_last, obs.M_r_last)
    d0 = rho(base, obs)
    for n in range(1, 6):
        F2 = obs.F.copy()
        F2[n] += 3
        closer = rho(BasicSample(F2, obs.M, obs.M_R_last, obs.M_r_last), obs)
        F2[n] += 4
        farther = rho(BasicSample(F2, obs.M, obs.M_R_last, obs.M_r_last), obs)
        assert farther > closer > d0
    bigger = rho(BasicSample(obs.F, obs.M, obs.M_R_last + 5, obs.M_r_last), obs)
    assert bigger > d0


def test_rho_rho_star_decomposition(rng):
    # the two metrics share every term except the tail block
    for _ in range(50):
        obs = _random_extended(rng, N=7)
        sim = _random_extended(rng, N=7)
        t_basic = rho_terms(sim.basic, obs.basic)
        t_ext = rho_star_terms(sim, obs)
        shared = rho(sim.basic, obs.basic) ** 2 - t_basic["M_6"] - t_basic["M_r_7"]
        ext_total = rho_star(sim, obs) ** 2
        extra = t_ext["M_R_6"] + t_ext["M_r_6"] + t_ext["M_Rr_7"] + t_ext["M_rr_7"]
        assert ext_total == pytest.approx(shared + extra, rel=1e-12)


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def test_observed_csv_roundtrip_basic(tmp_path, rng):
    sample = _random_basic(rng, N=8)
    f = tmp_path / "obs.csv"
    write_observed_csv(f, sample, meta={"seed": 3})
    loaded = load_observed_csv(f)
    assert isinstance(loaded, BasicSample)
    assert loaded == sample


@pytest.mark.parametrize("variant", list(SchemeVariant))
def test_observed_csv_roundtrip_extended(tmp_path, rng, variant):
    sample = _random_extended(rng, N=8, variant=variant)
    f = tmp_path / "obs.csv"
    write_observed_csv(f, sample)
    loaded = load_observed_csv(f)
    assert isinstance(loaded, ExtendedSample)
    assert loaded == sample
    assert loaded.variant is variant


def test_loader_rejects_bad_files(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("n,F,M,M_R,M_r,M_Rr,M_rr\n0,10,10,,,,\n1,5,7,3,,,\n")
    with pytest.raises(ObservationError):
        load_observed_csv(f)  # missing M_r at the last generation
    f.write_text("n,F,M,M_R,M_r,M_Rr,M_rr\n0,10,10,,,,\n1,5,9,3,4,,\n")
    with pytest.raises(ObservationError):
        load_observed_csv(f)  # M != M_R + M_r at the last generation
    f.write_text("n,F,M,M_R,M_r,M_Rr,M_rr\n0,10,0,,,,\n1,5,7,3,4,,\n")
    with pytest.raises(ObservationError):
        load_observed_csv(f)  # zero male total before the horizon
    f.write_text("n,F,M,M_R,M_r,M_Rr,M_rr\n0,10,x,,,,\n1,5,7,3,4,,\n")
    with pytest.raises(ObservationError):
        load_observed_csv(f)  # non-integer cell
