import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermosteer.errors import ConditionViolated, ShapeError, ValidationError, ZeroSuccessProbability
from thermosteer.linalg import sqrtm_psd
from thermosteer.objects import (I2, PX, Channel, InstrumentFamily, apply_instrument, choi_distance,
                                 choi_of_map, identity_channel, pauli_xz_family, xz_projectors)
from thermosteer.resource import (DAO, Lf1Filter, apply_dao, apply_lf1, compose_dao, identity_dao,
                                  lf1_residuals, monotone_audit, random_dao, random_gibbs_preserving,
                                  random_lf1, relabel_dao)
from thermosteer.steering import sr_gamma
from thermosteer.thermo import Schedule

seeds = st.integers(0, 2**32 - 1)
GAMMA = np.diag([0.75, 0.25]).astype(complex)


def thermal_steering_family(gamma):
    """Replacement instruments preparing Pauli-steered pieces of ``gamma``."""
    r = sqrtm_psd(gamma)
    P = xz_projectors()
    d = gamma.shape[0]
    filters = {(a, x): Channel(np.kron(r @ P[x][a].T @ r, np.eye(d) / d), d, d)
               for x in range(2) for a in range(2)}
    return InstrumentFamily(filters, 2, 2)


def test_thermal_family_is_steerable():
    fam = thermal_steering_family(GAMMA)
    sigma = apply_instrument(fam, GAMMA)
    assert np.allclose(sigma.reduced, GAMMA)
    assert sr_gamma(sigma, GAMMA).sr > 0.1


@given(seeds)
def test_random_gibbs_preserving(seed):
    ch = random_gibbs_preserving(GAMMA, np.random.default_rng(seed))
    assert ch.is_tp and np.allclose(ch(GAMMA), GAMMA, atol=1e-12)


@settings(max_examples=20)
@given(seeds)
def test_dao_keeps_shared_average(seed):
    rng = np.random.default_rng(seed)
    fam = thermal_steering_family(GAMMA)
    out = apply_dao(random_dao(2, 2, GAMMA, rng), fam, GAMMA)
    assert out.average_spread <= 1e-10


@settings(max_examples=20)
@given(seeds)
def test_compose_matches_sequential(seed):
    rng = np.random.default_rng(seed)
    fam = thermal_steering_family(GAMMA)
    op1, op2 = random_dao(2, 2, GAMMA, rng), random_dao(2, 2, GAMMA, rng)
    seq = apply_dao(op2, apply_dao(op1, fam, GAMMA), GAMMA)
    once = apply_dao(compose_dao(op2, op1), fam, GAMMA)
    for k in seq.filters:
        assert choi_distance(seq[k], once[k]) <= 1e-9


def test_identity_and_relabel():
    fam = pauli_xz_family()
    same = apply_dao(identity_dao(2, 2, 2), fam, I2 / 2)
    assert all(choi_distance(same[k], fam[k]) <= 1e-14 for k in fam.filters)
    swapped = apply_dao(relabel_dao([[1, 0], [0, 1]], 2), fam, I2 / 2)
    assert choi_distance(swapped[(0, 0)], fam[(1, 0)]) <= 1e-14
    assert sr_gamma(apply_instrument(swapped, I2 / 2), I2 / 2).sr == pytest.approx(0.5, abs=1e-8)


def test_dao_validation():
    with pytest.raises(ValidationError):
        DAO(np.array([[0.5, 0.6], [1, 0]]), np.full((2, 2, 2, 2), 0.5), identity_channel(2), identity_channel(2))
    with pytest.raises(ShapeError):
        DAO(np.eye(2), np.full((2, 3, 2, 2), 0.5), identity_channel(2), identity_channel(2))
    flip = choi_of_map([PX])
    op = DAO(np.eye(2), identity_dao(2, 2, 2).post, flip, identity_channel(2))
    with pytest.raises(ValidationError):
        apply_dao(op, thermal_steering_family(GAMMA), GAMMA)
    # the audit rejects it before solving anything
    with pytest.raises(ValidationError):
        monotone_audit(thermal_steering_family(GAMMA), GAMMA, Schedule.partial(), ops=[op])


@given(seeds)
def test_lf1_composition(seed):
    rng = np.random.default_rng(seed)
    sigma = apply_instrument(thermal_steering_family(GAMMA), GAMMA)
    f1, f2 = random_lf1(GAMMA, rng), random_lf1(GAMMA, rng)
    two = apply_lf1(f2, apply_lf1(f1, sigma, GAMMA), GAMMA)
    one = apply_lf1(f1.then(f2), sigma, GAMMA)
    assert np.allclose(one.sigma, two.sigma, atol=1e-10)
    p = f1.then(f2).success_probability(GAMMA)
    assert p == pytest.approx(f1.success_probability(GAMMA) * f2.success_probability(GAMMA), abs=1e-10)


def test_lf1_conditions():
    sigma = apply_instrument(pauli_xz_family(), I2 / 2)
    with pytest.raises(ConditionViolated) as exc:
        apply_lf1(Lf1Filter(np.diag([1.0, 0.0])), sigma, I2 / 2)
    assert exc.value.condition == "ii"
    with pytest.raises(ZeroSuccessProbability):
        apply_lf1(Lf1Filter(np.zeros((2, 2))), sigma, I2 / 2)
    with pytest.raises(ValidationError):
        Lf1Filter(2 * np.eye(2))
    p, r1, r2 = lf1_residuals(Lf1Filter(0.5 * np.eye(2)), sigma, I2 / 2)
    assert p == pytest.approx(0.25) and r1 <= 1e-12 and r2 <= 1e-12


@pytest.mark.parametrize("gamma", [I2 / 2, GAMMA], ids=["maximally-mixed", "thermal"])
def test_monotone_suite(gamma):
    rng = np.random.default_rng(42)
    fam = pauli_xz_family() if np.allclose(gamma, I2 / 2) else thermal_steering_family(gamma)
    ops = [random_dao(2, 2, gamma, rng) for _ in range(40)]
    filters = [random_lf1(gamma, rng) for _ in range(40)]
    rep = monotone_audit(fam, gamma, Schedule.rational(1.0), ops, filters)
    assert rep.passed and len(rep.rows) == 80
    back = json.loads(json.dumps(rep.to_json()))
    assert back["passed"] is True
    assert rep.table().splitlines()[-1] == "overall: PASS"


def test_permissive_marks_rows():
    fam = pauli_xz_family()
    bad = Lf1Filter(np.diag([1.0, 0.5]))
    with pytest.raises(ConditionViolated):
        monotone_audit(fam, I2 / 2, Schedule.partial(), filters=[bad])
    rep = monotone_audit(fam, I2 / 2, Schedule.partial(), filters=[bad], permissive=True)
    assert not rep.rows[0].certified
    assert rep.rows[0].sr_after != rep.rows[0].sr_before
    # a failing non-certified row does not fail the audit
    rep.rows[0].passed = False
    assert rep.passed
    assert "non-certified" in rep.table()
