import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprga.algebra import Multivector, geometric_product, unit_bivector
from eprga.chsh import (
    TSIRELSON,
    ChshConfig,
    chsh_separate,
    chsh_single_average,
    dispute_eval,
    singlet_correlation,
    third_spin_average,
    torsion,
    variance_bound,
)
from eprga.spin import TrialStream, spin_bivector

import oracles

EX, EY, EZ = np.eye(3)
pm = st.sampled_from([1, -1])
quads = st.lists(st.tuples(pm, pm, pm, pm), min_size=1, max_size=100)


def cosine_chsh(a, ap, b, bp):
    """CHSH string of -cos(angle difference), straight from the planar angles."""
    e = lambda x, y: -math.cos(math.radians(x - y))
    return e(a, b) + e(a, bp) + e(ap, b) - e(ap, bp)


def separate_from(config):
    return chsh_separate(*(singlet_correlation(x, y) for x, y in config.pairs()))


@pytest.mark.parametrize("angles, expected", [
    ((0, 90, 225, 135), TSIRELSON),
    ((0, 90, 45, -45), -TSIRELSON),
])
def test_separate_reaches_tsirelson(angles, expected):
    got = separate_from(ChshConfig.from_angles(*angles))
    assert got == pytest.approx(cosine_chsh(*angles), abs=1e-12)
    assert abs(got - expected) <= 1e-9


def test_separate_at_common_textbook_labelling_is_zero():
    # (0, 90, 45, 135): b' - b = 90 deg puts the minus sign on the wrong pair
    got = separate_from(ChshConfig.from_angles(0, 90, 45, 135))
    assert abs(got) <= 1e-12
    assert cosine_chsh(0, 90, 45, 135) == pytest.approx(0.0, abs=1e-12)


def test_separate_trivial():
    assert chsh_separate(0.0, 0.0, 0.0, 0.0) == 0.0
    assert chsh_separate(1.0, 1.0, 1.0, -1.0) == 4.0


def test_separate_bound_over_random_quadruples():
    rng = np.random.default_rng(40)
    worst = 0.0
    for _ in range(2000):
        q = ChshConfig(*oracles.random_units(rng, 4))
        worst = max(worst, abs(separate_from(q)))
    assert worst <= TSIRELSON + 1e-9


def test_separate_supremum_approached_in_plane():
    grid = np.arange(0, 360, 5)
    best = max(abs(cosine_chsh(0, ap, b, bp)) for ap in grid for b in grid for bp in grid[::3])
    assert TSIRELSON - best <= 0.01


@settings(max_examples=200)
@given(quads)
def test_single_average_bounded(rows):
    assert abs(chsh_single_average(rows)) <= 2


def test_single_average_examples():
    assert chsh_single_average([(1, 1, 1, 1)]) == 2.0
    n = 10 ** 6
    t = np.random.default_rng(41).choice([1, -1], size=(n, 4))
    assert abs(chsh_single_average(t)) <= 5 * 2 / math.sqrt(n)


def test_single_average_rejects_bad_scores():
    with pytest.raises(ValueError):
        chsh_single_average([(1, 0, 1, 1)])
    with pytest.raises(ValueError):
        chsh_single_average([(1, 1, 1)])


def test_torsion_examples():
    t = torsion(1, EX, EY)
    assert t.value.isclose(-unit_bivector(EZ), atol=1e-15)
    assert torsion(-1, EX, EY).value.isclose(unit_bivector(EZ), atol=1e-15)
    for lam in (1, -1):
        assert torsion(lam, EY, EY).value.max_norm() == 0.0


def test_torsion_identity_random_pairs():
    rng = np.random.default_rng(42)
    for n, m in zip(oracles.random_units(rng, 1000), oracles.random_units(rng, 1000)):
        for lam in (1, -1):
            expected = -lam * Multivector.bivector(np.cross(n, m))
            assert (torsion(lam, n, m).value - expected).max_norm() <= 1e-12


def test_plain_commutator_only_matches_for_right_handed():
    ln, lm = spin_bivector(EX, -1), spin_bivector(EY, -1)
    plain = (geometric_product(ln, lm) - geometric_product(lm, ln)) / 2
    assert (plain - torsion(-1, EX, EY).value).norm() == pytest.approx(2.0)
    ln, lm = spin_bivector(EX, 1), spin_bivector(EY, 1)
    plain = (geometric_product(ln, lm) - geometric_product(lm, ln)) / 2
    assert plain.isclose(torsion(1, EX, EY).value, atol=1e-15)


def test_variance_bound_textbook_quadruple():
    lam, _ = TrialStream(43).trials(0, 10 ** 5)
    vb = variance_bound(ChshConfig.from_angles(0, 90, 45, 135), lam)
    assert vb.cross_term == pytest.approx(-1.0, abs=1e-12)
    assert vb.rhs_limit == pytest.approx(TSIRELSON, abs=1e-12)
    assert abs(vb.rhs - vb.rhs_limit) <= 5 / math.sqrt(lam.size)
    # the separate string here is 0, far from the bound
    assert vb.lhs == pytest.approx(0.0, abs=1e-12)


def test_variance_bound_tight_quadruple():
    # (a x a') . (b x b') = -1 is the configuration that reaches 2 sqrt 2
    vb = variance_bound(ChshConfig.from_angles(0, 90, 225, 135), [1, -1])
    assert vb.lhs == pytest.approx(TSIRELSON, abs=1e-12)
    assert vb.cross_term == pytest.approx(1.0, abs=1e-12)
    assert vb.rhs_limit == pytest.approx(0.0, abs=1e-6)
    assert not vb.holds


def test_variance_bound_degenerate_quadruple():
    rng = np.random.default_rng(44)
    a, b, bp = oracles.random_units(rng, 3)
    vb = variance_bound(ChshConfig(a, a, b, bp), [1, 1, -1])
    assert vb.lhs == pytest.approx(abs(2 * singlet_correlation(a, b)), abs=1e-12)
    assert vb.lhs <= 2 + 1e-12
    assert vb.rhs == 2.0 and vb.rhs_limit == 2.0
    assert vb.remainder.max_norm() == 0.0
    assert vb.holds


def test_variance_rhs_never_exceeds_tsirelson_and_converges():
    rng = np.random.default_rng(45)
    n = 10 ** 4
    for k in range(200):
        q = ChshConfig(*oracles.random_units(rng, 4))
        lam, _ = TrialStream(46, k).trials(0, n)
        vb = variance_bound(q, lam)
        assert vb.rhs_limit <= TSIRELSON + 1e-9
        assert abs(vb.rhs - vb.rhs_limit) <= 5 / math.sqrt(n)


def test_variance_rhs_squared_matches_radicand():
    # (rhs + remainder)^2 = 4(1 - c) - 4 mean(lam) |z| D(z_hat)
    rng = np.random.default_rng(47)
    q = ChshConfig(*oracles.random_units(rng, 4))
    lam = np.array([1, 1, 1, -1])
    vb = variance_bound(q, lam)
    root = vb.remainder + vb.rhs
    u, v = np.cross(q.a, q.a_prime), np.cross(q.b_prime, q.b)
    z = np.cross(u, v)
    radicand = 4 * (1 - vb.cross_term) - 4 * lam.mean() * Multivector.bivector(z)
    assert (root * root - radicand).max_norm() <= 1e-12


def test_variance_bound_rejects_bad_samples():
    q = ChshConfig.from_angles(0, 90, 45, 135)
    with pytest.raises(ValueError):
        variance_bound(q, [])
    with pytest.raises(ValueError):
        variance_bound(q, [1, 0])


@pytest.mark.parametrize("mu, nu", [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)])
def test_dispute_values(mu, nu):
    r = dispute_eval(mu, nu, samples=50)
    assert r.naive_residual == pytest.approx(2.0, abs=1e-12)
    assert r.oriented_residual <= 1e-12
    assert r.zero_claim_norm == pytest.approx(2.0, abs=1e-12)
    assert r.contraction_residual <= 1e-12
    for v in (r.naive_residual, r.oriented_residual, r.zero_claim_norm, r.contraction_residual):
        assert v >= 0.0


def test_dispute_requires_distinct_indices():
    with pytest.raises(ValueError):
        dispute_eval(2, 2)


def test_third_spin_average():
    a, b = EX, EY
    assert third_spin_average(a, b, [1, -1] * 50).max_norm() == 0.0
    assert third_spin_average(a, b, [1] * 7).isclose(unit_bivector(EZ), atol=1e-15)
    lam, _ = TrialStream(48).trials(0, 10 ** 6)
    assert third_spin_average(a, b, lam).norm() <= 0.004
    with pytest.raises(ValueError):
        third_spin_average(a, b, [])
