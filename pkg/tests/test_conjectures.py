import math

import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from normschwarz import conjectures as cj
from normschwarz.expectation import expect_u
from normschwarz.harness import random_commuting_pair
from normschwarz.linalg import (
    NormalMatrix,
    PositiveDefiniteMatrix,
    random_hermitian,
    random_normal,
    random_pd,
    random_unitary,
)
from normschwarz.means import gmean

seeds = st.integers(0, 2**32 - 1)
ROOT = math.sqrt(101 / 650)


def scipy_gmean(a, b):
    """Independent reference: scipy sqrtm + dense inverse."""
    ra = sla.sqrtm(a)
    ria = np.linalg.inv(ra)
    return ra @ sla.sqrtm(ria @ b @ ria) @ ra


@pytest.fixture(scope="module")
def reference_triple():
    x, y, _ = cj.paper_counterexample()
    x2 = x.a @ x.a
    yinv2 = np.linalg.inv(y.a @ y.a)
    return PositiveDefiniteMatrix(x2), PositiveDefiniteMatrix(yinv2), np.eye(2)


@pytest.fixture(scope="module")
def embedded(reference_triple):
    return cj.embed_cyclic(*reference_triple)


# --- reports ---------------------------------------------------------------

def test_report_verdict_and_json_keys():
    r = cj.check_dagger(np.eye(2), np.eye(2), np.eye(2))
    d = r.to_dict()
    assert set(d) >= {"conjecture_id", "lhs", "rhs", "margin", "holds", "condition_numbers", "instance_digest"}
    assert d["conjecture_id"] == "DAGGER"
    assert r.margin == pytest.approx(r.lhs - r.rhs)
    assert r.holds


def test_verdict_uses_scaled_tolerance():
    rep = cj._report("C1", 1.0 - 5e-9, 1.0, [], [np.eye(1)], 1e-8)
    assert rep.holds
    rep = cj._report("C1", 1.0 - 2e-8, 1.0, [], [np.eye(1)], 1e-8)
    assert not rep.holds
    rep = cj._report("C1", 100.0 - 5e-7, 100.0, [], [np.eye(1)], 1e-8)
    assert rep.holds


def test_digest_depends_on_inputs():
    a = cj.check_two_term(np.eye(2), 2 * np.eye(2)).instance_digest
    b = cj.check_two_term(np.eye(2), 3 * np.eye(2)).instance_digest
    c = cj.check_two_term(np.eye(2), 2 * np.eye(2)).instance_digest
    assert a != b and a == c


def test_dispatch():
    r = cj.check("TWO_TERM", {"A": np.eye(2), "B": np.eye(2)})
    assert r.conjecture_id == "TWO_TERM"
    with pytest.raises(ValueError):
        cj.check("NOPE", {})
    with pytest.raises(ValueError):
        cj.check("C3", {"S": np.eye(2)})


# --- Conjecture 1 and the half-power inequality ----------------------------

def test_conj1_unitary_b_holds():
    g = np.random.default_rng(0)
    for _ in range(50):
        a = random_pd(3, 1e4, g)
        u = random_unitary(3, g)
        r = cj.check_conj1(a, u)
        assert r.holds and r.margin >= -1e-8


def test_conj1_identity_a_gives_zero_margin():
    b = random_pd(4, 1e2, np.random.default_rng(1))
    r = cj.check_conj1(np.eye(4), b)
    assert r.margin == pytest.approx(0.0, abs=1e-12)
    assert r.flags["is_normal"]


def test_conj1_rejects_singular_b():
    with pytest.raises(ValueError):
        cj.check_conj1(np.eye(2), np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        cj.check_conj1(np.eye(2), np.diag([1.0, 1e-12]))


def test_conj1_accepts_non_normal_b():
    r = cj.check_conj1(np.eye(2), [[1, 1], [0, 1]])
    assert not r.flags["is_normal"]


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(2, 5))
def test_ando_self_adjoint_and_scalar_unitary(seed, n):
    g = np.random.default_rng(seed)
    a = random_pd(n, 1e4, g)
    assert cj.check_conj1(a, random_hermitian(n, g)).holds
    alpha = complex(g.standard_normal(), g.standard_normal())
    assert cj.check_conj1(a, alpha * random_unitary(n, g).a).holds


def test_halfpower_identity_a():
    h = random_hermitian(3, np.random.default_rng(2))
    r = cj.check_halfpower(np.eye(3), h)
    assert r.margin == pytest.approx(0.0, abs=1e-12)
    assert r.flags["is_normaloid"]


def test_halfpower_normal_b_holds():
    g = np.random.default_rng(3)
    for i in range(100):
        n = 2 + i % 5
        r = cj.check_halfpower(random_pd(n, 1e4, g), random_normal(n, g))
        assert r.holds and r.flags["is_normaloid"]


def test_halfpower_non_normaloid_is_flagged():
    b = np.array([[0, 1], [0, 0]]) + 1e-3 * np.eye(2)
    r = cj.check_halfpower(np.diag([1.0, 4.0]), b)
    assert r.flags["is_normaloid"] is False
    assert math.isfinite(r.margin)


# --- Conjectures 2 and 3 ---------------------------------------------------

def test_conj2_trivial_cases():
    g = np.random.default_rng(4)
    u = random_unitary(3, g)
    r = cj.check_conj2(np.eye(3), u, np.eye(3))
    assert r.lhs == pytest.approx(1.0, abs=1e-12) and r.margin == pytest.approx(0.0, abs=1e-12)
    u, d = random_commuting_pair(4, 1e3, g)
    r = cj.check_conj2(np.eye(4), u, d)
    assert r.margin == pytest.approx(0.0, abs=1e-10 * r.rhs)


def test_conj2_rejects_noncommuting():
    with pytest.raises(ValueError):
        cj.check_conj2(np.eye(2), np.diag([1.0, -1.0]), [[2, 1], [1, 2]])


def test_conj3_identity_s():
    r = cj.check_conj3(np.eye(3), random_unitary(3, np.random.default_rng(5)))
    assert r.margin == pytest.approx(0.0, abs=1e-12)


def test_conj3_two_by_two_holds():
    g = np.random.default_rng(6)
    for _ in range(200):
        assert cj.check_conj3(random_pd(2, 1e6, g), random_unitary(2, g)).margin >= -1e-9


def test_conj3_fails_on_embedding(embedded):
    s, u = embedded
    r = cj.check_conj3(s, u)
    assert not r.holds
    assert r.margin == pytest.approx((2 + ROOT) / 3 - 1, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_twisted_mean_has_unit_determinant(seed, n):
    g = np.random.default_rng(seed)
    m = cj.twisted_mean(random_pd(n, 1e4, g), random_unitary(n, g))
    assert m.det == pytest.approx(1.0, rel=1e-8)


def test_equivalence_chain_identity():
    g = np.random.default_rng(7)
    for i in range(100):
        n = 2 + i % 5
        s = random_pd(n, 1e2, g)
        u, d = random_commuting_pair(n, 1e2, g)
        b = u.a @ d.a
        a = d.sqrt.a @ s.a @ d.sqrt.a
        lhs = gmean(a, b.conj().T @ np.linalg.inv(a) @ b).a
        rhs = d.sqrt.a @ cj.twisted_mean(s, u).a @ d.sqrt.a
        assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(rhs).max())
        m1 = cj.check_conj1(a, b).margin
        m2 = cj.check_conj2(s, u, d).margin
        assert m1 == pytest.approx(m2, abs=1e-9 * max(1.0, abs(m2)))


# --- (dagger), (ddagger), trace and two-term inequalities ------------------

def test_dagger_trivial():
    assert cj.check_dagger(np.eye(3), np.eye(3), np.eye(3)).margin == pytest.approx(0.0, abs=1e-14)
    a = random_pd(3, 1e3, np.random.default_rng(8))
    assert cj.check_dagger(a, a, a).margin == pytest.approx(0.0, abs=1e-9)


def test_dagger_fails_on_reference_triple(reference_triple):
    r = cj.check_dagger(*reference_triple)
    assert not r.holds
    assert r.margin == pytest.approx(2 + ROOT - 3, abs=1e-10)


def test_ddagger_holds_on_reference_triple(reference_triple):
    assert cj.check_ddagger(np.eye(2), np.eye(2), np.eye(2)).margin == pytest.approx(0.0, abs=1e-14)
    r = cj.check_ddagger(*reference_triple)
    assert r.holds and r.margin >= 0


def test_trace_inequalities_on_reference_triple(reference_triple):
    assert cj.check_trace_i(np.eye(2), random_unitary(2, np.random.default_rng(9))).margin == pytest.approx(
        0.0, abs=1e-12)
    r = cj.check_trace_ii(*reference_triple)
    # diagonal sum: (2 + ROOT) and 100 + 52 / (25 sqrt(5050 * 52))
    second = 100 + 52 / (25 * math.sqrt(5050 * 52))
    assert r.lhs == pytest.approx((2 + ROOT + second) / 2, rel=1e-12)
    assert r.holds


def test_two_term_examples():
    a = random_pd(3, 1e3, np.random.default_rng(10))
    assert cj.check_two_term(a, a).margin == pytest.approx(0.0, abs=1e-9)
    r = cj.check_two_term(4 * np.eye(2), np.eye(2))
    assert r.margin == pytest.approx(0.5, abs=1e-14)
    assert r.flags["inverse_identity_ok"]


def test_two_term_inverse_identity():
    g = np.random.default_rng(11)
    for i in range(100):
        n = 2 + i % 5
        r = cj.check_two_term(random_pd(n, 1e3, g), random_pd(n, 1e3, g))
        assert r.holds
        assert r.flags["inverse_residual"] <= 1e-9


# --- embedding and constructions -------------------------------------------

def test_embed_identity_blocks():
    s, u = cj.embed_cyclic(np.eye(2), np.eye(2), np.eye(2))
    npt.assert_array_equal(s.a, np.eye(6))
    npt.assert_array_equal(np.linalg.matrix_power(u.a, 3), np.eye(6))
    assert cj.check_conj3(s, u).margin == pytest.approx(0.0, abs=1e-12)


def test_embed_diagonal_blocks_are_dagger_average():
    g = np.random.default_rng(12)
    for n in (1, 2, 3):
        a, b, c = (random_pd(n, 1e3, g) for _ in range(3))
        s, u = cj.embed_cyclic(a, b, c)
        e = expect_u(u, cj.twisted_mean(s, u).a)
        avg = (gmean(a, b.inv).a + gmean(b, c.inv).a + gmean(c, a.inv).a) / 3
        scale = np.abs(avg).max()
        for k in range(3):
            blk = e[k * n:(k + 1) * n, k * n:(k + 1) * n]
            assert np.abs(blk - avg).max() <= 1e-9 * scale
        off = e.copy()
        for k in range(3):
            off[k * n:(k + 1) * n, k * n:(k + 1) * n] = 0
        assert np.abs(off).max() <= 1e-9 * scale


def test_reference_facts():
    x, y, facts = cj.paper_counterexample()
    assert all(f.ok for f in facts.values()), [f.name for f in facts.values() if not f.ok]
    assert facts["det X"].computed == pytest.approx(0.04, abs=1e-15)
    assert facts["e1* (X^2 # Y^2) e1"].expected == pytest.approx(0.39418855308673, abs=1e-13)
    npt.assert_array_equal(x.a, np.array([[50, 5], [5, 1]]) / 25)
    npt.assert_array_equal(y.a, np.array([[50, -5], [-5, 1]]) / 25)


def test_construct_returns_none_for_two_by_two():
    g = np.random.default_rng(13)
    for _ in range(100):
        assert cj.construct_conj1_counterexample(random_pd(2, 1e4, g), random_unitary(2, g)) is None


def test_construct_from_embedding(embedded):
    s, u = embedded
    ce = cj.construct_conj1_counterexample(s, u)
    assert ce is not None and 1 <= ce.m <= 64
    assert ce.compression == pytest.approx((2 + ROOT) / 3, abs=1e-9)
    assert ce.trajectory[-1] < 1 - 1e-8
    assert all(t >= 1 - 1e-8 for t in ce.trajectory[:-1])
    assert isinstance(ce.b, NormalMatrix)
    assert ce.b.normality_defect <= 1e-9

    r = cj.check_conj1(ce.a, ce.b)
    assert not r.holds
    assert r.rhs == pytest.approx(1.0, abs=1e-10)

    # independent oracle on the final pair
    a, b = ce.a.a, ce.b.a
    lhs = np.linalg.norm(scipy_gmean(a, b.conj().T @ np.linalg.inv(a) @ b), 2)
    assert lhs < np.linalg.norm(b, 2) - 1e-3
    assert lhs == pytest.approx(r.lhs, rel=1e-6)


def test_construct_also_breaks_conj2(embedded):
    s, u = embedded
    ce = cj.construct_conj1_counterexample(s, u)
    e = np.outer(ce.xi, ce.xi.conj())
    dm = e + 2.0 ** (-ce.m) * (np.eye(6) - e)
    r = cj.check_conj2(s, u, dm)
    assert not r.holds
    assert r.rhs == pytest.approx(1.0, abs=1e-12)


def test_construct_raises_when_power_cap_too_small(embedded):
    s, u = embedded
    with pytest.raises(cj.ConstructionError) as info:
        cj.construct_conj1_counterexample(s, u, max_power=3)
    assert len(info.value.trajectory) == 3
