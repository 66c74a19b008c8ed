from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpcodes.errors import ConstraintViolated, UndefinedAtTerminal
from fpcodes.field import FieldSpec, sample_distinct_points
from fpcodes.folded import (
    Sign,
    TermPoly,
    antisymmetric_m1_basis,
    build_chain_structure,
    chi,
    coefficient_matrix,
    cube,
    eval_matrix,
    loop_index_set,
    omega,
    orbit,
    phi,
    reduced_basis,
    sigma1,
    sigma2,
    span_dims,
    structured_basis,
    structured_det_prediction,
    symmetric_m1_basis,
    term_of,
    term_poly,
)
from fpcodes.linalg import determinant, rank

Q = FieldSpec.rational()
F101 = FieldSpec.prime(101)
GF8 = FieldSpec.binary(8)
SMALL = [(m, p) for m in range(1, 7) for p in range(1, 7)]


def test_phi_examples():
    assert phi(1, 0, 1, 2, 2) == (1, 0, 1)
    assert phi(0, 0, 1, 2, 2) == (0, 1, 1)
    assert phi(0, 1, 1, 2, 2) == (1, 1, 1)
    for m, p in [(1, 3), (2, 2), (4, 5)]:
        with pytest.raises(UndefinedAtTerminal):
            phi(m - 1, m - 1, 1, m, p)


@pytest.mark.parametrize("m,p", [(m, p) for m in range(1, 9) for p in range(1, 9)])
def test_phi_adjacency(m, p):
    for k, s, t in cube(m, p):
        if (k, s) == (m - 1, m - 1):
            continue
        assert sigma1(k, s, t, m, p) == sigma2(*phi(k, s, t, m, p), m, p)


def test_chain_examples():
    cs = build_chain_structure(2, 2)
    assert list(cs.loops) == [(0, 1)]
    assert cs.loops[(0, 1)] == ((1, 0, 1),)
    assert cs.special_key == (0, 1)
    assert cs.single_chains == (((0, 0, 1), (0, 1, 1), (1, 1, 1)),)

    for p in range(1, 6):
        cs = build_chain_structure(1, p)
        assert cs.loops == {}
        assert cs.single_chains == tuple(((0, 0, t),) for t in range(1, p))

    cs = build_chain_structure(3, 2)
    assert list(cs.loops) == [(0, 1)]
    assert len(cs.loops[(0, 1)]) == 4
    assert sum(len(c) for c in cs.single_chains) == 5


@pytest.mark.parametrize("m,p", [(m, p) for m in range(1, 9) for p in range(1, 9)])
def test_cover_partitions_cube(m, p):
    cs = build_chain_structure(m, p)
    seen = [y for _, seq in cs.all_sequences() for y in seq]
    assert len(seen) == len(set(seen)) == m * m * (p - 1)
    assert set(seen) == set(cube(m, p))


def _rotations(seq):
    return {tuple(seq[i:] + seq[:i]) for i in range(len(seq))}


@pytest.mark.parametrize("m,p", [(m, p) for m in range(2, 9) for p in range(2, 9)])
def test_loop_identity(m, p):
    for s in range(m - 1):
        for t in range(1, p):
            a = orbit((m - 1, s, t), m, p)
            b = orbit((m - 1, m - 2 - s, p - t), m, p)
            assert a[-1] != (m - 1, m - 1, a[-1][2])  # a genuine loop
            assert tuple(b) in _rotations(a)


@pytest.mark.parametrize("m,p", [(m, p) for m in range(1, 9) for p in range(1, 9)])
def test_loop_index_set_matches_orbit_enumeration(m, p):
    # oracle: deduplicate all loops through (m-1, s, t), s <= m-2
    loops = set()
    for s in range(m - 1):
        for t in range(1, p):
            loops.add(frozenset(orbit((m - 1, s, t), m, p)))
    got = {frozenset(orbit((m - 1, a, b), m, p)) for a, b in loop_index_set(m, p)}
    assert got == loops
    assert len(loop_index_set(m, p)) == len(loops)


def test_span_dims_examples():
    assert span_dims(2, 2, 0) == (4, 3)
    assert span_dims(2, 2, 101) == (4, 3)
    assert span_dims(2, 2, 2) == (3, 3)
    for p in range(1, 8):
        for c in (0, 2, 7):
            assert span_dims(1, p, c) == (p - 1, p - 1)


def _rank_of(m, p, spec, sign):
    polys = [term_of(y, m, p) for y in omega(m, p, sign)]
    if not polys:
        return 0
    return rank(coefficient_matrix(polys, spec)[0])


@pytest.mark.parametrize("m,p", SMALL)
def test_dims_match_rank(m, p):
    for spec in (F101, GF8):
        dp, dm = span_dims(m, p, spec.characteristic)
        assert _rank_of(m, p, spec, Sign.PLUS) == dp
        assert _rank_of(m, p, spec, Sign.MINUS) == dm


@pytest.mark.parametrize("m,p", SMALL)
@pytest.mark.parametrize("sign", [Sign.PLUS, Sign.MINUS])
def test_reduced_basis(m, p, sign):
    for spec in (F101, GF8):
        rb = reduced_basis(m, p, spec.characteristic, sign)
        dim = span_dims(m, p, spec.characteristic)[0 if sign is Sign.PLUS else 1]
        kept = [term_of(y, m, p) for y in rb.kept_terms]
        assert len(kept) == dim
        if kept:
            assert rank(coefficient_matrix(kept, spec)[0]) == dim
        for head in rb.eliminated:
            assert head not in rb.kept_terms
            assert all(idx in rb.kept_terms for idx, _ in rb.eliminated[head])
            assert rb.expansion(head, m, p).over(spec) == term_of(head, m, p).over(spec)
        covered = set(rb.kept_terms) | set(rb.eliminated)
        # every term is kept, eliminated, or vanishes identically
        for y in omega(m, p, sign):
            if y not in covered:
                assert not term_of(y, m, p).over(spec)


def test_reduced_basis_examples():
    rb = reduced_basis(2, 2, 2, Sign.PLUS)
    assert [y.triple for y in rb.kept_terms] == [(0, 0, 1), (0, 1, 1), (1, 1, 1)]
    assert not term_poly(1, 0, 1, 2, 2).over(GF8)
    assert term_poly(1, 0, 1, 2, 2) == TermPoly([(4, 2)])
    for p in range(1, 6):
        rb = reduced_basis(1, p, 0, Sign.PLUS)
        assert len(rb.kept_terms) == p - 1 and rb.eliminated == {}
    rb = reduced_basis(3, 2, 0, Sign.PLUS)
    assert len(rb.kept_terms) == span_dims(3, 2, 0)[0] == _rank_of(3, 2, F101, Sign.PLUS)


def test_term_poly_arithmetic():
    a = TermPoly([(2, 1), (0, 1)])
    b = TermPoly([(2, -1), (5, 3)])
    assert (a + b) == TermPoly([(0, 1), (5, 3)])
    assert (a - a).is_zero
    assert a.degree == 2 and a.exponents == (0, 2)
    assert a.scale(0).is_zero
    assert a.evaluate(Fraction(1, 2), Q) == Fraction(5, 4)
    with pytest.raises(ValueError):
        a.evaluate(2)
    assert a.over(GF8).evaluate(3, GF8) == GF8.add(GF8.mul(3, 3), 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(-5, 5)), max_size=6), st.integers(-20, 20))
def test_evaluate_matches_direct_sum(terms, x):
    g = TermPoly(terms)
    direct = sum(c * x**e for e, c in terms)
    assert g.evaluate(x, Q) == direct
    assert g.over(F101).evaluate(x % 101, F101) == direct % 101


def test_eval_matrix_examples():
    G = [TermPoly.monomial(1), TermPoly([(0, 1), (2, 1)])]
    assert eval_matrix(G, [2, 3], Q).tolist() == [[2, 3], [5, 10]]
    assert eval_matrix([TermPoly.monomial(0)], [Fraction(7, 3)], Q).tolist() == [[1]]
    pts = sample_distinct_points(F101, 3, "no_reciprocal_pairs", seed=2)
    basis = symmetric_m1_basis(3)
    M = eval_matrix(basis, pts)
    for i, g in enumerate(basis):
        for j, x in enumerate(pts):
            assert M.data[i, j] == sum(c * x.value**e for e, c in g.terms) % 101


def test_m1_bases_are_the_folded_terms():
    # m = 1: the plus terms of Omega_1 plus the C monomial, the minus terms of Omega_2
    for p in range(1, 7):
        plus = {term_poly(0, 0, t, 1, p) for t in range(1, p)} | {TermPoly.monomial(p - 1)}
        assert set(symmetric_m1_basis(p)) == plus
        minus = {term_poly(0, 0, t, 1, p, Sign.MINUS) for t in range(1, p)}
        assert set(antisymmetric_m1_basis(p - 1)) == minus


def test_structured_det_examples():
    assert structured_det_prediction("symmetric_m1", [2, 3], Q).value == 5
    assert structured_det_prediction("antisymmetric_m1", [2], Q).value == 3
    with pytest.raises(ConstraintViolated):
        structured_det_prediction("symmetric_m1", [2, 2], Q)
    with pytest.raises(ConstraintViolated):
        structured_det_prediction("symmetric_m1", [2, Fraction(1, 2)], Q)


@pytest.mark.parametrize("kind", ["symmetric_m1", "antisymmetric_m1"])
@pytest.mark.parametrize("spec", [Q, FieldSpec.prime(2**31 - 1)], ids=str)
def test_structured_det_against_determinant(kind, spec):
    for n in range(1, 7):
        for seed in range(10):
            betas = sample_distinct_points(spec, n, "no_reciprocal_pairs", seed=seed)
            pred = structured_det_prediction(kind, betas)
            assert pred == determinant(eval_matrix(structured_basis(kind, n), betas))


def test_chi():
    assert [chi(x) for x in range(5)] == [1, 0, 1, 0, 1]
