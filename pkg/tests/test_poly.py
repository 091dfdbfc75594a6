import numpy as np
import pytest

from gifilter.poly import DimensionMismatch, Polynomial, PolyVector


def x(dim=1, i=0):
    return Polynomial.variable(dim, i)


class TestAdd:
    def test_additive_inverse(self):
        p = x() + (-x())
        assert p.terms == {}

    def test_like_term_merge(self):
        p = x() ** 2 + x() ** 2
        assert p.terms == {(2,): 2.0}

    def test_problem1_process_expansion(self):
        # x + 5*0.01*x*(1 - x^2) built from primitives
        p = x() + 5 * 0.01 * x() * (1 - x() ** 2)
        assert p.terms == pytest.approx({(1,): 1.05, (3,): -0.05})

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            x(1) + x(2)


class TestMul:
    def test_cross_term(self):
        p = x(2, 0) * x(2, 1)
        assert p.terms == {(1, 1): 1.0}

    def test_binomial_square(self):
        p = (x() - 0.05) ** 2
        assert p.terms == pytest.approx({(2,): 1.0, (1,): -0.1, (0,): 0.0025})

    def test_multiplicative_identity(self):
        p = x(2, 0) ** 3 + 2 * x(2, 1)
        one = Polynomial.constant(2, 1.0)
        assert one * p == p

    def test_degree_adds(self):
        a = x() ** 2 + 1
        b = x() ** 3 - x()
        assert (a * b).degree() == 5


class TestEval:
    def test_simple(self):
        p = x(2, 0) ** 2 * x(2, 1)
        assert p.eval([2.0, 3.0]) == 12.0

    def test_zero_poly(self):
        assert Polynomial.zero(3).eval([1.0, 2.0, 3.0]) == 0.0

    def test_equilibrium_fixed_point(self):
        p = Polynomial(1, {(1,): 1.05, (3,): -0.05})
        assert p.eval([1.0]) == pytest.approx(1.0, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            x().eval([1.0, 2.0])


class TestShift:
    def test_square_shift(self):
        p = (x() ** 2).shift([1.0])
        assert p.terms == pytest.approx({(2,): 1.0, (1,): 2.0, (0,): 1.0})

    def test_zero_shift_identity(self):
        p = 3 * x() ** 3 - x() + 2
        assert p.shift([0.0]) == p

    def test_cube_negative_shift(self):
        p = (x() ** 3).shift([-0.05])
        assert p.terms == pytest.approx(
            {(3,): 1.0, (2,): -0.15, (1,): 0.0075, (0,): -0.000125}
        )

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = _random_poly(rng, dim=2, max_deg=4)
            c = rng.uniform(-2, 2, size=2)
            back = p.shift(c).shift(-c)
            for e in set(back.terms) | set(p.terms):
                assert back.terms.get(e, 0.0) == pytest.approx(
                    p.terms.get(e, 0.0), rel=1e-9, abs=1e-9
                )


def _random_poly(rng, dim, max_deg, n_terms=5):
    terms = {}
    for _ in range(n_terms):
        expo = tuple(int(e) for e in rng.integers(0, max_deg + 1, size=dim))
        terms[expo] = rng.uniform(-3, 3)
    return Polynomial(dim, terms)


def test_mul_eval_consistency_random():
    rng = np.random.default_rng(42)
    for _ in range(100):
        dim = int(rng.integers(1, 5))
        a = _random_poly(rng, dim, max_deg=3)
        b = _random_poly(rng, dim, max_deg=3)
        pt = rng.uniform(-1.5, 1.5, size=dim)
        lhs = (a * b).eval(pt)
        rhs = a.eval(pt) * b.eval(pt)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_canonical_form_order_independent():
    a = x() + 2 * x() ** 2
    b = 2 * x() ** 2 + x()
    c = (x() + x() ** 2) + (x() ** 2 - 0.0 * x())
    assert a == b
    assert a.terms.keys() == c.terms.keys()


def test_format_rendering():
    p = Polynomial(1, {(1,): 1.05, (3,): -0.05})
    assert p.format() == "1.05*x1 - 0.05*x1^3"
    assert Polynomial.zero(2).format() == "0"


def test_polyvector_dims():
    with pytest.raises(DimensionMismatch):
        PolyVector([x(1), x(2, 0)])
    pv = PolyVector([x(2, 0) + 1, x(2, 1) * 2])
    assert pv.dim_in == 2
    np.testing.assert_allclose(pv.eval([1.0, 2.0]), [2.0, 4.0])
    np.testing.assert_allclose(pv.jacobian([1.0, 2.0]), [[1.0, 0.0], [0.0, 2.0]])


def test_eval_many_matches_eval():
    rng = np.random.default_rng(3)
    pv = PolyVector([_random_poly(rng, 2, 4), _random_poly(rng, 2, 3)])
    X = rng.uniform(-2, 2, size=(7, 2))
    batch = pv.eval_many(X)
    for r, pt in enumerate(X):
        np.testing.assert_allclose(batch[r], pv.eval(pt), rtol=1e-13)


def test_immutability():
    p = x()
    with pytest.raises(AttributeError):
        p.dim = 2
