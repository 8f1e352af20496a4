"""Unit and property tests for truncated series arithmetic."""

import random
from fractions import Fraction

import pytest

from perturbkit.series import (
    FLOAT,
    RATIONAL,
    ModeMismatchError,
    NonzeroInnerConstantError,
    TruncatedSeries,
    ZeroConstantTermError,
    standard_series,
)

F = Fraction


def rat(*coeffs, order=None):
    return TruncatedSeries.rational(coeffs, order=order)


# ---------------------------------------------------------------------------
# construction and invariants


def test_trailing_zeros_are_stored():
    s = rat(1, 0, 0)
    assert s.order == 2
    assert s.coeffs == (F(1), F(0), F(0))


def test_order_padding_and_truncation():
    assert rat(1, 2, order=4).coeffs == (F(1), F(2), F(0), F(0), F(0))
    assert rat(1, 2, 3, order=1).coeffs == (F(1), F(2))


def test_mode_mismatch_is_an_error_not_a_promotion():
    a = rat(1, 2)
    b = TruncatedSeries.floating([1.0, 2.0])
    for op in (a.add, a.mul, a.sub):
        with pytest.raises(ModeMismatchError):
            op(b)
    with pytest.raises(ModeMismatchError):
        TruncatedSeries.rational([0.5])
    with pytest.raises(ModeMismatchError):
        a.scale(0.5)


def test_immutability():
    s = rat(1, 2)
    with pytest.raises(AttributeError):
        s.order = 5


def test_variable_tag_must_agree():
    a = TruncatedSeries.rational([1, 1], var="eps")
    b = TruncatedSeries.rational([1, 1], var="t")
    with pytest.raises(Exception):
        a.add(b)


# ---------------------------------------------------------------------------
# add


def test_add_cancellation():
    # (1 + eps) + (1 - eps) = 2
    out = rat(1, 1).add(rat(1, -1))
    assert out == rat(2, 0)


def test_add_zero_identity():
    a = rat(3, -2, 5)
    assert a.add(TruncatedSeries.zero(2)) == a


def test_add_truncates_to_min_order():
    # (1 - eps/5) + (0 - eps^2/25 at order 2) keeps order 1
    a = rat(1, F(-1, 5))
    b = rat(0, 0, F(-1, 25))
    out = a.add(b)
    assert out.order == 1
    assert out == rat(1, F(-1, 5))


# ---------------------------------------------------------------------------
# mul / power


def test_mul_difference_of_squares():
    a = rat(1, 1, order=2)
    b = rat(1, -1, order=2)
    assert a.mul(b) == rat(1, 0, -1)


def test_mul_matches_first_order_quintic_coefficients():
    # (a0 + a1*eps)^5 at order 1 has linear coefficient 5*a0^4*a1
    a0, a1 = F(3, 2), F(-7, 5)
    s = rat(a0, a1)
    out = s.power(5)
    assert out.coeffs[0] == a0 ** 5
    assert out.coeffs[1] == 5 * a0 ** 4 * a1


def test_mul_pascal_row_five():
    two = rat(1, 1, order=5).power(2)
    three = rat(1, 1, order=5).power(3)
    assert two.mul(three).coeffs == (F(1), F(5), F(10), F(10), F(5), F(1))


def test_power_binomial_fifth():
    out = rat(1, F(-1, 5), order=2).power(5)
    assert out == rat(1, -1, F(2, 5))


def test_power_zero_is_one():
    assert rat(4, 5, 6).power(0) == TruncatedSeries.one(2)


def test_power_order_overflow_vanishes():
    eps = TruncatedSeries.variable(2)
    assert eps.power(3).is_zero()


def test_power_rejects_negative_exponent():
    with pytest.raises(ValueError):
        rat(1, 1).power(-1)


# ---------------------------------------------------------------------------
# invert


def test_invert_geometric():
    out = rat(1, 1, order=3).invert()
    assert out == rat(1, -1, 1, -1)


def test_invert_identity():
    one = TruncatedSeries.one(3)
    assert one.invert() == one


def test_invert_two_plus_eps_and_multiply_back():
    a = rat(2, 1)
    b = a.invert()
    assert b == rat(F(1, 2), F(-1, 4))
    assert a.mul(b) == TruncatedSeries.one(1)


def test_invert_requires_nonzero_constant():
    with pytest.raises(ZeroConstantTermError):
        TruncatedSeries.variable(3).invert()
    with pytest.raises(ZeroConstantTermError):
        TruncatedSeries.floating([1e-15, 1.0]).invert()


# ---------------------------------------------------------------------------
# compose


def test_compose_identity_substitution():
    outer = rat(1, 1, 1)
    assert outer.compose(TruncatedSeries.variable(2)) == outer


def test_compose_scaled_variable():
    outer = rat(1, -1, 1)
    inner = rat(0, 2, order=2)
    assert outer.compose(inner) == rat(1, -2, 4)


def test_compose_zero_inner_gives_constant_term():
    outer = rat(7, 3, 2)
    out = outer.compose(TruncatedSeries.zero(2))
    assert out.coeffs[0] == 7
    assert out.is_zero() is False
    assert out.sub(TruncatedSeries.constant(7, 2)).is_zero()


def test_compose_rejects_nonzero_inner_constant():
    with pytest.raises(NonzeroInnerConstantError):
        rat(1, 1).compose(rat(1, 1))


# ---------------------------------------------------------------------------
# differentiate / evaluate


def test_differentiate_power_rule():
    assert rat(1, 1, 1).differentiate() == rat(1, 2)


def test_differentiate_constant_is_zero():
    assert rat(5, 0, 0).differentiate().is_zero()


def test_differentiate_demo_series():
    out = rat(1, F(-1, 5), F(-1, 25)).differentiate()
    assert out == rat(F(-1, 5), F(-2, 25))


def test_differentiate_order_zero_fails():
    with pytest.raises(ValueError):
        rat(1).differentiate()


def test_evaluate_first_order_root():
    z = rat(1, F(-1, 5))
    assert z.evaluate(1) == F(4, 5)
    assert float(z.evaluate(1)) == 0.8


def test_evaluate_second_order_root():
    z = rat(1, F(-1, 5), F(-1, 25))
    assert z.evaluate(1) == F(19, 25)
    assert float(z.evaluate(1)) == 0.76


def test_evaluate_at_zero_is_constant_term():
    z = rat(9, 4, -3)
    assert z.evaluate(0) == 9


# ---------------------------------------------------------------------------
# standard series / is_zero


def test_standard_geometric():
    assert standard_series("geometric", 3) == rat(1, -1, 1, -1)


def test_standard_cos():
    assert standard_series("cos", 4) == rat(1, 0, F(-1, 2), 0, F(1, 24))


def test_standard_cos_against_finite_differences():
    # central finite differences of cos at 0 with a rational step, as an
    # independent check of the first few Maclaurin coefficients
    import math

    s = standard_series("cos", 4)
    h = 1e-3
    d2 = (math.cos(h) - 2.0 + math.cos(-h)) / h ** 2
    assert abs(float(s.coeffs[2]) - d2 / 2.0) < 1e-6


def test_standard_exp_order_zero():
    assert standard_series("exp", 0) == rat(1)


def test_standard_unknown_name():
    with pytest.raises(ValueError):
        standard_series("tanh", 3)


def test_is_zero_cases():
    assert TruncatedSeries.zero(3).is_zero()
    assert not rat(0, 0, 1).is_zero()
    a = rat(1, 1, 0, 0)
    assert a.mul(a.invert()).sub(TruncatedSeries.one(3)).is_zero()


def test_is_zero_float_tolerance():
    s = TruncatedSeries.floating([1e-13, -1e-14])
    assert s.is_zero()
    assert not s.is_zero(zero_tol=1e-15)


# ---------------------------------------------------------------------------
# property suite: ring laws on random rational series


def random_rational_series(rng, order):
    cs = [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(order + 1)]
    return TruncatedSeries.rational(cs)


@pytest.fixture(scope="module")
def random_triples():
    rng = random.Random(20240817)
    triples = []
    for _ in range(500):
        order = rng.randint(0, 6)
        triples.append(tuple(random_rational_series(rng, order) for _ in range(3)))
    return triples


def test_ring_laws_on_500_random_series(random_triples):
    for a, b, c in random_triples:
        assert a.add(b) == b.add(a)
        assert a.mul(b) == b.mul(a)
        assert a.add(b).add(c) == a.add(b.add(c))
        assert a.mul(b).mul(c) == a.mul(b.mul(c))
        assert a.mul(b.add(c)) == a.mul(b).add(a.mul(c))


def test_inverse_law_on_500_random_series():
    rng = random.Random(987123)
    for _ in range(500):
        order = rng.randint(0, 6)
        a = random_rational_series(rng, order)
        if a.coeffs[0] == 0:
            a = a.add(TruncatedSeries.constant(1 + rng.randint(0, 3), order))
        assert a.mul(a.invert()).sub(TruncatedSeries.one(order)).is_zero()


def test_derivative_linearity_and_leibniz():
    rng = random.Random(5150)
    for _ in range(500):
        order = rng.randint(1, 6)
        a = random_rational_series(rng, order)
        b = random_rational_series(rng, order)
        assert a.add(b).differentiate() == a.differentiate().add(b.differentiate())
        lhs = a.mul(b).differentiate()
        rhs = a.differentiate().mul(b).add(a.mul(b.differentiate()))
        assert lhs == rhs


def test_horner_matches_brute_force_sum():
    rng = random.Random(31337)
    for _ in range(200):
        order = rng.randint(0, 6)
        a = random_rational_series(rng, order)
        e = F(rng.randint(-3, 3), rng.randint(1, 7))
        brute = sum((c * e ** k for k, c in enumerate(a.coeffs)), F(0))
        assert a.evaluate(e) == brute


def test_float_horner_within_four_ulp():
    import math

    rng = random.Random(777)
    for _ in range(200):
        order = rng.randint(0, 6)
        cs = [complex(rng.uniform(0.1, 2), 0) for _ in range(order + 1)]
        a = TruncatedSeries.floating(cs)
        e = rng.uniform(0, 0.5)
        brute = sum(c.real * e ** k for k, c in enumerate(cs))
        got = a.evaluate(e).real
        assert abs(got - brute) <= 4 * math.ulp(abs(brute))


def test_uniqueness_equal_series_evaluate_identically():
    rng = random.Random(2222)
    for _ in range(100):
        order = rng.randint(0, 5)
        a = random_rational_series(rng, order)
        b = TruncatedSeries.rational(list(a.coeffs))
        assert a.sub(b).is_zero()
        for e in (F(0), F(1), F(-2, 3), F(7, 2)):
            assert a.evaluate(e) == b.evaluate(e)


# ---------------------------------------------------------------------------
# serialization


def test_json_round_trip_rational():
    a = rat(1, F(-1, 5), F(-1, 25))
    again = TruncatedSeries.from_json(a.to_json())
    assert again == a
    d = a.to_json_dict()
    assert d["mode"] == RATIONAL
    assert d["coeffs"][1] == {"num": "-1", "den": "5"}


def test_json_round_trip_float():
    a = TruncatedSeries.floating([1.5, complex(0.25, -2.0)])
    again = TruncatedSeries.from_json(a.to_json())
    assert again == a
    assert a.to_json_dict()["coeffs"][1] == {"re": 0.25, "im": -2.0}


def test_json_rejects_inconsistent_order():
    with pytest.raises(ValueError):
        TruncatedSeries.from_json_dict(
            {"var": "eps", "order": 3, "mode": RATIONAL,
             "coeffs": [{"num": "1", "den": "1"}]})
