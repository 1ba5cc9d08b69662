import random

import pytest

from berezin.algebra import ONE, ZERO, aux, eta, gen, monomial, scalar
from berezin.calculus import (
    SupersmoothFunction,
    apply_kernel,
    berezin_integrate,
    compose_kernels,
    grassmann_delta,
    partial_derivative,
    taylor_residual,
)
from berezin.verify import random_element
from berezin.wiener import heat_kernel, heat_kernel_difference

E1, E2 = gen(eta(1)), gen(eta(2))
VARS2 = (eta(1), eta(2))


def _function(body, variables=VARS2):
    return SupersmoothFunction(body, variables)


def test_derivative_of_the_top_monomial():
    f = _function(E1 * E2)
    assert f.derivative(eta(1)).body == E2
    assert f.derivative(eta(2)).body == -E1


def test_derivative_of_a_constant_vanishes():
    assert partial_derivative(_function(ONE), eta(1)).body.is_zero()


def test_derivative_requires_a_bound_variable():
    with pytest.raises(ValueError):
        _function(E1 * E2).derivative(eta(3))


def test_derivatives_anticommute_on_random_functions():
    rng = random.Random(21)
    pool = tuple(eta(i) for i in range(1, 7))
    for _ in range(100):
        f = _function(random_element(rng, pool), pool)
        i, j = rng.sample(range(6), 2)
        one_way = f.derivative(pool[i]).derivative(pool[j]).body
        other = f.derivative(pool[j]).derivative(pool[i]).body
        assert (one_way + other).norm() == 0.0


def test_full_integral_extracts_the_top_coefficient():
    assert berezin_integrate(E1 * E2, VARS2) == ONE
    assert berezin_integrate(ONE, VARS2).is_zero()


def test_integral_normalization_in_order():
    vars4 = tuple(eta(i) for i in range(1, 5))
    top = monomial(vars4)
    assert berezin_integrate(top, vars4) == ONE


def test_integral_of_the_gaussian_weight_is_one():
    p = heat_kernel(VARS2, 0.7)
    assert p.integrate().scalar_value() == pytest.approx(1.0)


def test_integration_kills_derivatives():
    rng = random.Random(22)
    pool = tuple(eta(i) for i in range(1, 7))
    for _ in range(100):
        f = _function(random_element(rng, pool), pool)
        j = rng.randrange(6)
        derived = f.derivative(pool[j]).body
        assert berezin_integrate(derived, pool).is_zero()


def test_partial_integration_leaves_other_generators_as_coefficients():
    free = gen(aux(1))
    value = berezin_integrate(free * E1 * E2, VARS2)
    assert value == free


def test_taylor_identity_on_the_top_monomial():
    f = _function(E1 * E2)
    base = [gen(aux(1, 1)), gen(aux(2, 1))]
    shift = [gen(aux(1, 2)), gen(aux(2, 2))]
    assert taylor_residual(f, base, shift) == 0.0


def test_taylor_identity_on_a_constant():
    base = [gen(aux(1, 1)), gen(aux(2, 1))]
    shift = [gen(aux(1, 2)), gen(aux(2, 2))]
    assert taylor_residual(_function(ONE), base, shift) == 0.0


def test_taylor_identity_on_random_functions_of_four_variables():
    rng = random.Random(23)
    vars4 = tuple(eta(i) for i in range(1, 5))
    for _ in range(25):
        f = SupersmoothFunction(random_element(rng, vars4), vars4)
        base = [
            gen(aux(i, 1)) + rng.uniform(-1, 1) * gen(aux(i, 3)) * gen(aux(5, 3)) * gen(aux(6, 3))
            for i in range(1, 5)
        ]
        shift = [rng.uniform(-1, 1) * gen(aux(i, 2)) for i in range(1, 5)]
        assert taylor_residual(f, base, shift) <= 1e-10


def test_taylor_rejects_parity_violations():
    f = _function(E1 * E2)
    with pytest.raises(ValueError):
        taylor_residual(f, [scalar(1.0), gen(aux(2, 1))], [gen(aux(1, 2)), gen(aux(2, 2))])


def test_delta_kernel_reproduces_every_basis_function():
    out_vars = VARS2
    in_vars = (eta(1, 1), eta(2, 1))
    delta = grassmann_delta(out_vars, in_vars)
    basis = [ONE, gen(in_vars[0]), gen(in_vars[1]), gen(in_vars[0]) * gen(in_vars[1])]
    mirror = [ONE, E1, E2, E1 * E2]
    for f_in, f_out in zip(basis, mirror):
        got = apply_kernel(delta, SupersmoothFunction(f_in, in_vars))
        assert got.variables == out_vars
        # the reproducing sign constant is +1 under this integration order
        assert (got.body - f_out).norm() == 0.0


def test_gaussian_kernel_preserves_the_constant_function():
    in_vars = (eta(1, 1), eta(2, 1))
    kernel = heat_kernel_difference(VARS2, in_vars, 1.0)
    got = apply_kernel(kernel, SupersmoothFunction(ONE, in_vars))
    assert (got.body - ONE).norm() == 0.0


def test_kernel_applied_to_zero_gives_zero():
    in_vars = (eta(1, 1), eta(2, 1))
    kernel = heat_kernel_difference(VARS2, in_vars, 1.0)
    assert apply_kernel(kernel, SupersmoothFunction(ZERO, in_vars)).body.is_zero()


def test_kernel_variable_mismatch_is_rejected():
    in_vars = (eta(1, 1), eta(2, 1))
    kernel = heat_kernel_difference(VARS2, in_vars, 1.0)
    with pytest.raises(ValueError):
        apply_kernel(kernel, SupersmoothFunction(ONE, (aux(1), aux(2))))


def test_kernels_compose_through_contraction():
    rng = random.Random(24)
    out_vars = VARS2
    mid_vars = (eta(1, 1), eta(2, 1))
    in_vars = (aux(1, 7), aux(2, 7))
    outer = heat_kernel_difference(out_vars, mid_vars, 0.4)
    inner = heat_kernel_difference(mid_vars, in_vars, 0.6)
    combined = compose_kernels(outer, inner, mid_vars)
    for _ in range(10):
        f = SupersmoothFunction(random_element(rng, in_vars, max_terms=4), in_vars)
        two_step = apply_kernel(outer, apply_kernel(inner, f))
        one_step = apply_kernel(combined, f)
        assert (two_step.body - one_step.body).norm() <= 1e-10


def test_functions_evaluate_by_substitution():
    f = _function(E1 * E2 + 2 * E1)
    x = gen(aux(1, 1))
    y = gen(aux(2, 1))
    value = f(x, y)
    assert (value - (x * y + 2 * x)).norm() == 0.0


def test_bound_variables_must_be_distinct():
    with pytest.raises(ValueError):
        SupersmoothFunction(ONE, (eta(1), eta(1)))
