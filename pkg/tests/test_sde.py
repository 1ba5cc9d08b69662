import numpy as np
import pytest

from berezin.algebra import ZERO, aux, gen, scalar
from berezin.calculus import SupersmoothFunction
from berezin.feynman_kac import state_variables
from berezin.stochastic import (
    ItoProcess,
    MixedPolynomial,
    SdeSpec,
    brownian_process,
    integration_by_parts_residual,
    ito_formula_residual,
    picard_solve,
)
from berezin.verify import ratio_deviation
from berezin.wiener import BrownianMotion, Partition, WienerSpace

SPACE = WienerSpace(2)
SV = state_variables(2)
XI = tuple(gen(aux(i)) for i in (1, 2))


def ou_spec(rate=1.0, noise=1.0, start=XI):
    drift = tuple(SupersmoothFunction(-rate * gen(SV[i]), SV) for i in range(2))
    diffusion = tuple(
        tuple(SupersmoothFunction(scalar(noise) if i == a else ZERO, SV) for a in range(2))
        for i in range(2)
    )
    return SdeSpec(drift, diffusion, start)


def zero_drift_spec(start=XI):
    drift = tuple(SupersmoothFunction(ZERO, SV) for _ in range(2))
    diffusion = tuple(
        tuple(SupersmoothFunction(scalar(1.0) if i == a else ZERO, SV) for a in range(2))
        for i in range(2)
    )
    return SdeSpec(drift, diffusion, start)


def test_sde_spec_parity_validation():
    odd_diffusion = tuple(
        tuple(SupersmoothFunction(gen(SV[0]), SV) for _ in range(2)) for _ in range(2)
    )
    with pytest.raises(ValueError):
        SdeSpec(tuple(SupersmoothFunction(ZERO, SV) for _ in range(2)), odd_diffusion, XI)
    with pytest.raises(ValueError):
        ou_spec(start=(scalar(1.0), ZERO))


def test_zero_drift_solution_is_start_plus_path():
    partition = Partition.uniform(1.0, 5)
    result = picard_solve(zero_drift_spec(), SPACE, partition)
    path = brownian_process(SPACE, partition)
    for r in range(partition.steps + 1):
        for i in range(2):
            assert (result.process.values[r][i] - (XI[i] + path.values[r][i])).norm() == 0.0
    assert result.stationary_depth is not None
    assert result.stationary_depth <= 2
    assert result.differences[-1] == 0.0


def test_picard_reaches_an_exact_fixed_point_for_the_linear_drift():
    partition = Partition.uniform(1.0, 8)
    result = picard_solve(ou_spec(), SPACE, partition)
    assert result.stationary_depth is not None
    assert result.differences[-1] == 0.0
    # one more pass keeps the process identical
    again = picard_solve(
        ou_spec(), SPACE, partition, initial_guess=result.process.values
    )
    assert again.stationary_depth == 1
    assert all(
        (a - b).norm() == 0.0
        for va, vb in zip(result.process.values, again.process.values)
        for a, b in zip(va, vb)
    )


def test_two_picard_seeds_land_on_the_same_fixed_point():
    partition = Partition.uniform(1.0, 6)
    baseline = picard_solve(ou_spec(), SPACE, partition)
    shifted_guess = [
        tuple(XI[i] + 0.7 * gen(aux(i + 1, 4)) for i in range(2))
        for _ in range(partition.steps + 1)
    ]
    other = picard_solve(ou_spec(), SPACE, partition, initial_guess=shifted_guess)
    gap = max(
        (a - b).norm()
        for va, vb in zip(baseline.process.values, other.process.values)
        for a, b in zip(va, vb)
    )
    assert gap == 0.0


def test_mu_diagnostics_decay_to_zero():
    partition = Partition.uniform(1.0, 5)
    result = picard_solve(ou_spec(), SPACE, partition, compute_mu=True)
    assert result.mu_diagnostics[-1] == 0.0


def test_ou_mean_matches_the_discrete_decay_and_its_limit():
    rate = 1.0
    for steps in (8, 16, 32):
        partition = Partition.uniform(1.0, steps)
        result = picard_solve(ou_spec(rate=rate), SPACE, partition)
        motion = BrownianMotion(SPACE, partition)
        mean = motion.expect_element(result.process.final[0])
        discrete = (1 - rate / steps) ** steps  # the exact grid decay factor
        assert (mean - discrete * XI[0]).norm() <= 1e-12
        assert (mean - np.exp(-rate) * XI[0]).norm() <= 2.0 / steps


def test_ou_second_moment_refines_to_the_closed_value():
    values = []
    for steps in (8, 16, 32, 64):
        partition = Partition.uniform(1.0, steps)
        result = picard_solve(ou_spec(start=(ZERO, ZERO)), SPACE, partition)
        motion = BrownianMotion(SPACE, partition)
        values.append(complex(motion.expect(result.process.final[0] * result.process.final[1])))
    limit = (1 - np.exp(-2.0)) / 2
    errors = [abs(v - limit) for v in values]
    assert ratio_deviation(errors) <= 0.3
    extrapolate = 2 * values[-1] - values[-2]
    assert abs(extrapolate - limit) <= 2e-3


def test_linear_functions_of_stochastic_integrals_telescope_exactly():
    partition = Partition.uniform(1.0, 4)
    spec = ou_spec()
    solution = picard_solve(spec, SPACE, partition).process
    process = ItoProcess.from_sde_solution(spec, SPACE, partition, solution)
    linear = MixedPolynomial(0, 2, {((), (1,)): 1.0, ((), (2,)): -2.0})
    assert ito_formula_residual(linear, process) <= 1e-12


def test_product_rule_residual_vanishes_for_constant_integrands():
    partition = Partition.uniform(1.0, 4)
    spec = zero_drift_spec()
    solution = picard_solve(spec, SPACE, partition).process
    process = ItoProcess.from_sde_solution(spec, SPACE, partition, solution)
    assert integration_by_parts_residual(process) <= 1e-12


def test_product_rule_residual_halves_for_the_linear_drift():
    errors = []
    for steps in (8, 16, 32):
        partition = Partition.uniform(1.0, steps)
        solution = picard_solve(ou_spec(), SPACE, partition).process
        process = ItoProcess.from_sde_solution(ou_spec(), SPACE, partition, solution)
        errors.append(integration_by_parts_residual(process))
    assert errors[0] > 1e-3  # a genuine first-order gap, not noise
    assert ratio_deviation(errors) <= 0.3


def test_exponential_bracket_cancellation_for_the_linear_drift():
    # the growth factor exp(rt) against the decaying solution leaves the
    # start value, up to a first-order grid error
    rate = 1.0
    norms = []
    for steps in (8, 16, 32):
        partition = Partition.uniform(1.0, steps)
        solution = picard_solve(ou_spec(rate=rate), SPACE, partition).process
        motion = BrownianMotion(SPACE, partition)
        value = motion.expect_element(np.exp(rate) * solution.final[0]) - XI[0]
        norms.append(value.norm())
    assert ratio_deviation(norms) <= 0.3
    assert norms[-1] <= 0.05


def test_change_of_variables_residual_halves_with_a_deterministic_factor():
    rate = 1.0
    spec = ou_spec(rate=rate)
    growth_times_first = MixedPolynomial(1, 2, {((1,), (1,)): 1.0})
    errors = []
    for steps in (8, 16, 32):
        partition = Partition.uniform(1.0, steps)
        solution = picard_solve(spec, SPACE, partition).process
        stochastic_part = ItoProcess.from_sde_solution(spec, SPACE, partition, solution)
        deterministic = ItoProcess.deterministic(
            SPACE, partition, lambda t: np.exp(rate * t), lambda t: rate * np.exp(rate * t)
        )
        joined = ItoProcess.concat(deterministic, stochastic_part)
        errors.append(ito_formula_residual(growth_times_first, joined))
    assert errors[0] > 1e-3
    assert ratio_deviation(errors) <= 0.3


def test_state_dependent_quadratic_diffusion_is_accepted():
    # an even, state-dependent diffusion keeps every iterate odd
    field = SupersmoothFunction(scalar(1.0) + 0.5 * gen(SV[0]) * gen(SV[1]), SV)
    zero = SupersmoothFunction(ZERO, SV)
    spec = SdeSpec(
        (zero, zero),
        ((field, zero), (zero, field)),
        XI,
    )
    partition = Partition.uniform(1.0, 4)
    result = picard_solve(spec, SPACE, partition)
    assert result.stationary_depth is not None
    parities = result.process.component_parities()
    from berezin.algebra import Parity

    assert set(parities) <= {Parity.ODD}
