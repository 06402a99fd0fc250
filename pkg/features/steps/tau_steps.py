import mpmath
from behave import given, when, then

from Utility.stepHelpers import assert_close, assert_no_error, capture
from qhurwitz.exactalg import RatFuncQ
from qhurwitz.numeric import parse_rational
from qhurwitz.partitions import Partition
from qhurwitz.tau import (TraceInvariants, coefficient_support, content_product, schur_eval, symseries_eval,
                          tau_eval_numeric, tau_powersum_series, tau_schur_series)


@given('numeric parameters q = "{q}" and beta = "{beta}"')
def step_numeric_params(context, q, beta):
    context.params = context.base_params.with_values(q=parse_rational(q), beta=parse_rational(beta))


@when('the content product of "{lam}" is expanded to beta order {order:d}')
def step_content_product(context, lam, order):
    result = capture(context, lambda: content_product(Partition.parse(lam), order))
    context.series = result.series if result is not None else None


@when('the Schur series is built to N = {n_max:d} and beta order {order:d}')
def step_schur_series(context, n_max, order):
    context.schur = tau_schur_series(n_max, order)
    context.sym_series = context.schur


@when('the power-sum series is built to N = {n_max:d} and beta order {order:d} with "{grading}" grading')
def step_powersum_series(context, n_max, order, grading):
    context.powersum = tau_powersum_series(n_max, order, grading)
    context.sym_series = context.powersum


@then('the coefficient of p_"{mu}" at beta^{power:d} is "{value}"')
def step_coefficient(context, mu, power, value):
    found = context.sym_series.coefficient(Partition.parse(mu)).coefficient(power)
    assert found == RatFuncQ.parse(value), f"got {found}"


@then('the two expansions agree coefficient by coefficient')
def step_bases_agree(context):
    differences = context.schur.differences(context.powersum)
    assert not differences, f"first difference {differences[0]}"


@then('the first disagreement is at p_"{mu}" and beta^{power:d}')
def step_first_disagreement(context, mu, power):
    differences = context.schur.differences(context.powersum)
    assert differences, "literal grading unexpectedly agreed"
    first_mu, first_power, _, _ = differences[0]
    assert (str(first_mu), first_power) == (mu, power), f"first difference {differences[0]}"


@then('the nonzero beta powers of p_"{mu}" up to order {order:d} are the achievable ones')
def step_support(context, mu, order):
    achievable, nonzero = coefficient_support(Partition.parse(mu), order)
    assert set(nonzero) <= set(achievable), f"nonzero {nonzero}, achievable {achievable}"


@then('the Schur polynomial of "{lam}" at "{x}" is {value:d}')
def step_schur_eval(context, lam, x, value):
    with mpmath.workprec(64):
        found = schur_eval(Partition.parse(lam), TraceInvariants.parse(x))
    assert abs(found - value) < 1e-15, f"got {found}"


@when('tau is evaluated numerically at "{x}" with N up to {n_max:d} and no tail check')
def step_tau_numeric_untested(context, x, n_max):
    context.x = TraceInvariants.parse(x)
    context.tau = tau_eval_numeric(context.x, n_max, context.params, tail_tol=1)


@when('tau is evaluated numerically at "{x}" with N up to {n_max:d}')
def step_tau_numeric(context, x, n_max):
    context.x = TraceInvariants.parse(x)
    context.tau = capture(context, lambda: tau_eval_numeric(context.x, n_max, context.params))


@then('the numeric tau value is within {threshold:Tolerance} of {expected:d}')
def step_tau_value(context, threshold, expected):
    assert_no_error(context)
    assert_close(context.tau.value, expected, threshold)


@then('it matches the exact Schur series to N = {n_max:d} and beta order {order:d} within {threshold:Tolerance}')
def step_tau_vs_series(context, n_max, order, threshold):
    exact = symseries_eval(tau_schur_series(n_max, order), context.x, context.params)
    with context.params.workprec(16):
        assert_close(context.tau.value, exact, threshold)


@then('the empty partition carries the constant series 1')
def step_empty_partition(context):
    for series in (context.schur, context.powersum):
        constant = series.coefficient(Partition(()))
        assert constant.nonzero_powers() == [0] and constant.coefficient(0) == RatFuncQ.one()


@then('the first two KP times at "{x}" are "{t1}" and "{t2}"')
def step_kp_times(context, x, t1, t2):
    with context.params.workprec(16):
        times = TraceInvariants.parse(x).times(2)
        for value, expected in zip(times, (t1, t2)):
            reference = parse_rational(expected)
            assert_close(value, mpmath.mpf(int(reference.numerator)) / int(reference.denominator), 1e-30)
