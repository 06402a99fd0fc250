import mpmath
from behave import when, then

from Utility.stepHelpers import assert_close, assert_no_error, capture
from qhurwitz.basis import (RhoTable, basis_change_check, basis_change_matrix, phi_coefficient, phi_series,
                            phi_series_eval, recursion_check, tau_det_formula)
from qhurwitz.mellin import HqEvaluator, hq_eval
from qhurwitz.numeric import parse_rational, to_mpf
from qhurwitz.tau import TraceInvariants, tau_eval_numeric


def _table(context):
    if getattr(context, "rho_table", None) is None or context.rho_table.params != context.params:
        context.rho_table = RhoTable(context.params)
    return context.rho_table


def _precision_threshold(context, slack):
    return mpmath.ldexp(1, -context.params.precision_bits + slack)


@then('rho at index {i:d} is "{expected}"')
def step_rho_value(context, i, expected):
    with context.params.workprec(16):
        assert_close(_table(context)(i), to_mpf(parse_rational(expected)), _precision_threshold(context, 8))


@then('rho at index 1 matches minus the reciprocal of (-1; q)_inf')
def step_rho_oracle(context):
    with context.params.workprec(16):
        oracle = -1 / mpmath.qp(-1, context.params.q_mp())
        assert_close(_table(context)(1), oracle, _precision_threshold(context, 10))


@then('|rho_j| decreases for j from {start:d} to {end:d} with steepening log slopes')
def step_rho_decay(context, start, end):
    table = _table(context)
    with context.params.workprec(16):
        logs = {j: mpmath.log(abs(table(j))) for j in range(1, end + 1)}
    assert all(logs[j + 1] < logs[j] for j in range(start, end)), "rho is not eventually decreasing"
    middle = end // 2
    first = (logs[middle] - logs[middle // 2]) / (middle - middle // 2)
    second = (logs[end] - logs[middle]) / (end - middle)
    assert second < first < 0, f"slopes {first}, {second}"


@then('the cached rho table agrees with fresh products up to index {upto:d}')
def step_rho_audit(context, upto):
    worst = _table(context).audit(upto)
    assert worst < _precision_threshold(context, 10), f"audit residual {worst}"


@then('the coefficient a_0 of phi_1 is 1')
def step_phi1_a0(context):
    assert_close(phi_coefficient(1, 0, _table(context)), 1, _precision_threshold(context, 8))


@then('the coefficient a_2 of phi_1 is H_q(beta) / 2')
def step_phi1_a2(context):
    params = context.params
    with params.workprec(16):
        expected = hq_eval(params.beta_mp(), HqEvaluator(params)) / 2
        assert_close(phi_coefficient(1, 2, _table(context)), expected, _precision_threshold(context, 8))


@then('the coefficient a_0 of phi_2 is 1 / (beta H_q(-beta))')
def step_phi2_a0(context):
    params = context.params
    with params.workprec(16):
        beta = params.beta_mp()
        expected = 1 / (beta * hq_eval(-beta, HqEvaluator(params)))
        assert_close(phi_coefficient(2, 0, _table(context)), expected, _precision_threshold(context, 8))


@when('phi_{k:d} is evaluated at "{x}"')
def step_phi_eval(context, k, x):
    context.phi = capture(context, lambda: phi_series_eval(k, to_mpf(parse_rational(x)), context.params,
                                                           _table(context)))


@then('the phi value is within {threshold:Tolerance} of {expected:d}')
def step_phi_value(context, threshold, expected):
    assert_no_error(context)
    assert_close(context.phi.value, expected, threshold)


@when('the "{form}" recursion is checked for k = {k:d} with {terms:d} coefficients')
def step_recursion(context, form, k, terms):
    context.recursion = recursion_check(k, terms, form, context.params, _table(context))


@then('the largest recursion residual is below 2^-(precision - {slack:d})')
def step_recursion_residual(context, slack):
    assert context.recursion.passed(_precision_threshold(context, slack)), context.recursion.to_json()


@then('the two recursion paths agree below 2^-(precision - {slack:d})')
def step_recursion_two_path(context, slack):
    assert context.recursion.two_path_residual < _precision_threshold(context, slack), context.recursion.to_json()


@then('the basis change row for n = {n:d} and k = {k:d} is "{row}"')
def step_basis_row(context, n, k, row):
    found = basis_change_matrix(n, context.params.beta).row(k)
    assert found == [parse_rational(c) for c in row.split(";")], basis_change_matrix(n, context.params.beta).to_json()


@then('the basis change check for n = {n:d} over {terms:d} coefficients is below 2^-(precision - {slack:d})')
def step_basis_change_check(context, n, terms, slack):
    worst = basis_change_check(n, terms, context.params, _table(context))
    assert worst < _precision_threshold(context, slack), f"residual {worst}"


@when('tau is evaluated by the determinant formula at "{x}"')
def step_det_formula(context, x):
    context.x = TraceInvariants.parse(x)
    context.det_value = capture(context, lambda: tau_det_formula(context.x, context.params, table=_table(context)))


@then('it agrees with numeric tau to N = {n_max:d} within {threshold:Tolerance}')
def step_det_vs_numeric(context, n_max, threshold):
    assert_no_error(context)
    reference = tau_eval_numeric(context.x, n_max, context.params, tail_tol=1e-14).value
    assert_close(context.det_value, reference, threshold)


@then('the determinant value at "{x}" agrees within {threshold:Tolerance}')
def step_det_symmetry(context, x, threshold):
    permuted = tau_det_formula(TraceInvariants.parse(x), context.params, table=_table(context))
    assert_close(permuted, context.det_value, threshold)


@then('the {terms:d}-term Laurent series of phi_{k:d} starts at x^{power:d} and matches phi_{same_k:d} at "{x}" '
      'within {threshold:Tolerance}')
def step_laurent_series(context, terms, k, power, same_k, x, threshold):
    series = phi_series(k, terms, _table(context))
    assert series.leading_power == power, series.leading_power
    with context.params.workprec(16):
        point = to_mpf(parse_rational(x))
        total = mpmath.fsum(a * point ** (series.leading_power + j) for j, a in enumerate(series.coefficients))
        assert_close(total, phi_series_eval(k, point, context.params).value, threshold)
