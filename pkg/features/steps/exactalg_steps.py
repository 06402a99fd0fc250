from behave import given, when, then

from Utility.stepHelpers import assert_no_error, capture
from qhurwitz.exactalg import BetaSeries, PolyQ, RatFuncQ, exact_str, hq_beta_series
from qhurwitz.numeric import parse_rational


def _series(text):
    return BetaSeries.from_json(text.split(";"))


@given('the rational function "{expression}"')
def step_rational_function(context, expression):
    context.rf = RatFuncQ.parse(expression)


@when('it is combined with "{other}" using "{operation}"')
def step_combine(context, other, operation):
    right = RatFuncQ.parse(other)
    operations = {
        "add": lambda: context.rf + right,
        "sub": lambda: context.rf - right,
        "mul": lambda: context.rf * right,
        "div": lambda: context.rf / right,
    }
    context.result = capture(context, operations[operation])


@when('it is divided by the zero rational function')
def step_divide_by_zero(context):
    context.result = capture(context, lambda: context.rf / RatFuncQ.zero())


@then('the resulting rational function equals "{expected}"')
def step_result_equals(context, expected):
    assert_no_error(context)
    assert context.result == RatFuncQ.parse(expected), f"got {context.result}, expected {expected}"


@then('its canonical string is "{canonical}"')
def step_canonical(context, canonical):
    assert str(context.rf) == canonical, f"got '{context.rf}'"
    assert RatFuncQ.parse(str(context.rf)) == context.rf


@then('its exact value at q = "{q_value}" is "{expected}"')
def step_exact_value(context, q_value, expected):
    value = context.rf.evaluate_exact(parse_rational(q_value))
    assert exact_str(value) == expected, f"got {exact_str(value)}"


@given('the beta series pair "{left}" and "{right}"')
def step_two_series(context, left, right):
    context.left, context.right = _series(left), _series(right)


@given('the beta series "{coefficients}"')
def step_one_series(context, coefficients):
    context.series = _series(coefficients)


@when('the two series are multiplied at order {order:d}')
def step_multiply(context, order):
    context.series = (context.left * context.right).truncate(order)


@when('the series is inverted')
def step_invert(context):
    context.series = capture(context, context.series.recip)


@when('H_q is expanded at i = {i:d} to beta order {order:d}')
def step_hq_series(context, i, order):
    context.series = hq_beta_series(i, order)


@then('the series coefficients are "{expected}"')
def step_series_equals(context, expected):
    assert_no_error(context)
    wanted = _series(expected)
    assert context.series.order == wanted.order, f"order {context.series.order} vs {wanted.order}"
    differences = [n for n in range(wanted.order + 1) if context.series.coeffs[n] != wanted.coeffs[n]]
    assert not differences, f"coefficients differ at beta^{differences}: {context.series.to_json()}"


@given('the polynomial in q with coefficients "{coefficients}"')
def step_polynomial(context, coefficients):
    context.poly = PolyQ(tuple(parse_rational(c) for c in coefficients.split(";")))


@when('it is converted to dense integer form')
def step_to_dup(context):
    context.dense = capture(context, context.poly.to_dup)


@then('the dense form is "{expected}"')
def step_dense_form(context, expected):
    assert [int(c) for c in context.dense] == [int(c) for c in expected.split(";")], context.dense
