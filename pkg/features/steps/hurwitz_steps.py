import mpmath
import sympy
from behave import given, when, then
from sympy.polys.domains import QQ

from Utility.stepHelpers import assert_close, assert_no_error, capture
from qhurwitz.exactalg import RatFuncQ
from qhurwitz.hurwitz import (WeightParams, generic_weighted_hurwitz, hurwitz_table, pure_hurwitz,
                              quantum_weight, quantum_weight_truncated, quantum_weighted_hurwitz, sym_weight_eval)
from qhurwitz.numeric import parse_rational
from qhurwitz.partitions import Partition, ProfileList, partitions_of

def _as_rf(value):
    return value if isinstance(value, RatFuncQ) else RatFuncQ.constant(value)

@given('the profile list "{text}"')
def step_profile_list(context, text):
    context.profiles = ProfileList.parse(text)

@when('the pure Hurwitz number is computed with the "{method}" method')
def step_pure(context, method):
    context.value = capture(context, lambda: pure_hurwitz(context.profiles, method))

@when('the quantum weight is computed')
def step_quantum_weight(context):
    context.value = capture(context, lambda: quantum_weight(context.profiles))

@when('the quantum weighted Hurwitz number of "{mu}" at d = {d:d} is computed')
def step_quantum_weighted(context, mu, d):
    context.value = quantum_weighted_hurwitz(Partition.parse(mu), d).value

@then('the Hurwitz value is "{expected}"')
def step_hurwitz_value(context, expected):
    assert_no_error(context)
    assert _as_rf(context.value) == RatFuncQ.parse(expected), f"got {context.value}"

@then('the quantum weight matches the truncated multi-geometric sum at q = 1/2')
def step_truncated_weight(context):
    with mpmath.workprec(128):
        closed = context.value.evaluate(mpmath.mpf(1) / 2)
        truncated = quantum_weight_truncated(context.profiles.colengths, mpmath.mpf(1) / 2)
        assert_close(truncated, closed, 1e-12)

@then('the quantum weighted Hurwitz numbers of N = {n:d} up to d = {d_max:d} agree across methods')
def step_methods_agree(context, n, d_max):
    mismatches = [(str(mu), d) for mu in partitions_of(n) for d in range(d_max + 1)
                  if quantum_weighted_hurwitz(mu, d, "character").value
                  != quantum_weighted_hurwitz(mu, d, "bruteforce").value]
    assert not mismatches, f"methods disagree at {mismatches}"

@then('the "{kind}" function of "{lam}" at c = "{c}" is {value:d}')
def step_sym_weight(context, kind, lam, c, value):
    found = sym_weight_eval(Partition.parse(lam), [int(v) for v in c.split(",")], kind)
    assert found == value, f"got {found}"

@then('the monomial function of "{lam}" in two symbols is "{expected}"')
def step_sym_weight_symbolic(context, lam, expected):
    c1, c2 = sympy.symbols("c1 c2")
    found = sym_weight_eval(Partition.parse(lam), [c1, c2], "monomial")
    assert sympy.expand(found - sympy.sympify(expected, locals={"c1": c1, "c2": c2})) == 0, f"got {found}"

@when('the "{mode}" weighted Hurwitz number of "{mu}" at d = {d:d} is computed with c = "{c}"')
def step_generic(context, mode, mu, d, c):
    params = WeightParams(tuple(parse_rational(v) for v in c.split(",")), mode)
    context.value = generic_weighted_hurwitz(Partition.parse(mu), d, params).value

@when('the dual weighted Hurwitz number of "{mu}" at d = {d:d} uses {count:d} geometric parameters at q = 1/2')
def step_generic_geometric(context, mu, d, count):
    with mpmath.workprec(128):
        params = WeightParams(tuple(mpmath.mpf(2) ** -i for i in range(count)), "G-dual")
        context.value = generic_weighted_hurwitz(Partition.parse(mu), d, params).value

@then('the generic value is within {threshold:Tolerance} of {expected:d}')
def step_generic_close(context, threshold, expected):
    assert_close(context.value, expected, threshold)

@then('the generic value is {expected}')
def step_generic_value(context, expected):
    assert context.value == parse_rational(expected), f"got {context.value}"

@when('the quantum Hurwitz table for N = {n:d} up to d = {d_max:d} is built')
def step_table(context, n, d_max):
    context.n, context.d_max = n, d_max
    context.hurwitz_rows = hurwitz_table(n, d_max)

@then('the table has {rows:d} rows ordered by partition then degree')
def step_table_rows(context, rows):
    assert len(context.hurwitz_rows) == rows, f"got {len(context.hurwitz_rows)}"
    keys = [(str(row.mu), row.d) for row in context.hurwitz_rows]
    expected = [(str(mu), d) for mu in partitions_of(context.n) for d in range(context.d_max + 1)]
    assert keys == expected, keys
    assert context.hurwitz_rows[context.d_max + 1].value == RatFuncQ.constant(QQ(1, 2))
