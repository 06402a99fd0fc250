import mpmath
from behave import when, then

from Utility.stepHelpers import assert_close, assert_no_error, capture
from qhurwitz.basis import RhoTable, phi_coefficient, phi_series_eval, tau_det_formula
from qhurwitz.matrixmodel import (ExternalSource, ReducedIntegrand, f_derivative, hciz_rhs, identity_audits,
                                  tau_from_matrix_model, tau_wronskian, z_reduced)
from qhurwitz.mellin import ContourSpec
from qhurwitz.numeric import parse_rational, to_mpf
from qhurwitz.tau import TraceInvariants, tau_eval_numeric

CONTOUR = ContourSpec(delta=0.25, nodes_per_unit=48, tol=1e-14)


@then('f_{n:d} at y = {y:g} equals phi_{same_n:d} at e^y within {threshold:Tolerance}')
def step_f_is_phi(context, n, y, same_n, threshold):
    params = context.params
    value = f_derivative(n, repr(y), 0, "series", params)
    with params.workprec(16):
        expected = phi_series_eval(same_n, mpmath.exp(mpmath.mpf(repr(y))), params).value
        assert_close(value, expected, threshold)


@then('the first derivative of f_1 at y = 0 equals the sum of j a_j within {threshold:Tolerance}')
def step_f_first_derivative(context, threshold):
    params = context.params
    table = RhoTable(params)
    with params.workprec(16):
        direct = mpmath.fsum(j * phi_coefficient(1, j, table) for j in range(1, 80))
        assert_close(f_derivative(1, 0, 1, "series", params, table=table), direct, threshold)


@when('the derivative of order {order:d} of f_1 is requested')
def step_negative_order(context, order):
    context.value = capture(context, lambda: f_derivative(1, 0, order, "series", context.params))


@when('tau is evaluated by the Wronskian formula at "{x}"')
def step_wronskian(context, x):
    context.x = TraceInvariants.parse(x)
    context.rho_table = RhoTable(context.params)
    context.wronskian = tau_wronskian(ExternalSource(context.x), context.params, table=context.rho_table)


@then('it agrees with the determinant formula within {threshold:Tolerance}')
def step_wronskian_vs_det(context, threshold):
    det = tau_det_formula(context.x, context.params, table=context.rho_table)
    assert_close(context.wronskian, det, threshold)


@then('the Wronskian value at "{x}" agrees within {threshold:Tolerance}')
def step_wronskian_symmetry(context, x, threshold):
    permuted = tau_wronskian(ExternalSource(TraceInvariants.parse(x)), context.params, table=context.rho_table)
    assert_close(permuted, context.wronskian, threshold)


@when('an external source is built from "{x}"')
def step_external_source(context, x):
    context.source = capture(context, lambda: ExternalSource(TraceInvariants.parse(x)))


@when('the "{audit}" identity audit is run')
def step_identity_audit(context, audit):
    context.audit = capture(context, lambda: identity_audits(audit))


@then('the worst audit residual is below {threshold:Tolerance}')
def step_audit_residual(context, threshold):
    assert_no_error(context)
    assert context.audit["max_residual"] < threshold, context.audit["max_residual"]


@then('the HCIZ right-hand side at Y = "{y}" and Z = "{z}" is {value:g}')
def step_hciz_rhs(context, y, z, value):
    with mpmath.workdps(30):
        found = hciz_rhs([to_mpf(parse_rational(v)) for v in y.split(",")],
                         [to_mpf(parse_rational(v)) for v in z.split(",")])
    assert_close(found, value, 1e-14)


@then('the derivative of order {m:d} of f_{n:d} at y = {y:g} agrees across series and quadrature '
      'within {threshold:Tolerance}')
def step_f_quadrature(context, m, n, y, threshold):
    params = context.params
    series = f_derivative(n, repr(y), m, "series", params)
    reduced = ReducedIntegrand.build(n, params, CONTOUR)
    quadrature = f_derivative(n, repr(y), m, "quadrature", params, reduced=reduced)
    assert_close(quadrature, series, threshold)


@then('Z at "{x}" equals minus f_1 by quadrature within {threshold:Tolerance}')
def step_z_reduced_n1(context, x, threshold):
    params = context.params
    source = ExternalSource(TraceInvariants.parse(x))
    reduced = ReducedIntegrand.build(1, params, CONTOUR)
    z, _ = z_reduced(source, reduced)
    with params.workprec(16):
        y, beta = source.y()[0], params.beta_mp()
    f_value = f_derivative(1, y, 0, "quadrature", params, scale=beta, reduced=reduced)
    assert_close(z, -f_value, threshold)


@when('tau is evaluated through the matrix model at "{x}"')
def step_matrix_model(context, x):
    context.x = TraceInvariants.parse(x)
    context.model = tau_from_matrix_model(ExternalSource(context.x), context.params, CONTOUR)


@then('the matrix model tau agrees with numeric tau to N = {n_max:d} within {threshold:Tolerance}')
def step_matrix_model_vs_tau(context, n_max, threshold):
    reference = tau_eval_numeric(context.x, n_max, context.params, tail_tol=1e-9).value
    assert_close(context.model.tau, reference, threshold)
