from dataclasses import replace

import mpmath
from behave import when, then

from Utility.stepHelpers import assert_close, assert_no_error, capture
from qhurwitz.basis import RhoTable, phi_coefficient, phi_series_eval
from qhurwitz.mellin import (ContourSpec, HqEvaluator, MBKernel, MellinWeight, contour_integrals, hq_asymptotic,
                             hq_eval, kernel_decay, kernel_residue, mb_kernel, periodic_term_ratio, phi_mellin_eval,
                             q_constant)
from qhurwitz.numeric import parse_rational, relative_error, to_mpf

CONTOUR = ContourSpec(delta=0.25, nodes_per_unit=48, tol=1e-14)


def _kernel(context, k, **options):
    options.setdefault("tol", CONTOUR.tol * 1e-6)
    return MBKernel(k, context.params, **options)


@then('H_q at "{z}" is within {threshold:Tolerance} of {expected:d}')
def step_hq_value(context, z, threshold, expected):
    params = context.params
    with params.workprec(16):
        value = hq_eval(to_mpf(parse_rational(z)), HqEvaluator(params))
    assert_close(value, expected, threshold)


@then('H_q(-1) matches the reciprocal of (-1; q)_inf within {threshold:Tolerance}')
def step_hq_oracle(context, threshold):
    params = context.params
    with params.workprec(16):
        assert_close(hq_eval(-1, HqEvaluator(params)), 1 / mpmath.qp(-1, params.q_mp()), threshold)


@then('the functional equation holds at z = {re:g} + {im:g}i within {threshold:Tolerance}')
def step_functional_equation(context, re, im, threshold):
    params = context.params
    evaluator = HqEvaluator(params)
    with params.workprec(16):
        z = mpmath.mpc(mpmath.mpf(repr(re)), mpmath.mpf(repr(im)))
        assert_close(hq_eval(z, evaluator), hq_eval(params.q_mp() * z, evaluator) / (1 - z), threshold)


@then('H_q at z = {re:g} + {im:g}i uses the "{regime}" regime and matches 1/(z; q)_inf within {threshold:Tolerance}')
def step_hq_regime(context, re, im, regime, threshold):
    params = context.params
    evaluator = HqEvaluator(params)
    with params.workprec(16):
        z = mpmath.mpc(mpmath.mpf(repr(re)), mpmath.mpf(repr(im)))
        assert evaluator.regime(z) == regime, evaluator.regime(z)
        assert_close(hq_eval(z, evaluator), 1 / mpmath.qp(z, params.q_mp()), threshold)


@when('H_q is evaluated at "{z}" with the asymptotic cross-check')
def step_hq_cross_checked(context, z):
    evaluator = HqEvaluator(context.params, cross_check=True)
    context.value = capture(context, lambda: hq_eval(to_mpf(parse_rational(z)), evaluator))


@when('H_q is evaluated at "{z}" with the asymptotic cross-check bound scaled by {factor:g}')
def step_hq_cross_checked_bound(context, z, factor):
    evaluator = HqEvaluator(context.params, cross_check=True, cross_check_factor=factor)
    context.value = capture(context, lambda: hq_eval(to_mpf(parse_rational(z)), evaluator))


@when('H_q is evaluated at "{z}"')
def step_hq_pole(context, z):
    context.value = capture(context, lambda: hq_eval(to_mpf(parse_rational(z)), HqEvaluator(context.params)))


@then('the "{variant}" asymptotic residual decreases over z = -100, -1000, -10000')
def step_asymptotic(context, variant):
    params = context.params
    evaluator = HqEvaluator(params)
    with params.workprec(16):
        residuals = [abs(mpmath.log(hq_eval(-mpmath.mpf(10) ** j, evaluator))
                         - hq_asymptotic(-mpmath.mpf(10) ** j, evaluator, variant)) for j in (2, 3, 4)]
    assert residuals[0] > residuals[1] > residuals[2], f"residuals {residuals}"


@then('the second periodic term is below 1e-12 of the first')
def step_periodic_ratio(context):
    with context.params.workprec(16):
        assert periodic_term_ratio(context.params.q_mp()) < mpmath.mpf("1e-12")


@when('the asymptotic form is evaluated at "{z}"')
def step_asymptotic_region(context, z):
    context.value = capture(context, lambda: hq_asymptotic(to_mpf(parse_rational(z)), HqEvaluator(context.params)))


@then('the q constant is within {threshold:Tolerance} of {expected:g}')
def step_q_constant(context, threshold, expected):
    with context.params.workprec(16):
        assert_close(q_constant(context.params.q_mp()), expected, threshold)


@then('the k = {k:d} kernel at s = {s:g} is unchanged by {extra:d} more product factors within {threshold:Tolerance}')
def step_kernel_cutoff(context, k, s, extra, threshold):
    base = MBKernel(k, context.params)
    more = MBKernel(k, context.params, guard=base.guard + extra)
    assert more.product_cutoff == base.product_cutoff + extra
    with context.params.workprec(16):
        assert_close(base(s), more(s), threshold)


@then('the residues of the k = {k:d} kernel at 1-k+j for j below {terms:d} match the coefficients '
      'within {threshold:Tolerance}')
def step_kernel_residues(context, k, terms, threshold):
    kernel = _kernel(context, k)
    table = RhoTable(context.params)
    with context.params.workprec(16):
        for j in range(terms):
            pole = 1 - k + j
            expected = -(-1) ** (pole % 2) * phi_coefficient(k, j, table)
            assert_close(kernel_residue(kernel, pole), expected, threshold)


@then('s = -{k:d} is not a pole of the k = {same_k:d} kernel')
def step_not_a_pole(context, k, same_k):
    kernel = _kernel(context, same_k)
    with context.params.workprec(16):
        at_minus_k = abs(kernel_residue(kernel, -k))
        first = abs(kernel_residue(kernel, 1 - k))
    assert at_minus_k < mpmath.mpf("1e-12") * first, f"residue {at_minus_k} at s=-{k}"


@then('the k = 1 kernel product at s = n equals beta^(1-n) rho_(n-1) for n up to {n_max:d}')
def step_kernel_product(context, n_max):
    kernel = _kernel(context, 1)
    table = RhoTable(context.params)
    with context.params.workprec(16):
        beta = context.params.beta_mp()
        for n in range(1, n_max + 1):
            assert_close(kernel.product_at(n), beta ** (1 - n) * table(n - 1), 1e-10)


@when('the k = {k:d} kernel is evaluated at s = {s:d}')
def step_kernel_at_pole(context, k, s):
    kernel = _kernel(context, k)
    context.value = capture(context, lambda: mb_kernel(s, kernel))


@then('the k = {k:d} kernel decays superlinearly along the real axis')
def step_kernel_decay(context, k):
    report = kernel_decay(_kernel(context, k))
    assert report["superlinear"], f"slopes {report['slopes']}"


@when('the contour "{text}" is read')
def step_contour_parse(context, text):
    context.contour = capture(context, lambda: ContourSpec.parse(text))


@when('phi_{k:d} at x = {x} is computed by contour quadrature')
def step_phi_contour(context, k, x):
    context.k, context.x_value = k, parse_rational(x)
    context.kernel = _kernel(context, k)
    context.contour_result = capture(context, lambda: phi_mellin_eval(k, to_mpf(context.x_value), CONTOUR,
                                                                       context.kernel))


@then('the contour value matches the series within {threshold:Tolerance}')
def step_contour_vs_series(context, threshold):
    assert_no_error(context)
    series = phi_series_eval(context.k, to_mpf(context.x_value), context.params).value
    assert_close(context.contour_result.value, series, threshold)


@then('the "{shape}" contour gives the same value within {threshold:Tolerance}')
def step_contour_shape(context, shape, threshold):
    other = phi_mellin_eval(context.k, to_mpf(context.x_value), replace(CONTOUR, shape=shape), context.kernel)
    assert other.contour["shape"] == shape
    assert_close(other.value, context.contour_result.value, threshold)


@then('the contour shape is "{shape}"')
def step_contour_shape_parsed(context, shape):
    assert_no_error(context)
    assert context.contour.shape == shape, context.contour


@then('doubling the nodes changes the value by less than {threshold:Tolerance}')
def step_contour_refined(context, threshold):
    refined = phi_mellin_eval(context.k, to_mpf(context.x_value), CONTOUR.refined(), context.kernel)
    assert_close(refined.value, context.contour_result.value, threshold)


@then('excluding the pole at s = {pole:d} changes the value by its residue within {threshold:Tolerance}')
def step_pole_enclosure(context, pole, threshold):
    shifted = replace(CONTOUR, left_turn=float(pole) + 0.5)
    with context.params.workprec(16):
        weight = MellinWeight.for_argument(to_mpf(context.x_value), 1)
    partial = contour_integrals(context.kernel, shifted, [weight]).value
    residue = kernel_residue(context.kernel, pole, weight=weight)
    with context.params.workprec(16):
        error = abs((context.contour_result.value - partial) - residue) / max(1, abs(residue))
    assert error < threshold, f"enclosure residual {error}"
    assert relative_error(partial + residue, context.contour_result.value) < threshold
