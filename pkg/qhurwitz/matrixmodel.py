"""Wronskian form of tau, the eigenvalue-reduced matrix integral and the n = 2
identity audits behind its reduction."""
import logging
import math
from dataclasses import dataclass

import mpmath

from constants import LOGGER_NAME
from qhurwitz.basis import (DERIVED_CALIBRATION, RhoTable, check_separation, det_prefactor, phi_series_weighted,
                            vandermonde)
from qhurwitz.errors import UsageError
from qhurwitz.mellin import ContourSpec, MBKernel, MellinWeight, contour_integrals, phi_mellin_eval
from qhurwitz.numeric import fmt, relative_error
from qhurwitz.tau import TraceInvariants

logger = logging.getLogger(LOGGER_NAME)

WRONSKIAN_ORIENTATIONS = ("reversed", "printed")
AUDITS = ("andreiev_n2", "hciz_n2")
NORMALIZATION = "1/(2*pi*i)"
MEASURE_WEIGHT = "(-beta)^s"
AUDIT_DIGITS = 30


@dataclass(frozen=True)
class ExternalSource:
    """Eigenvalues x of X (positive, distinct) and y = ln x."""
    x: TraceInvariants

    def __post_init__(self):
        if not isinstance(self.x, TraceInvariants):
            object.__setattr__(self, "x", TraceInvariants(tuple(self.x)))
        if any(v <= 0 for v in self.x.values()):
            raise UsageError(f"the external source needs positive eigenvalues, got {self.x}")

    @property
    def n(self):
        return self.x.n

    def values(self):
        return self.x.values()

    def y(self):
        return [mpmath.log(v) for v in self.values()]


@dataclass(frozen=True)
class ReducedIntegrand:
    n: int
    kernel: MBKernel
    contour: ContourSpec

    @classmethod
    def build(cls, n, params, contour=None):
        contour = contour or ContourSpec()
        return cls(n, MBKernel(n, params, tol=contour.tol * 1e-6), contour)


def f_derivative(n, y, order, method, params, scale=1, reduced=None, table=None, orientation="reflected"):
    """(d/dy)^order phi_n(scale e^y), by the Laurent series or by contour quadrature."""
    if order < 0:
        raise UsageError(f"derivative order must be non-negative, got {order}")
    with params.workprec(16):
        argument = mpmath.exp(mpmath.mpf(y))
        if method == "series":
            return phi_series_weighted(n, mpmath.mpf(scale) * argument, order, params, table).value
        if method == "quadrature":
            reduced = reduced or ReducedIntegrand.build(n, params)
            return phi_mellin_eval(n, argument, reduced.contour, reduced.kernel, scale=scale, orientation=orientation,
                                   power=order).value
    raise UsageError(f"method must be series or quadrature, got '{method}'")


def wronskian_constant(n, table, orientation="reversed", calibration=DERIVED_CALIBRATION):
    """kappa_n = (-beta)^(n(n-1)/2) C_n (reversed rows) or beta^(n(n-1)/2) C_n (printed)."""
    if orientation not in WRONSKIAN_ORIENTATIONS:
        raise UsageError(f"Wronskian orientation must be one of {WRONSKIAN_ORIENTATIONS}, got '{orientation}'")
    with table.params.workprec(16):
        beta = table.params.beta_mp()
        base = -beta if orientation == "reversed" else beta
        return base ** (n * (n - 1) // 2) * det_prefactor(n, table, calibration)


def tau_wronskian(src, params, orientation="reversed", method="series", reduced=None, table=None,
                  calibration=DERIVED_CALIBRATION):
    """kappa_n prod x^(n-1) det(f_n^(i-1)(y_j)) / Delta(x), f_n evaluated at the beta-scaled argument."""
    table = table or RhoTable(params)
    with params.workprec(16):
        values = src.values()
        n = len(values)
        check_separation(values, params)
        beta = params.beta_mp()
        matrix = mpmath.matrix(n, n)
        for j, y in enumerate(src.y()):
            for i in range(n):
                matrix[i, j] = f_derivative(n, y, i, method, params, scale=beta, reduced=reduced, table=table)
        determinant = mpmath.det(matrix) if n > 1 else matrix[0, 0]
        return (wronskian_constant(n, table, orientation, calibration) * mpmath.fprod(v ** (n - 1) for v in values)
                * determinant / vandermonde(values))


def _factorial_product(n):
    return math.prod(math.factorial(i) for i in range(1, n + 1))


def z_reduced(src, red, jobs=None):
    """(prod i!)/Delta(y) det E, E_ij = (1/2 pi i) contour integral of A_n(s) (-beta)^s s^(i-1) e^(y_j s)."""
    params = red.kernel.params
    with params.workprec(16):
        values = src.values()
        n = len(values)
        if red.n != n:
            raise UsageError(f"reduced integrand built for n={red.n}, source has {n} eigenvalues")
        check_separation(values, params)
        ys = src.y()
        log_minus_beta = mpmath.log(-params.beta_mp())
        weights = [MellinWeight(log_minus_beta + y, False, i, sign=1) for i in range(n) for y in ys]
        result = contour_integrals(red.kernel, red.contour, weights, jobs)
        matrix = mpmath.matrix(n, n)
        for index, value in enumerate(result.values):
            matrix[index // n, index % n] = value
        determinant = mpmath.det(matrix) if n > 1 else matrix[0, 0]
        return _factorial_product(n) * determinant / vandermonde(ys), result


@dataclass(frozen=True)
class MatrixModelResult:
    z: object
    prefactor: object
    printed_prefactor: object
    tau: object
    contour: dict

    def to_json(self):
        return {"Z": fmt(self.z), "prefactor": fmt(self.prefactor), "printed_prefactor": fmt(self.printed_prefactor),
                "tau": fmt(self.tau), "normalization": NORMALIZATION, "measure_weight": MEASURE_WEIGHT,
                "constant": "(-1)^n kappa_n", "contour": self.contour}


def tau_from_matrix_model(src, params, contour=None, table=None, jobs=None, orientation="reversed",
                          calibration=DERIVED_CALIBRATION):
    """tau([X]) = K_n prod x^(n-1) Delta(ln x) / ((prod i!) Delta(x)) Z with K_n = (-1)^n kappa_n."""
    table = table or RhoTable(params)
    reduced = ReducedIntegrand.build(src.n, params, contour)
    z, quadrature = z_reduced(src, reduced, jobs)
    with params.workprec(16):
        values, n = src.values(), src.n
        geometric = (mpmath.fprod(v ** (n - 1) for v in values) * vandermonde(src.y())
                     / (_factorial_product(n) * vandermonde(values)))
        constant = (-1) ** n * wronskian_constant(n, table, orientation, calibration)
        printed = params.beta_mp() ** (n * (n - 1) // 2) * geometric
        prefactor = constant * geometric
        tau = prefactor * z
    logger.info(f"Matrix model n={n}: Z={fmt(z, 15)}, tau={fmt(tau, 15)}")
    return MatrixModelResult(z, prefactor, printed, tau, quadrature.contour)


# n = 2 identity audits

def andreiev_sides():
    """f_i = g_i = zeta^(i-1) with weight e^-zeta on [0, inf): direct double integral vs 2! det(moments)."""
    with mpmath.workdps(AUDIT_DIGITS):
        def integrand(a, b):
            return (b - a) ** 2 * mpmath.exp(-a - b)

        lhs = mpmath.quad(integrand, [0, mpmath.inf], [0, mpmath.inf])
        moments = [mpmath.quad(lambda t, j=j: t ** j * mpmath.exp(-t), [0, mpmath.inf]) for j in range(3)]
        rhs = 2 * (moments[0] * moments[2] - moments[1] ** 2)
    return lhs, rhs


def hciz_rhs(y, z):
    """(e^{y1 z1 + y2 z2} - e^{y1 z2 + y2 z1}) / ((y1 - y2)(z1 - z2)), with the confluent limit."""
    y1, y2 = (mpmath.mpf(v) for v in y)
    z1, z2 = (mpmath.mpf(v) for v in z)
    if y1 == y2 or z1 == z2:
        return mpmath.exp((y1 + y2) * (z1 + z2) / 2)
    return (mpmath.exp(y1 * z1 + y2 * z2) - mpmath.exp(y1 * z2 + y2 * z1)) / ((y1 - y2) * (z1 - z2))


def hciz_quadrature(y, z):
    """Integral of exp(tr(Y U Z U^*)) over U(2) in Euler angles, Haar density sin(2 theta)/(2 pi)."""
    with mpmath.workdps(AUDIT_DIGITS):
        big_y = mpmath.diag([mpmath.mpf(v) for v in y])
        big_z = mpmath.diag([mpmath.mpf(v) for v in z])

        def integrand(theta, alpha):
            u = mpmath.matrix([[mpmath.expj(alpha) * mpmath.cos(theta), mpmath.sin(theta)],
                               [-mpmath.sin(theta), mpmath.expj(-alpha) * mpmath.cos(theta)]])
            product = big_y * u * big_z * u.H
            trace = sum(product[i, i] for i in range(2))
            return mpmath.exp(mpmath.re(trace)) * mpmath.sin(2 * theta) / (2 * mpmath.pi)

        return mpmath.quad(integrand, [0, mpmath.pi / 2], [0, 2 * mpmath.pi])


HCIZ_CASES = (((0, 0), (0, 0)), ((1, 0), (1, 0)), (("0.3", "-0.2"), ("0.5", "0.1")))


def identity_audits(which):
    """Residual report for the Andreiev (n=2) or HCIZ (n=2) identity."""
    if which == "andreiev_n2":
        lhs, rhs = andreiev_sides()
        cases = [{"case": "moments j!", "lhs": lhs, "rhs": rhs, "residual": relative_error(lhs, rhs)}]
    elif which == "hciz_n2":
        cases = []
        for y, z in HCIZ_CASES:
            with mpmath.workdps(AUDIT_DIGITS):
                lhs, rhs = hciz_quadrature(y, z), hciz_rhs(y, z)
                cases.append({"case": f"Y=diag{tuple(map(str, y))}, Z=diag{tuple(map(str, z))}", "lhs": lhs,
                              "rhs": rhs, "residual": relative_error(lhs, rhs)})
    else:
        raise UsageError(f"audit must be one of {AUDITS}, got '{which}'")
    worst = max(case["residual"] for case in cases)
    logger.info(f"Identity audit {which}: worst residual {fmt(worst, 5)}")
    return {"audit": which, "cases": cases, "max_residual": worst}
