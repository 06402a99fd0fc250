"""The rho sequence, the adapted basis phi_k as Laurent series, their recursions,
and the determinant evaluation of tau at trace invariants."""
import logging
import math
from dataclasses import dataclass, field

import mpmath
from sympy.polys.densearith import dup_mul
from sympy.polys.domains import QQ

from constants import LOGGER_NAME
from qhurwitz.errors import CoincidentPoints, NoConvergence, SingularPoint, UsageError, VanishingFactor
from qhurwitz.mellin import HqEvaluator, hq_eval, qpochhammer_inf
from qhurwitz.numeric import NumericParams, fmt, relative_error, to_mpf

logger = logging.getLogger(LOGGER_NAME)

__all__ = ["NumericParams", "RhoTable", "rho", "PhiSeries", "PhiValue", "phi_coefficient", "phi_series",
           "phi_series_eval", "phi_series_weighted", "RecursionReport", "recursion_check", "BasisChange",
           "basis_change_matrix", "basis_change_check", "DetCalibration", "DERIVED_CALIBRATION", "vandermonde",
           "check_separation", "det_prefactor", "tau_det_formula"]

SCALINGS = ("x", "beta_x")
INDEX_RANGES = ("1..n", "0..n-1")
BETA_POWERS = ("printed", "derived")


class RhoTable:
    """rho_i = prod_{j=1}^{i} beta H_q(j beta), rho_0 = 1,
    rho_{-i} = prod_{j=0}^{i-1} (1/beta)(-j beta; q)_inf.

    Both sides grow incrementally; entries are never rewritten. A pole of
    H_q(-j beta) makes rho_{-i} exactly zero for i > j.
    """

    def __init__(self, params):
        self.params = params
        self.evaluator = HqEvaluator(params)
        self._positive = [mpmath.mpf(1)]
        self._negative = [mpmath.mpf(1)]

    def factor(self, i):
        """r_i = beta H_q(i beta) computed directly (no table)."""
        with self.params.workprec(16):
            return self.params.beta_mp() * hq_eval(i * self.params.beta_mp(), self.evaluator)

    def _extend_positive(self, i):
        with self.params.workprec(16):
            beta = self.params.beta_mp()
            while len(self._positive) <= i:
                j = len(self._positive)
                value = beta * hq_eval(j * beta, self.evaluator)
                if abs(value) < self.params.epsilon():
                    logger.error(f"Factor beta H_q({j} beta) = {fmt(value, 5)} vanishes at working precision")
                    raise VanishingFactor(f"|beta H_q({j} beta)| below round-off", witness=j)
                self._positive.append(self._positive[-1] * value)

    def _extend_negative(self, i):
        with self.params.workprec(16):
            beta = self.params.beta_mp()
            while len(self._negative) <= i:
                j = len(self._negative) - 1
                factor = qpochhammer_inf(-j * beta, self.params) / beta
                if abs(factor) < self.params.separation_threshold():
                    logger.warning(f"H_q({-j} beta) has a pole; rho_-i = 0 for i > {j}")
                    factor = mpmath.mpf(0)
                self._negative.append(self._negative[-1] * factor)

    def __call__(self, i):
        if i >= 0:
            self._extend_positive(i)
            return self._positive[i]
        self._extend_negative(-i)
        return self._negative[-i]

    def audit(self, upto):
        """Largest relative difference between cached entries and products recomputed in one pass."""
        worst = mpmath.mpf(0)
        with self.params.workprec(16):
            beta = self.params.beta_mp()
            for i in range(-upto, upto + 1):
                cached = self(i)
                if i > 0:
                    fresh = beta ** i * mpmath.fprod(hq_eval(j * beta, self.evaluator) for j in range(1, i + 1))
                elif i < 0:
                    fresh = mpmath.fprod(qpochhammer_inf(-j * beta, self.params) for j in range(-i)) / beta ** (-i)
                else:
                    fresh = mpmath.mpf(1)
                if cached == 0 and abs(fresh) < self.params.separation_threshold():
                    continue
                worst = max(worst, relative_error(cached, fresh))
        return worst


def rho(i, params, table=None):
    return (table or RhoTable(params))(i)


@dataclass(frozen=True)
class PhiSeries:
    """Coefficients a_j of x^(1-k+j) in phi_k."""
    k: int
    coefficients: tuple

    @property
    def leading_power(self):
        return 1 - self.k


@dataclass(frozen=True)
class PhiValue:
    value: object
    terms_used: int
    tail_bound: object

    def to_json(self, k, x):
        return {"k": k, "x": fmt(x, 20), "value": fmt(self.value), "terms_used": self.terms_used,
                "tail_bound": fmt(self.tail_bound, 5)}


def phi_coefficient(k, j, table):
    """a_j = beta^(1-j) rho_{j-k} / j!"""
    params = table.params
    with params.workprec(16):
        return params.beta_mp() ** (1 - j) * table(j - k) / math.factorial(j)


def phi_series(k, terms, table):
    return PhiSeries(k, tuple(phi_coefficient(k, j, table) for j in range(terms)))


def phi_series_weighted(k, x, power, params, table=None):
    """(D^power phi_k)(x) = sum_j (1-k+j)^power a_j x^(1-k+j), summed adaptively."""
    if k < 1:
        raise UsageError(f"phi_k is defined for k >= 1, got {k}")
    table = table or RhoTable(params)
    with params.workprec(16):
        x = mpmath.mpmathify(x)
        if x == 0:
            if k >= 2:
                logger.error(f"phi_{k} evaluated at its pole x=0")
                raise SingularPoint(f"phi_{k} has a pole of order {k - 1} at x = 0", witness=0)
            value = phi_coefficient(k, 0, table) if power == 0 else mpmath.mpf(0)
            return PhiValue(value, 1, mpmath.mpf(0))
        tol = params.tol_mp()
        terms, previous, small_run = [], None, 0
        for j in range(params.series_max_terms):
            exponent = 1 - k + j
            term = phi_coefficient(k, j, table) * x ** exponent * mpmath.mpf(exponent) ** power
            terms.append(term)
            if term == 0 or previous is None or previous == 0:
                previous = term
                continue
            ratio = abs(term / previous)
            previous = term
            if ratio < 1:
                tail = abs(term) * ratio / (1 - ratio)
                small_run = small_run + 1 if tail < tol * max(abs(mpmath.fsum(terms)), tol) else 0
                if small_run >= 2:
                    return PhiValue(mpmath.fsum(terms), j + 1, tail)
            else:
                small_run = 0
    logger.error(f"phi_{k}({fmt(x, 10)}) did not converge in {params.series_max_terms} terms")
    raise NoConvergence(f"series for phi_{k} at x = {fmt(x, 15)} exceeded {params.series_max_terms} terms",
                        witness=fmt(terms[-1], 10))


def phi_series_eval(k, x, params, table=None):
    """phi_k(x) = beta x^(1-k) sum_j rho_{j-k} (x/beta)^j / j!"""
    return phi_series_weighted(k, x, 0, params, table)


@dataclass(frozen=True)
class RecursionReport:
    k: int
    terms: int
    form: str
    max_residual: object
    residuals: tuple = field(default=(), repr=False)
    two_path_residual: object = None

    def passed(self, threshold):
        return self.max_residual < threshold

    def to_json(self):
        payload = {"k": self.k, "J": self.terms, "form": self.form, "max_residual": fmt(self.max_residual, 5)}
        if self.two_path_residual is not None:
            payload["two_path_residual"] = fmt(self.two_path_residual, 5)
        return payload


def recursion_check(k, terms, form, params, table=None):
    """Termwise residuals of beta(D+k-1) phi_k = phi_{k-1} ("euler") or
    beta x H_q(beta D) phi_k = phi_{k-1} ("R") on Laurent coefficients j <= terms."""
    if form not in ("euler", "R"):
        raise UsageError(f"recursion form must be euler or R, got '{form}'")
    if terms > params.series_max_terms:
        raise UsageError(f"J = {terms} exceeds series_max_terms = {params.series_max_terms}")
    table = table or RhoTable(params)
    residuals = []
    with params.workprec(16):
        beta = params.beta_mp()
        for j in range(terms + 1):
            if form == "euler":
                if j == 0:
                    continue
                lhs = beta * j * phi_coefficient(k, j, table)
                rhs = phi_coefficient(k - 1, j - 1, table)
            else:
                lhs = table.factor(1 - k + j) * phi_coefficient(k, j, table)
                rhs = phi_coefficient(k - 1, j, table)
            residuals.append(relative_error(lhs, rhs) if rhs != 0 else abs(lhs))
        two_path = None
        if k == 1:
            euler_path = [beta * (i + 1) * phi_coefficient(1, i + 1, table) for i in range(terms)]
            r_path = [table.factor(i) * phi_coefficient(1, i, table) for i in range(terms)]
            two_path = max(relative_error(a, b) for a, b in zip(euler_path, r_path))
    worst = max(residuals) if residuals else mpmath.mpf(0)
    logger.debug(f"Recursion {form} k={k} J={terms}: max residual {fmt(worst, 5)}")
    return RecursionReport(k, terms, form, worst, tuple(residuals), two_path)


@dataclass(frozen=True)
class BasisChange:
    """rows[k] = ascending coefficients in D of beta^(n-k) prod_{m=k}^{n-1} (D + m), so phi_k = rows[k](D) phi_n."""
    n: int
    beta: object
    rows: dict

    def row(self, k):
        return self.rows[k]

    def to_json(self):
        return {str(k): [f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
                         for c in self.rows[k]] for k in sorted(self.rows)}


def basis_change_matrix(n, beta):
    """Exact table expressing phi_1..phi_n through D-powers of phi_n (beta a QQ element)."""
    if n < 1:
        raise UsageError(f"n must be at least 1, got {n}")
    rows = {n: [QQ(1)]}
    descending = [QQ(1)]
    for k in range(n - 1, 0, -1):
        descending = dup_mul(descending, [beta, beta * k], QQ)
        rows[k] = list(reversed(descending))
    return BasisChange(n, beta, rows)


def basis_change_check(n, terms, params, table=None):
    """max over k, j of |sum_m row_k[m] (1-n+j)^m a^(n)_j - a^(k)_{j-(n-k)}|, relative."""
    table = table or RhoTable(params)
    change = basis_change_matrix(n, params.beta)
    worst = mpmath.mpf(0)
    with params.workprec(16):
        for k in range(1, n + 1):
            row = [to_mpf(c) for c in change.row(k)]
            for j in range(terms + 1):
                exponent = 1 - n + j
                applied = mpmath.fsum(c * mpmath.mpf(exponent) ** m for m, c in enumerate(row))
                applied *= phi_coefficient(n, j, table)
                shift = j - (n - k)
                if shift < 0:
                    worst = max(worst, abs(applied))
                    continue
                worst = max(worst, relative_error(applied, phi_coefficient(k, shift, table)))
    return worst


# Determinant evaluation

@dataclass(frozen=True)
class DetCalibration:
    scaling: str = "beta_x"
    index_range: str = "1..n"
    beta_power: str = "derived"

    def __post_init__(self):
        if self.scaling not in SCALINGS or self.index_range not in INDEX_RANGES or self.beta_power not in BETA_POWERS:
            raise UsageError(f"unknown determinant calibration {self}")

    def label(self):
        return f"scaling={self.scaling}, index_range={self.index_range}, beta_power={self.beta_power}"


DERIVED_CALIBRATION = DetCalibration()


def vandermonde(values):
    """prod_{i<j} (v_i - v_j)"""
    return mpmath.fprod(values[i] - values[j] for i in range(len(values)) for j in range(i + 1, len(values)))


def check_separation(values, params):
    threshold = params.separation_threshold()
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) < threshold:
                logger.error(f"Eigenvalues {i} and {j} coincide within {fmt(threshold, 5)}")
                raise CoincidentPoints(f"x_{i + 1} and x_{j + 1} are closer than {fmt(threshold, 5)}",
                                       witness=[fmt(values[i], 20), fmt(values[j], 20)])


def det_prefactor(n, table, calibration=DERIVED_CALIBRATION):
    """C_n = beta^(n(n-3)/2) / prod rho_{-i} over the calibrated index range."""
    params = table.params
    with params.workprec(16):
        indices = range(1, n + 1) if calibration.index_range == "1..n" else range(0, n)
        denominator = mpmath.fprod(table(-i) for i in indices)
        if denominator == 0:
            logger.error(f"Determinant prefactor divides by a vanishing rho at n={n}")
            raise VanishingFactor(f"prod rho_-i vanishes for n = {n}", witness=n)
        power = n * (n - 3) // 2 if calibration.beta_power == "derived" else 0
        return mpmath.mpf(params.beta_mp()) ** power / denominator


def tau_det_formula(x, params, calibration=DERIVED_CALIBRATION, table=None):
    """tau([X]) = C_n prod x_a^(n-1) det(phi_i(arg_j)) / Delta(x), arg = beta x or x."""
    table = table or RhoTable(params)
    with params.workprec(16):
        values = x.values()
        n = len(values)
        check_separation(values, params)
        scale = params.beta_mp() if calibration.scaling == "beta_x" else mpmath.mpf(1)
        matrix = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                matrix[i, j] = phi_series_eval(i + 1, scale * values[j], params, table).value
        determinant = mpmath.det(matrix) if n > 1 else matrix[0, 0]
        value = (det_prefactor(n, table, calibration) * mpmath.fprod(v ** (n - 1) for v in values)
                 * determinant / vandermonde(values))
    return value
