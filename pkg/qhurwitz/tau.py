"""The hypergeometric tau-function: exact truncated series in the Schur and power-sum
bases, and numeric evaluation at trace invariants."""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache, partial

import mpmath
from sympy.polys.domains import QQ

from constants import LOGGER_NAME, N_BRUTE
from qhurwitz.errors import OrderTooSmall, PrecisionLoss, UsageError
from qhurwitz.exactalg import BetaSeries, RatFuncQ, hq_beta_series
from qhurwitz.hurwitz import _grouped_tuples, pure_hurwitz, quantum_weighted_hurwitz
from qhurwitz.mellin import HqEvaluator, hq_eval
from qhurwitz.numeric import fmt, ordered_map, parse_rational, rational_str, to_mpf
from qhurwitz.partitions import (Partition, ProfileList, character, colength_contents, dim_irrep, partitions_of,
                                 riemann_hurwitz_genus, z_mu)

logger = logging.getLogger(LOGGER_NAME)

GRADINGS = ("calibrated", "literal")


@dataclass(frozen=True)
class ContentProduct:
    lam: Partition
    series: BetaSeries


@dataclass(frozen=True)
class SymSeries:
    """Coefficients of p_mu as BetaSeries, for all |mu| <= n_max."""
    n_max: int
    order: int
    coeffs: dict = field(default_factory=dict)

    def coefficient(self, mu):
        return self.coeffs.get(mu, BetaSeries.constant(0, self.order))

    def keys(self):
        return sorted(self.coeffs, key=lambda mu: (mu.weight, [-p for p in mu.parts]))

    def differences(self, other):
        """(mu, power, left, right) for every coefficient where the two series disagree."""
        found = []
        for mu in sorted(set(self.coeffs) | set(other.coeffs), key=lambda m: (m.weight, [-p for p in m.parts])):
            left, right = self.coefficient(mu), other.coefficient(mu)
            for power in range(min(left.order, right.order) + 1):
                if left.coeffs[power] != right.coeffs[power]:
                    found.append((mu, power, str(left.coeffs[power]), str(right.coeffs[power])))
        return found

    def to_json(self):
        return [{"mu": str(mu), "beta_series": self.coeffs[mu].to_json()} for mu in self.keys()]

    def to_rows(self):
        return [{"mu": str(mu), "power": power, "value": str(value)}
                for mu in self.keys() for power, value in enumerate(self.coeffs[mu].coeffs)]


@dataclass(frozen=True)
class TraceInvariants:
    """Eigenvalues x_1..x_n of X; t_i = p_i(x)/i.

    Rationals and strings are kept exact and converted at the working precision
    of the caller; mpmath numbers are used as given.
    """
    x: tuple

    def __post_init__(self):
        values = tuple(self._exact(v) for v in self.x)
        if not values:
            raise UsageError("trace invariants need at least one eigenvalue")
        object.__setattr__(self, "x", values)

    @staticmethod
    def _exact(value):
        if isinstance(value, (mpmath.mpf, mpmath.mpc)):
            if not mpmath.isfinite(value):
                raise UsageError(f"eigenvalues must be finite, got {value}")
            return value
        if isinstance(value, float):
            value = repr(value)
        return value if QQ.of_type(value) else parse_rational(value)

    @classmethod
    def parse(cls, text):
        return cls(tuple(item for item in str(text).split(",")))

    @property
    def n(self):
        return len(self.x)

    def values(self):
        return [v if isinstance(v, (mpmath.mpf, mpmath.mpc)) else to_mpf(v) for v in self.x]

    def power_sum(self, i):
        return mpmath.fsum(v ** i for v in self.values())

    def times(self, count):
        return [self.power_sum(i) / i for i in range(1, count + 1)]

    def __str__(self):
        return ",".join(fmt(v, 15) if isinstance(v, (mpmath.mpf, mpmath.mpc)) else rational_str(v) for v in self.x)


@dataclass(frozen=True)
class TauEvaluation:
    value: object
    truncation_estimate: object
    n_max: int
    shells: tuple = ()

    def to_json(self):
        return {"value": fmt(self.value), "truncation_estimate": fmt(self.truncation_estimate, 5),
                "n_max": self.n_max}


# Exact series

@lru_cache(maxsize=None)
def content_product(lam, order):
    """r_lambda = prod over cells of beta H_q(c beta), exact to beta^order."""
    if order < lam.weight:
        logger.error(f"Content product of {lam} needs order >= {lam.weight}, got {order}")
        raise OrderTooSmall(f"order {order} is below |lambda| = {lam.weight}", witness=str(lam))
    _, contents = colength_contents(lam)
    reduced = order - lam.weight
    product = BetaSeries.constant(1, reduced)
    for content in contents:
        product = product * hq_beta_series(content, reduced)
    coeffs = (RatFuncQ.zero(),) * lam.weight + product.coeffs
    return ContentProduct(lam, BetaSeries(order, coeffs))


def _schur_contribution(lam, order):
    n = lam.weight
    if order < n:
        return []
    base = content_product(lam, order).series
    weight = dim_irrep(lam) / QQ(math.factorial(n))
    return [(mu, base.scale(weight * character(lam, mu) / z_mu(mu))) for mu in partitions_of(n)]


def _merge(order, contributions, n_max):
    coeffs = {Partition(()): BetaSeries.constant(1, order)}
    for pieces in contributions:
        for mu, series in pieces:
            coeffs[mu] = coeffs[mu] + series if mu in coeffs else series
    for n in range(1, n_max + 1):
        for mu in partitions_of(n):
            coeffs.setdefault(mu, BetaSeries.constant(0, order))
    return coeffs


def tau_schur_series(n_max, order, jobs=None):
    """sum_lambda (d_lambda/|lambda|!) r_lambda s_lambda rewritten in the p_mu basis."""
    if order < 0 or n_max < 0:
        raise UsageError("n_max and order must be non-negative")
    lams = [lam for n in range(1, n_max + 1) for lam in partitions_of(n)]
    logger.info(f"Schur series: {len(lams)} partitions, order {order}")
    contributions = ordered_map(partial(_schur_contribution, order=order), lams, jobs)
    return SymSeries(n_max, order, _merge(order, contributions, n_max))


def _powersum_coefficient(mu, order, grading, method, n_brute):
    coeffs = [RatFuncQ.zero()] * (order + 1)
    offset = mu.weight if grading == "calibrated" else 0
    for d in range(0, order - offset + 1):
        value = quantum_weighted_hurwitz(mu, d, method, n_brute).value
        if not value.is_zero():
            coeffs[offset + d] = value
    return [(mu, BetaSeries(order, tuple(coeffs)))]


def tau_powersum_series(n_max, order, grading="calibrated", method="character", n_brute=N_BRUTE, jobs=None):
    """sum_mu sum_d beta^(|mu|+d) H^d(mu) p_mu; grading "literal" uses beta^d instead."""
    if grading not in GRADINGS:
        raise UsageError(f"grading must be one of {GRADINGS}, got '{grading}'")
    mus = [mu for n in range(1, n_max + 1) for mu in partitions_of(n)]
    logger.info(f"Power-sum series: {len(mus)} profiles, order {order}, grading {grading}")
    contributions = ordered_map(
        partial(_powersum_coefficient, order=order, grading=grading, method=method, n_brute=n_brute), mus, jobs)
    return SymSeries(n_max, order, _merge(order, contributions, n_max))


def coefficient_support(mu, order, method="character"):
    """Achievable beta powers by profile enumeration, next to the nonzero powers of the p_mu coefficient."""
    achievable = []
    for d in range(0, order - mu.weight + 1):
        if d == 0:
            hit = pure_hurwitz(ProfileList((mu,)), method) != 0
        else:
            hit = any(pure_hurwitz(ProfileList(key + (mu,)), method) != 0 for key, _ in _grouped_tuples(mu.weight, d))
        if hit:
            if riemann_hurwitz_genus(mu.weight, mu, d) is None:
                logger.warning(f"d={d} realised for mu={mu} with odd Euler characteristic")
            achievable.append(mu.weight + d)
    nonzero = _powersum_coefficient(mu, order, "calibrated", method, N_BRUTE)[0][1].nonzero_powers()
    return achievable, nonzero


# Numeric evaluation

def complete_homogeneous(x, degree):
    """h_0..h_degree of the eigenvalues by Newton's identities k h_k = sum_i p_i h_{k-i}."""
    power_sums = [None] + [x.power_sum(i) for i in range(1, degree + 1)]
    h = [mpmath.mpf(1)]
    for k in range(1, degree + 1):
        h.append(mpmath.fsum(power_sums[i] * h[k - i] for i in range(1, k + 1)) / k)
    return h


def schur_eval(lam, x, h=None):
    """s_lambda(x_1..x_n) by the Jacobi-Trudi determinant det(h_{lambda_i - i + j})."""
    if lam.length > x.n:
        return mpmath.mpf(0)
    if not lam.parts:
        return mpmath.mpf(1)
    size = lam.length
    if h is None:
        h = complete_homogeneous(x, lam.weight)

    def entry(index):
        return h[index] if 0 <= index < len(h) else mpmath.mpf(0)

    matrix = mpmath.matrix(size, size)
    for i in range(size):
        for j in range(size):
            matrix[i, j] = entry(lam.parts[i] - i + j)
    return mpmath.det(matrix) if size > 1 else matrix[0, 0]


def numeric_content_factors(params, contents, evaluator=None):
    """r_c = beta H_q(c beta) at numeric q, beta for each distinct content."""
    evaluator = evaluator or HqEvaluator(params)
    beta = params.beta_mp()
    return {c: beta * hq_eval(c * beta, evaluator) for c in sorted(set(contents))}


def tau_eval_numeric(x, n_max, params, tail_tol=None):
    """sum_{|lambda| <= n_max} (d_lambda/|lambda|!) r_lambda s_lambda(x) with a shell-ratio tail estimate."""
    if n_max < 1:
        raise UsageError("n_max must be at least 1 for numeric evaluation")
    tail_tol = params.tol if tail_tol is None else tail_tol
    with params.workprec(16):
        evaluator = HqEvaluator(params)
        factors = numeric_content_factors(params, range(1 - x.n, n_max), evaluator)
        h = complete_homogeneous(x, n_max)
        shells = [mpmath.mpf(1)]
        for n in range(1, n_max + 1):
            terms = []
            for lam in partitions_of(n):
                if lam.length > x.n:
                    continue
                _, contents = colength_contents(lam)
                r_lam = mpmath.fprod(factors[c] for c in contents)
                terms.append(to_mpf(dim_irrep(lam)) / math.factorial(n) * r_lam * schur_eval(lam, x, h))
            shells.append(mpmath.fsum(terms))
        value = mpmath.fsum(shells)
        estimate = _shell_tail(shells)
    logger.debug(f"tau at {len(x.x)} eigenvalues: n_max={n_max}, tail estimate {fmt(estimate, 5)}")
    if estimate > tail_tol * max(1, abs(value)):
        logger.error(f"Shell tail estimate {fmt(estimate, 5)} exceeds tolerance {tail_tol}")
        raise PrecisionLoss(f"tau truncation estimate {fmt(estimate, 5)} exceeds tolerance {tail_tol}",
                            witness=str(x))
    return TauEvaluation(value, estimate, n_max, tuple(shells))


def _shell_tail(shells):
    last, before = abs(shells[-1]), abs(shells[-2]) if len(shells) > 1 else mpmath.mpf(0)
    if last == 0:
        return mpmath.mpf(0)
    if before == 0:
        return last
    ratio = last / before
    if ratio >= 1:
        return 2 * last
    return last * ratio / (1 - ratio)


def symseries_eval(series, x, params):
    """Evaluate an exact SymSeries at numeric q, beta and p_i = sum_a x_a^i."""
    with params.workprec(16):
        q_value, beta = params.q_mp(), params.beta_mp()
        power_sums = {i: x.power_sum(i) for i in range(1, series.n_max + 1)}
        total = []
        for mu in series.keys():
            coefficient = mpmath.fsum(c.evaluate(q_value) * beta ** power
                                      for power, c in enumerate(series.coeffs[mu].coeffs) if not c.is_zero())
            total.append(coefficient * mpmath.fprod(power_sums[p] for p in mu.parts))
        return +mpmath.fsum(total)
