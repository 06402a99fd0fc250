"""Numeric configuration shared by the series, contour and matrix-model paths."""
import logging
import os
from dataclasses import dataclass, replace
from multiprocessing import Pool, current_process

import mpmath
import sympy
from sympy.polys.domains import QQ

from constants import (LOGGER_NAME, THREADS_ENV_VAR, MAX_PARALLEL_JOBS, DEFAULT_PRECISION_BITS, DEFAULT_TOL,
                       DEFAULT_SERIES_MAX_TERMS)
from qhurwitz.errors import UsageError

logger = logging.getLogger(LOGGER_NAME)

_max_parallel_jobs = MAX_PARALLEL_JOBS


def parse_rational(text):
    """Parse "1/2", "-0.3" or an integer into an exact QQ element."""
    try:
        value = sympy.Rational(str(text).strip())
    except (TypeError, ValueError, sympy.SympifyError) as e:
        raise UsageError(f"Cannot read '{text}' as an exact rational: {e}")
    return QQ(int(value.p), int(value.q))


def rational_str(value):
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_mpf(value):
    """Exact rational to an mpf at the current working precision."""
    return mpmath.mpf(int(value.numerator)) / int(value.denominator)


def to_mp(value):
    """Real input (QQ, int, str, float or mpf) to an mpf."""
    if QQ.of_type(value):
        return to_mpf(value)
    if isinstance(value, str):
        return to_mpf(parse_rational(value))
    return mpmath.mpf(value)


@dataclass(frozen=True)
class NumericParams:
    """Numeric configuration: q and beta are kept exact and converted on demand."""
    q: object = QQ(1, 2)
    beta: object = QQ(-3, 10)
    precision_bits: int = DEFAULT_PRECISION_BITS
    tol: float = DEFAULT_TOL
    series_max_terms: int = DEFAULT_SERIES_MAX_TERMS
    rho_guard: int = 64

    def __post_init__(self):
        if not QQ(0) < self.q < QQ(1):
            raise UsageError(f"q must lie in (0, 1), got {rational_str(self.q)}")
        if not self.beta < QQ(0):
            raise UsageError(f"numeric modes require beta < 0, got {rational_str(self.beta)}")
        if self.precision_bits < 53:
            raise UsageError(f"precision_bits must be at least 53, got {self.precision_bits}")
        if not 0 < self.tol < 1:
            raise UsageError(f"tol must lie in (0, 1), got {self.tol}")
        if self.series_max_terms < 2:
            raise UsageError("series_max_terms must be at least 2")

    @classmethod
    def from_profile(cls, section, **overrides):
        """Build from the ``numeric`` section of an environment profile."""
        values = {
            "q": parse_rational(section.get("q", "1/2")),
            "beta": parse_rational(section.get("beta", "-3/10")),
            "precision_bits": int(section.get("precision_bits", DEFAULT_PRECISION_BITS)),
            "tol": float(section.get("tol", DEFAULT_TOL)),
            "series_max_terms": int(section.get("series_max_terms", DEFAULT_SERIES_MAX_TERMS)),
            "rho_guard": int(section.get("rho_guard", 64)),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def with_values(self, **changes):
        return replace(self, **changes)

    def workprec(self, extra_bits=0):
        return mpmath.workprec(self.precision_bits + extra_bits)

    def q_mp(self):
        return to_mpf(self.q)

    def beta_mp(self):
        return to_mpf(self.beta)

    def tol_mp(self):
        return mpmath.mpf(self.tol)

    def epsilon(self):
        """Round-off unit 2^-precision_bits."""
        return mpmath.ldexp(mpmath.mpf(1), -self.precision_bits)

    def separation_threshold(self):
        return mpmath.ldexp(mpmath.mpf(1), -(self.precision_bits // 2))

    def describe(self):
        return {
            "q": rational_str(self.q),
            "beta": rational_str(self.beta),
            "precision_bits": self.precision_bits,
            "tol": self.tol,
            "series_max_terms": self.series_max_terms,
        }


def fmt(value, digits=30):
    """Deterministic string form of an mpmath number for reports."""
    if isinstance(value, mpmath.mpc):
        if value.imag == 0:
            value = value.real
        else:
            return f"{mpmath.nstr(value.real, digits)}{'+' if value.imag >= 0 else '-'}{mpmath.nstr(abs(value.imag), digits)}j"
    return mpmath.nstr(value, digits)


def relative_error(value, reference):
    scale = max(abs(reference), mpmath.mpf(10) ** -300)
    return abs(value - reference) / scale


def configure_parallelism(max_jobs):
    global _max_parallel_jobs
    _max_parallel_jobs = max(1, int(max_jobs))


def worker_count(requested=None):
    """Number of worker processes; QHURWITZ_THREADS caps the configured value."""
    jobs = _max_parallel_jobs if requested is None else int(requested)
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value is None:
        return 1 if requested is None else max(1, jobs)
    try:
        cap = int(env_value)
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={env_value!r}")
        return 1
    return max(1, min(jobs, cap))


def ordered_map(func, items, jobs=None):
    """Map in worker processes when parallelism is enabled; results keep input order."""
    items = list(items)
    jobs = worker_count(jobs)
    if jobs <= 1 or len(items) < 2 or current_process().daemon:
        return [func(item) for item in items]
    logger.debug(f"Mapping {getattr(func, '__name__', func)} over {len(items)} items with {jobs} workers")
    with Pool(min(jobs, len(items))) as pool:
        return pool.map(func, items)
