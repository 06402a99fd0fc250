"""Assertion helpers shared by the behave step modules."""
import logging

import mpmath
import parse
from behave import register_type

from constants import LOGGER_NAME
from qhurwitz.errors import QHurwitzError
from qhurwitz.numeric import fmt, relative_error

logger = logging.getLogger(LOGGER_NAME)

# Named thresholds for step text: "within the quadrature tolerance"
TOLERANCES = {
    "working": 1e-30,
    "identity": 1e-10,
    "determinant": 1e-9,
    "quadrature": 1e-8,
}


@parse.with_pattern(r"the [a-z]+ tolerance|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
def parse_tolerance(text):
    if text.startswith("the "):
        name = text[len("the "):-len(" tolerance")]
        if name not in TOLERANCES:
            raise ValueError(f"unknown tolerance '{name}'; known: {sorted(TOLERANCES)}")
        return TOLERANCES[name]
    return float(text)


register_type(Tolerance=parse_tolerance)


def capture(context, action):
    """Runs an action, keeping a raised engine error on the context."""
    context.error = None
    try:
        return action()
    except QHurwitzError as e:
        logger.info(f"Captured {type(e).__name__}: {e.message}")
        context.error = e
        return None


def assert_no_error(context):
    if context.error is not None:
        raise AssertionError(f"unexpected {type(context.error).__name__}: {context.error.message}")


def assert_close(value, reference, threshold, relative=True):
    value, reference = mpmath.mpmathify(value), mpmath.mpmathify(reference)
    residual = relative_error(value, reference) if relative else abs(value - reference)
    assert residual < threshold, \
        f"{fmt(value, 20)} vs {fmt(reference, 20)}: residual {mpmath.nstr(residual, 5)} >= {threshold}"
    return residual
