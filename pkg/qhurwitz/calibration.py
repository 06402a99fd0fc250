"""Calibration routines: each tries the candidate readings of a normalization
against a reference value and freezes the one that reproduces it."""
import itertools
import logging
from dataclasses import dataclass, field

import mpmath

from constants import LOGGER_NAME
from qhurwitz.basis import (BETA_POWERS, INDEX_RANGES, SCALINGS, DetCalibration, RhoTable, phi_series_eval,
                            tau_det_formula)
from qhurwitz.errors import CalibrationError
from qhurwitz.matrixmodel import ExternalSource, WRONSKIAN_ORIENTATIONS, tau_wronskian
from qhurwitz.mellin import ContourSpec, MBKernel, contour_integrals, MellinWeight, pole_set_audit
from qhurwitz.numeric import fmt, relative_error
from qhurwitz.tau import TraceInvariants, tau_eval_numeric, tau_powersum_series, tau_schur_series

logger = logging.getLogger(LOGGER_NAME)

NOT_EVALUATED = "not evaluated"


@dataclass
class Calibration:
    name: str
    selected: str
    candidates: dict = field(default_factory=dict)

    def to_json(self):
        return {"name": self.name, "selected": self.selected,
                "candidates": {key: fmt(value, 5) if isinstance(value, mpmath.mpf) else str(value)
                               for key, value in self.candidates.items()}}


def _select(name, residuals, threshold):
    passing = {key: value for key, value in residuals.items() if value < threshold}
    if not passing:
        logger.error(f"No candidate for {name} below {threshold}: {residuals}")
        raise CalibrationError(f"no {name} candidate reproduced the reference",
                               witness={key: fmt(value, 5) for key, value in residuals.items()})
    selected = min(passing, key=lambda key: passing[key])
    logger.info(f"Calibration {name}: selected {selected}")
    return Calibration(name, selected, residuals)


def calibrate_grading(order=3):
    """Compares the p_(1) coefficient of the Schur series with both power-sum gradings."""
    schur = tau_schur_series(1, order, jobs=1)
    residuals = {}
    for grading in ("calibrated", "literal"):
        powersum = tau_powersum_series(1, order, grading=grading, jobs=1)
        residuals[grading] = mpmath.mpf(len(schur.differences(powersum)))
    return _select("beta-grading", residuals, 0.5)


def calibrate_phi1_scaling(params, x_value="0.1", table=None):
    """phi_1(x) and phi_1(beta x) against tau([x]) at n = 1."""
    table = table or RhoTable(params)
    x = TraceInvariants((x_value,))
    reference = tau_eval_numeric(x, 20, params, tail_tol=1e-14).value
    with params.workprec(16):
        value = x.values()[0]
        candidates = {"x": value, "beta_x": params.beta_mp() * value}
        residuals = {name: relative_error(phi_series_eval(1, arg, params, table).value, reference)
                     for name, arg in candidates.items()}
    return _select("phi1-scaling", residuals, 1e-10)


def calibrate_determinant(params, table=None, samples=(("0.1",), ("0.1", "0.2"))):
    """Scaling x index range x beta power, judged at n = 1 and n = 2 against tau_eval_numeric."""
    table = table or RhoTable(params)
    references = [(TraceInvariants(sample), tau_eval_numeric(TraceInvariants(sample), 20, params, tail_tol=1e-14).value)
                  for sample in samples]
    residuals = {}
    for scaling, index_range, beta_power in itertools.product(SCALINGS, INDEX_RANGES, BETA_POWERS):
        candidate = DetCalibration(scaling, index_range, beta_power)
        try:
            worst = max(relative_error(tau_det_formula(x, params, candidate, table), reference)
                        for x, reference in references)
        except (ZeroDivisionError, ValueError) as e:
            logger.debug(f"Determinant candidate {candidate.label()} failed: {e}")
            worst = mpmath.inf
        residuals[candidate.label()] = worst
    calibration = _select("det-prefactor", residuals, 1e-8)
    return calibration, _parse_det_label(calibration.selected)


def _parse_det_label(label):
    values = dict(part.split("=") for part in label.split(", "))
    return DetCalibration(values["scaling"], values["index_range"], values["beta_power"])


def calibrate_wronskian(params, det_calibration, table=None, sample=("0.1", "0.2")):
    """Row-order sign of the Wronskian constant, judged against the calibrated determinant form."""
    table = table or RhoTable(params)
    x = TraceInvariants(sample)
    reference = tau_det_formula(x, params, det_calibration, table)
    residuals = {orientation: relative_error(tau_wronskian(ExternalSource(x), params, orientation, table=table,
                                                           calibration=det_calibration),
                                             reference)
                 for orientation in WRONSKIAN_ORIENTATIONS}
    return _select("wronskian-constant", residuals, 1e-9)


def calibrate_mellin_orientation(params, contour=None, k=1, x_value=1, table=None):
    """Direct vs reflected reading of the contour integral against the Laurent series."""
    contour = contour or ContourSpec()
    table = table or RhoTable(params)
    kernel = MBKernel(k, params, tol=contour.tol * 1e-6)
    with params.workprec(16):
        weights = [MellinWeight.for_argument(x_value, 1, 0, orientation) for orientation in ("direct", "reflected")]
    result = contour_integrals(kernel, contour, weights)
    reference = phi_series_eval(k, x_value, params, table).value
    residuals = {"direct": relative_error(result.values[0], reference),
                 "reflected": relative_error(result.values[1], reference)}
    return _select("mellin-orientation", residuals, 1e-8)


def calibrate_pole_set(params, k=1, contour=None):
    contour = contour or ContourSpec()
    audit = pole_set_audit(MBKernel(k, params, tol=contour.tol * 1e-6))
    return Calibration("pole-set", audit["convention"],
                       {"residue_at_minus_k": abs(audit["residue_at_minus_k"]),
                        "residue_at_one_minus_k": abs(audit["residue_at_one_minus_k"])})


def not_evaluated(name):
    return Calibration(name, NOT_EVALUATED, {})
