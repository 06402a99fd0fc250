"""Verification suites: every identity chain checked by id, with calibrations reported."""
import copy
import itertools
import logging
import math
import random
from dataclasses import dataclass, field, replace

import mpmath
from sympy.polys.domains import QQ

from constants import LOGGER_NAME, REPORT_SCHEMA_VERSION, VERIFY_SUITES
from qhurwitz import calibration as calib
from qhurwitz.basis import (DERIVED_CALIBRATION, SCALINGS, RhoTable, basis_change_check, basis_change_matrix,
                            phi_coefficient, phi_series_eval, recursion_check, tau_det_formula)
from qhurwitz.errors import CoincidentPoints, QHurwitzError, UsageError
from qhurwitz.exactalg import RatFuncQ
from qhurwitz.hurwitz import (WeightParams, generic_weighted_hurwitz, pure_hurwitz_bruteforce,
                              pure_hurwitz_frobenius, quantum_weight, quantum_weight_truncated,
                              quantum_weighted_hurwitz, weight_factor_generic)
from qhurwitz.matrixmodel import (WRONSKIAN_ORIENTATIONS, ExternalSource, f_derivative, identity_audits,
                                  tau_from_matrix_model, tau_wronskian)
from qhurwitz.mellin import (ORIENTATIONS, ContourSpec, HqEvaluator, MBKernel, MellinWeight, contour_integrals,
                             hq_asymptotic, hq_eval, kernel_decay, kernel_residue, periodic_term_ratio)
from qhurwitz.numeric import fmt, ordered_map, parse_rational, relative_error, to_mpf
from qhurwitz.partitions import (Partition, ProfileList, character, character_bruteforce, class_size,
                                 conjugacy_class, count_partitions, dim_irrep, partitions_of, z_mu)
from qhurwitz.tau import (TraceInvariants, coefficient_support, symseries_eval, tau_eval_numeric,
                          tau_powersum_series, tau_schur_series)

logger = logging.getLogger(LOGGER_NAME)

FLAG_CHOICES = {
    "beta-grading": ("calibrated", "literal"),
    "asymptotic-variant": ("derived", "printed"),
}

DEFAULT_SETTINGS = {
    "exact": {"frobenius_max_n": 5, "frobenius_max_k": 3, "series_n_max": 5, "series_order": 9,
              "weight_max_d": 5, "truncation": 60, "normalization_max_d": 4, "normalization_c": [2, 3, 5, 7],
              "character_max_n": 6, "bruteforce_character_max_n": 5, "burnside_max_n": 8, "support_max_n": 4},
    "series": {"recursion_terms": 30, "recursion_max_k": 6, "phi_samples": ["0.05", "0.1", "0.2"],
               "det_sample": ["0.1", "0.2"], "det_sample_n3": ["0.1", "0.2", "0.3"], "rho_beta": "-1/2",
               "rho_audit": 80, "functional_points": 6, "series_n_max": 2, "series_order": 24},
    "mellin": {"beta": "-1/4", "kernel_beta": "-1", "k_values": [1, 2, 3], "x_values": ["0.5", "1", "2"],
               "residue_terms": 5, "contour": {"delta": 0.25, "nodes_per_unit": 48, "tol": 1e-14}},
    "matrix": {"y": "-0.5", "grid_n": [1, 2, 3], "grid_m": [0, 1, 2], "n2": ["0.85", "1.2"],
               "n3": ["0.8", "1.0", "1.25"], "tau_n_max": 30},
}


@dataclass(frozen=True)
class SuiteContext:
    """Settings, flags and the calibration selections every check reads its conventions from."""
    params: object
    settings: dict
    flags: dict
    det_calibration: object = DERIVED_CALIBRATION
    grading: str = "calibrated"
    phi1_scaling: str = "beta_x"
    wronskian_orientation: str = "reversed"
    mellin_orientation: str = "reflected"

    def flag(self, name):
        return self.flags.get(name, FLAG_CHOICES[name][0])

    def beta_grading(self):
        return self.flags.get("beta-grading", self.grading)

    def phi1_argument(self, x):
        return self.params.beta_mp() * x if self.phi1_scaling == "beta_x" else x

    def mellin_params(self):
        return self.params.with_values(beta=parse_rational(self.settings["mellin"]["beta"]))

    def contour(self):
        spec = self.settings["mellin"]["contour"]
        return ContourSpec(delta=float(spec["delta"]), nodes_per_unit=int(spec["nodes_per_unit"]),
                           tol=float(spec["tol"]), shape=spec.get("shape", "rectangle"))


@dataclass
class CheckResult:
    check_id: str
    suite: str
    description: str
    status: str
    residual: object = None
    threshold: object = None
    witness: object = None

    @property
    def passed(self):
        return self.status == "pass"

    def to_json(self):
        return {"id": self.check_id, "suite": self.suite, "description": self.description, "status": self.status,
                "residual": None if self.residual is None else _text(self.residual),
                "threshold": None if self.threshold is None else _text(self.threshold),
                "witness": self.witness}


@dataclass
class VerificationReport:
    suites: list
    params: dict
    flags: dict
    calibrations: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.errors and all(check.passed for check in self.checks)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_json(self):
        return {"schema": REPORT_SCHEMA_VERSION, "command": "verify", "suites": self.suites, "params": self.params,
                "flags": self.flags, "calibrations": [c.to_json() for c in self.calibrations],
                "checks": [c.to_json() for c in sorted(self.checks, key=lambda c: c.check_id)],
                "errors": self.errors, "passed": self.passed, "exit_code": self.exit_code}


def _text(value):
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return fmt(value, 6)
    return str(value)


def _outcome(check_id, description, residual, threshold, witness=None, passed=None):
    suite = SUITE_OF[check_id[0]]
    ok = residual < threshold if passed is None else passed
    if not ok:
        logger.warning(f"Check {check_id} failed: residual {_text(residual)} vs threshold {_text(threshold)}")
    return CheckResult(check_id, suite, description, "pass" if ok else "fail", residual, threshold, witness)


# Exact suite

def check_e01(ctx):
    settings = ctx.settings["exact"]
    worst, witness, count = 0, None, 0
    for n in range(1, settings["frobenius_max_n"] + 1):
        for k in range(1, settings["frobenius_max_k"] + 1):
            for combo in itertools.combinations_with_replacement(partitions_of(n), k):
                profiles = ProfileList(combo)
                count += 1
                if pure_hurwitz_frobenius(profiles) != pure_hurwitz_bruteforce(profiles):
                    worst, witness = worst + 1, witness or str(profiles)
    return _outcome("E01", f"Frobenius formula equals S_N enumeration on {count} profile lists", worst, 1, witness)


def check_e02(ctx):
    settings = ctx.settings["exact"]
    grading = ctx.beta_grading()
    schur = tau_schur_series(settings["series_n_max"], settings["series_order"])
    powersum = tau_powersum_series(settings["series_n_max"], settings["series_order"], grading=grading)
    differences = schur.differences(powersum)
    witness = None
    if differences:
        mu, power, left, right = differences[0]
        witness = f"mu={mu}, beta^{power}: schur {left} vs powersum {right}"
    return _outcome("E02", f"Schur series equals power-sum series ({grading} grading)", len(differences), 1, witness)


def check_e03(ctx):
    settings = ctx.settings["exact"]
    q_value = QQ(1, 2)
    threshold = mpmath.ldexp(1, -40)
    worst, witness = mpmath.mpf(0), None
    with ctx.params.workprec():
        for d in range(1, settings["weight_max_d"] + 1):
            for lam in partitions_of(d):
                closed = quantum_weight(lam.parts).evaluate(to_mpf(q_value))
                truncated = quantum_weight_truncated(lam.parts, to_mpf(q_value), settings["truncation"])
                error = abs(closed - truncated)
                if error > worst:
                    worst, witness = error, f"colengths {lam}"
    return _outcome("E03", "quantum weight closed form vs truncated multi-geometric sum", worst, threshold, witness)


def _weight_by_definition(colengths, c, strict):
    k, d = len(colengths), sum(colengths)
    chains = itertools.combinations(range(len(c)), k) if strict \
        else itertools.combinations_with_replacement(range(len(c)), k)
    chains = list(chains)
    total = QQ(0)
    for sigma in itertools.permutations(range(k)):
        for chain in chains:
            total += math.prod(c[chain[sigma[j]]] ** colengths[j] for j in range(k))
    total /= math.factorial(k)
    return total if strict else total * (-1) ** (k + d)


def check_e04(ctx):
    settings = ctx.settings["exact"]
    c = [QQ(v) for v in settings["normalization_c"]]
    mismatches, witness, count = 0, None, 0
    for d in range(1, settings["normalization_max_d"] + 1):
        for lam in partitions_of(d):
            for colengths in set(itertools.permutations(lam.parts)):
                count += 1
                for mode, strict in (("G-product", True), ("G-dual", False)):
                    if weight_factor_generic(colengths, c, mode) != _weight_by_definition(colengths, c, strict):
                        mismatches += 1
                        witness = witness or f"{mode} colengths {colengths}"
    return _outcome("E04", f"weight normalization (prod m_j!/k!) on {count} colength tuples", mismatches, 1, witness)


def check_e05(ctx):
    expected = [
        (Partition((1,)), 0, RatFuncQ.one()),
        (Partition((2,)), 1, RatFuncQ.parse("1/(2 - 2*q)")),
        (Partition((2,)), 3, RatFuncQ.parse("1/(2*(1-q)*(1-q**2)*(1-q**3))")),
        (Partition((1, 1)), 1, RatFuncQ.zero()),
    ]
    mismatches, witness = 0, None
    for mu, d, value in expected:
        found = quantum_weighted_hurwitz(mu, d).value
        if found != value:
            mismatches += 1
            witness = witness or f"mu={mu}, d={d}: {found} != {value}"
    with ctx.params.workprec():
        q_value = mpmath.mpf(1) / 2
        c = [q_value ** i for i in range(ctx.settings["exact"]["truncation"])]
        generic = generic_weighted_hurwitz(Partition((2,)), 1, WeightParams(tuple(c), "G-dual")).value
        quantum = quantum_weighted_hurwitz(Partition((2,)), 1).value.evaluate(q_value)
        if abs(generic - quantum) > mpmath.ldexp(1, -40):
            mismatches += 1
            witness = witness or f"generic G-dual vs quantum: {fmt(generic, 15)} vs {fmt(quantum, 15)}"
    for n in range(1, ctx.settings["exact"]["support_max_n"] + 1):
        for mu in partitions_of(n):
            achievable, nonzero = coefficient_support(mu, n + 4)
            if achievable != nonzero:
                mismatches += 1
                witness = witness or f"support of p_{mu}: {achievable} vs {nonzero}"
    return _outcome("E05", "weighted Hurwitz examples and coefficient support", mismatches, 1, witness)


def check_e06(ctx):
    settings = ctx.settings["exact"]
    failures = []
    for n in range(0, settings["burnside_max_n"] + 1):
        if sum(dim_irrep(lam) ** 2 for lam in partitions_of(n)) != math.factorial(n):
            failures.append(f"Burnside N={n}")
    for n in range(0, 13):
        if count_partitions(n) != len(partitions_of(n)):
            failures.append(f"p({n})")
    for n in range(1, settings["character_max_n"] + 1):
        lams = partitions_of(n)
        for a, b in itertools.combinations_with_replacement(lams, 2):
            row = sum(character(a, mu) * character(b, mu) / z_mu(mu) for mu in lams)
            column = sum(character(lam, a) * character(lam, b) for lam in lams)
            if row != (1 if a == b else 0):
                failures.append(f"row orthogonality {a},{b}")
            if column != (z_mu(a) if a == b else 0):
                failures.append(f"column orthogonality {a},{b}")
        for mu in lams:
            if class_size(mu) != len(conjugacy_class(mu)):
                failures.append(f"class size {mu}")
    for n in range(1, settings["bruteforce_character_max_n"] + 1):
        for lam in partitions_of(n):
            for mu in partitions_of(n):
                if character(lam, mu) != character_bruteforce(lam, mu):
                    failures.append(f"chi_{lam}({mu})")
    return _outcome("E06", "Burnside, orthogonality, class sizes and characters vs brute force", len(failures), 1,
                    failures[0] if failures else None)


# Series suite

def check_s01(ctx):
    settings = ctx.settings["series"]
    params = ctx.params
    table = RhoTable(params)
    threshold = mpmath.ldexp(1, -params.precision_bits + 12)
    worst, witness = mpmath.mpf(0), None
    for k in range(1, settings["recursion_max_k"] + 1):
        for form in ("euler", "R"):
            report = recursion_check(k, settings["recursion_terms"], form, params, table)
            candidates = [report.max_residual]
            if report.two_path_residual is not None:
                candidates.append(report.two_path_residual)
            if max(candidates) > worst:
                worst, witness = max(candidates), f"k={k}, form={form}"
    return _outcome("S01", "recursion identities on Laurent coefficients", worst, threshold, witness)


def check_s02(ctx):
    params = ctx.params
    table = RhoTable(params)
    worst, witness = mpmath.mpf(0), None
    for sample in ctx.settings["series"]["phi_samples"]:
        x = TraceInvariants((sample,))
        reference = tau_eval_numeric(x, 20, params, tail_tol=1e-14).value
        with params.workprec(16):
            value = phi_series_eval(1, ctx.phi1_argument(x.values()[0]), params, table).value
        error = relative_error(value, reference)
        if error > worst:
            worst, witness = error, f"x={sample}"
    return _outcome("S02", f"phi_1 at the {ctx.phi1_scaling} argument equals tau([x])", worst, mpmath.mpf("1e-10"), witness)


def check_s03(ctx):
    params = ctx.params
    settings = ctx.settings["series"]
    threshold = mpmath.ldexp(1, -params.precision_bits + 10)
    audit = RhoTable(params).audit(settings["rho_audit"])
    failures = []
    decay_params = params.with_values(beta=parse_rational(settings["rho_beta"]))
    decay_table = RhoTable(decay_params)
    with decay_params.workprec(16):
        logs = {j: mpmath.log(abs(decay_table(j))) for j in range(1, 81)}
        if not all(logs[j + 1] < logs[j] for j in range(10, 80)):
            failures.append("|rho_j| not eventually decreasing")
        first, second = (logs[40] - logs[20]) / 20, (logs[80] - logs[40]) / 40
        if not second < first < 0:
            failures.append(f"log|rho_j| slopes {fmt(first, 5)}, {fmt(second, 5)} do not steepen")
    unit = params.with_values(beta=QQ(-1))
    with unit.workprec(16):
        oracle = -1 / mpmath.qp(-1, unit.q_mp())
        if relative_error(RhoTable(unit)(1), oracle) > threshold:
            failures.append("rho_1 at beta=-1 differs from the q-Pochhammer oracle")
    return _outcome("S03", "rho table audit, decay and product oracle", audit, threshold,
                    failures[0] if failures else None, passed=audit < threshold and not failures)


def _wronskian(ctx, x, table):
    return tau_wronskian(ExternalSource(x), ctx.params, ctx.wronskian_orientation, table=table,
                         calibration=ctx.det_calibration)


def check_s04(ctx):
    params = ctx.params
    settings = ctx.settings["series"]
    table = RhoTable(params)
    x2 = TraceInvariants(tuple(settings["det_sample"]))
    x3 = TraceInvariants(tuple(settings["det_sample_n3"]))
    det2 = tau_det_formula(x2, params, ctx.det_calibration, table)
    wronskian2 = _wronskian(ctx, x2, table)
    reference = tau_eval_numeric(x2, 20, params, tail_tol=1e-14).value
    det3 = tau_det_formula(x3, params, ctx.det_calibration, table)
    wronskian3 = _wronskian(ctx, x3, table)
    swapped = tau_det_formula(TraceInvariants(tuple(reversed(settings["det_sample_n3"]))), params,
                              ctx.det_calibration, table)
    two_path = max(relative_error(det2, wronskian2), relative_error(det3, wronskian3))
    to_tau = max(relative_error(det2, reference), relative_error(wronskian2, reference))
    symmetry = relative_error(swapped, det3)
    try:
        tau_det_formula(TraceInvariants(("0.1", "0.1")), params, ctx.det_calibration, table)
        coincident = "repeated eigenvalue accepted"
    except CoincidentPoints:
        coincident = None
    passed = two_path < 1e-9 and to_tau < 1e-8 and symmetry < 1e-9 and coincident is None
    witness = coincident or f"det/wronskian {fmt(two_path, 5)}, vs tau {fmt(to_tau, 5)}, symmetry {fmt(symmetry, 5)}"
    return _outcome("S04", "determinant and Wronskian forms vs tau_eval_numeric", max(two_path, to_tau),
                    mpmath.mpf("1e-9"), witness, passed=passed)


def check_s05(ctx):
    params = ctx.params
    table = RhoTable(params)
    threshold = mpmath.ldexp(1, -params.precision_bits + 12)
    worst = max(basis_change_check(n, 20, params, table) for n in (2, 3, 4))
    beta = params.beta
    row_ok = basis_change_matrix(2, beta).row(1) == [beta, beta]
    return _outcome("S05", "basis change table reproduces phi_k from D-powers of phi_n", worst, threshold,
                    None if row_ok else "n=2 row differs from beta(D+1)", passed=worst < threshold and row_ok)


def check_s06(ctx):
    params = ctx.params
    variant = ctx.flag("asymptotic-variant")
    ev = HqEvaluator(params)
    failures = []
    rng = random.Random(20240601)
    worst = mpmath.mpf(0)
    with params.workprec(16):
        for _ in range(ctx.settings["series"]["functional_points"]):
            z = mpmath.mpc(rng.uniform(-3, 0.9), rng.uniform(-1, 1))
            residual = relative_error(hq_eval(z, ev), hq_eval(params.q_mp() * z, ev) / (1 - z))
            worst = max(worst, residual)
        residuals = [abs(mpmath.log(hq_eval(-mpmath.mpf(10) ** j, ev)) - hq_asymptotic(-mpmath.mpf(10) ** j, ev,
                                                                                        variant))
                     for j in (2, 3, 4)]
        if not residuals[0] > residuals[1] > residuals[2]:
            failures.append(f"asymptotic residuals not decreasing ({variant}): "
                            + ", ".join(fmt(r, 5) for r in residuals))
        if not periodic_term_ratio(params.q_mp()) < mpmath.mpf("1e-12"):
            failures.append("periodic sum k=2/k=1 ratio above 1e-12")
        tiny = params.with_values(q=QQ(1, 10 ** 30))
        if abs(hq_eval(mpmath.mpf(1) / 2, HqEvaluator(tiny)) - 2) > mpmath.mpf("1e-15"):
            failures.append("q -> 0 limit H_q(1/2) != 2")
        oracle = 1 / mpmath.qp(-1, params.q_mp())
        if relative_error(hq_eval(-1, ev), oracle) > mpmath.mpf("1e-20"):
            failures.append("H_q(-1) differs from the q-Pochhammer oracle")
    threshold = mpmath.mpf("1e-20")
    return _outcome("S06", "H_q functional equation, asymptotics and product oracles", worst, threshold,
                    failures[0] if failures else None, passed=worst < threshold and not failures)


def check_s07(ctx):
    params = ctx.params
    settings = ctx.settings["series"]
    n_max, order = settings["series_n_max"], settings["series_order"]
    schur = tau_schur_series(n_max, order)
    powersum = tau_powersum_series(n_max, order)
    worst, witness = mpmath.mpf(0), None
    for sample in (("0.1",), tuple(settings["det_sample"])):
        x = TraceInvariants(sample)
        numeric = tau_eval_numeric(x, n_max, params, tail_tol=1).value
        for label, series in (("schur", schur), ("powersum", powersum)):
            error = relative_error(symseries_eval(series, x, params), numeric)
            if error > worst:
                worst, witness = error, f"{label} basis at x={','.join(sample)}"
    return _outcome("S07", "numeric tau equals the exact series specialization", worst, mpmath.mpf("1e-12"), witness)


# Mellin suite

def check_m01(ctx):
    params = ctx.params.with_values(beta=parse_rational(ctx.settings["mellin"]["kernel_beta"]))
    base = MBKernel(1, params)
    more = MBKernel(1, params, guard=base.guard + 10)
    with params.workprec(16):
        residual = relative_error(base(-0.5), more(-0.5))
    return _outcome("M01", "kernel product cut-off M vs M+10", residual, mpmath.mpf("1e-12"),
                    f"M={base.product_cutoff}")


def check_m02(ctx):
    params = ctx.mellin_params()
    table = RhoTable(params)
    worst, witness = mpmath.mpf(0), None
    for k in ctx.settings["mellin"]["k_values"]:
        kernel = MBKernel(k, params, tol=ctx.contour().tol * 1e-6)
        with params.workprec(16):
            for j in range(ctx.settings["mellin"]["residue_terms"]):
                pole = 1 - k + j
                residue = kernel_residue(kernel, pole)
                expected = -(-1) ** (pole % 2) * phi_coefficient(k, j, table)
                error = relative_error(residue, expected)
                if error > worst:
                    worst, witness = error, f"k={k}, pole s={pole}"
            if abs(kernel_residue(kernel, -k)) > mpmath.mpf("1e-12") * abs(kernel_residue(kernel, 1 - k)):
                worst, witness = mpmath.inf, f"k={k}: s=-k behaves as a pole"
    kernel = MBKernel(1, params, tol=ctx.contour().tol * 1e-6)
    with params.workprec(16):
        beta = params.beta_mp()
        for n in range(1, 5):
            error = relative_error(kernel.product_at(n), beta ** (1 - n) * table(n - 1))
            if error > worst:
                worst, witness = error, f"Gamma-ratio product at s={n}"
    return _outcome("M02", "kernel residues reproduce the Laurent coefficients", worst, mpmath.mpf("1e-10"), witness)


def _series_vs_contour(ctx, contour):
    params = ctx.mellin_params()
    table = RhoTable(params)
    values = {}
    for k in ctx.settings["mellin"]["k_values"]:
        kernel = MBKernel(k, params, tol=contour.tol * 1e-6)
        with params.workprec(16):
            weights = [MellinWeight.for_argument(to_mpf(parse_rational(x)), 1, 0, ctx.mellin_orientation)
                       for x in ctx.settings["mellin"]["x_values"]]
        result = contour_integrals(kernel, contour, weights)
        for x, value in zip(ctx.settings["mellin"]["x_values"], result.values):
            values[(k, x)] = value
    references = {(k, x): phi_series_eval(k, to_mpf(parse_rational(x)), params, table).value for k, x in values}
    return values, references


def check_m03(ctx):
    values, references = _series_vs_contour(ctx, ctx.contour())
    errors = {key: relative_error(values[key], references[key]) for key in values}
    key = max(errors, key=lambda item: errors[item])
    return _outcome("M03", "contour integral equals the Laurent series", errors[key], mpmath.mpf("1e-8"),
                    f"k={key[0]}, x={key[1]}")


def check_m04(ctx):
    contour = ctx.contour()
    coarse, _ = _series_vs_contour(ctx, contour)
    fine, _ = _series_vs_contour(ctx, contour.refined())
    errors = {key: relative_error(coarse[key], fine[key]) for key in coarse}
    key = max(errors, key=lambda item: errors[item])
    return _outcome("M04", "node doubling leaves the contour integral unchanged", errors[key], mpmath.mpf("1e-10"),
                    f"k={key[0]}, x={key[1]}")


def check_m05(ctx):
    params = ctx.mellin_params()
    contour = ctx.contour()
    worst, witness = mpmath.mpf(0), None
    for k in ctx.settings["mellin"]["k_values"]:
        kernel = MBKernel(k, params, tol=contour.tol * 1e-6)
        shifted = replace(contour, left_turn=float(1 - k) + 0.5, s_max=None)
        with params.workprec(16):
            weight = MellinWeight.for_argument(1, 1, 0, ctx.mellin_orientation)
        full = contour_integrals(kernel, contour, [weight]).value
        partial = contour_integrals(kernel, shifted, [weight]).value
        residue = kernel_residue(kernel, 1 - k, weight=weight)
        with params.workprec(16):
            error = abs((full - partial) - residue) / max(1, abs(residue))
        if error > worst:
            worst, witness = error, f"k={k}"
    return _outcome("M05", "excluding the first pole removes exactly its residue", worst, mpmath.mpf("1e-10"),
                    witness)


def check_m06(ctx):
    params = ctx.mellin_params()
    decays = {k: kernel_decay(MBKernel(k, params)) for k in ctx.settings["mellin"]["k_values"]}
    failing = [k for k, report in decays.items() if not report["superlinear"]]
    slopes = decays[ctx.settings["mellin"]["k_values"][0]]["slopes"]
    return _outcome("M06", "kernel decays superlinearly along the real axis", len(failing), 1,
                    f"slopes k=1: {', '.join(fmt(s, 6) for s in slopes)}" if not failing else f"k={failing[0]}")


# Matrix suite

def check_x01(ctx):
    params = ctx.params
    settings = ctx.settings["matrix"]
    contour = ctx.contour()
    table = RhoTable(params)
    y = to_mpf(parse_rational(settings["y"]))
    worst, witness = mpmath.mpf(0), None
    for n in settings["grid_n"]:
        kernel = MBKernel(n, params, tol=contour.tol * 1e-6)
        with params.workprec(16):
            argument = mpmath.exp(y)
            weights = [MellinWeight.for_argument(argument, 1, m, ctx.mellin_orientation) for m in settings["grid_m"]]
        quadrature = contour_integrals(kernel, contour, weights).values
        for m, value in zip(settings["grid_m"], quadrature):
            series = f_derivative(n, y, m, "series", params, table=table)
            error = relative_error(value, series)
            if error > worst:
                worst, witness = error, f"n={n}, m={m}"
    with params.workprec(16):
        direct = mpmath.fsum(j * phi_coefficient(1, j, table) for j in range(1, 80))
        error = relative_error(f_derivative(1, 0, 1, "series", params, table=table), direct)
    if error > worst:
        worst, witness = error, "n=1, m=1, y=0 termwise sum"
    return _outcome("X01", "f_n derivatives: series vs quadrature", worst, mpmath.mpf("1e-8"), witness)


def check_x02(ctx):
    params = ctx.params
    table = RhoTable(params)
    worst, witness = mpmath.mpf(0), None
    for sample in (ctx.settings["series"]["det_sample"], ctx.settings["series"]["det_sample_n3"]):
        x = TraceInvariants(tuple(sample))
        wronskian = _wronskian(ctx, x, table)
        permuted = _wronskian(ctx, TraceInvariants(tuple(reversed(sample))), table)
        det = tau_det_formula(x, params, ctx.det_calibration, table)
        error = max(relative_error(wronskian, det), relative_error(permuted, wronskian))
        if error > worst:
            worst, witness = error, f"n={len(sample)}"
    return _outcome("X02", "Wronskian equals determinant form and is symmetric", worst, mpmath.mpf("1e-9"), witness)


def check_x03(ctx):
    params = ctx.params
    settings = ctx.settings["matrix"]
    table = RhoTable(params)
    worst_ratio, witness, details = mpmath.mpf(0), None, []
    for sample, threshold in ((settings["n2"], mpmath.mpf("1e-6")), (settings["n3"], mpmath.mpf("1e-5"))):
        x = TraceInvariants(tuple(sample))
        model = tau_from_matrix_model(ExternalSource(x), params, ctx.contour(), table,
                                      orientation=ctx.wronskian_orientation, calibration=ctx.det_calibration)
        reference = tau_eval_numeric(x, settings["tau_n_max"], params, tail_tol=1e-9).value
        error = relative_error(model.tau, reference)
        details.append(f"n={len(sample)}: {fmt(error, 5)}")
        if error / threshold > worst_ratio:
            worst_ratio, witness = error / threshold, "; ".join(details)
    return _outcome("X03", "matrix-model tau equals tau_eval_numeric (residual relative to per-n threshold)",
                    worst_ratio, 1, "; ".join(details))


def check_x04(ctx):
    andreiev = identity_audits("andreiev_n2")
    hciz = identity_audits("hciz_n2")
    passed = andreiev["max_residual"] < 1e-10 and hciz["max_residual"] < 1e-8
    return _outcome("X04", "Andreiev and HCIZ identities at n = 2", max(andreiev["max_residual"], hciz["max_residual"]),
                    mpmath.mpf("1e-8"), f"andreiev {fmt(andreiev['max_residual'], 5)}, "
                                        f"hciz {fmt(hciz['max_residual'], 5)}", passed=passed)


SUITE_OF = {"E": "exact", "S": "series", "M": "mellin", "X": "matrix"}
CHECKS = {
    "exact": [("E01", check_e01), ("E02", check_e02), ("E03", check_e03), ("E04", check_e04), ("E05", check_e05),
              ("E06", check_e06)],
    "series": [("S01", check_s01), ("S02", check_s02), ("S03", check_s03), ("S04", check_s04), ("S05", check_s05),
               ("S06", check_s06), ("S07", check_s07)],
    "mellin": [("M01", check_m01), ("M02", check_m02), ("M03", check_m03), ("M04", check_m04), ("M05", check_m05),
               ("M06", check_m06)],
    "matrix": [("X01", check_x01), ("X02", check_x02), ("X03", check_x03), ("X04", check_x04)],
}
CHECK_FUNCTIONS = {check_id: fn for suite in CHECKS.values() for check_id, fn in suite}


def run_check(check_id, ctx):
    """Runs one check by id; engine errors and crashes become an "error" result."""
    if check_id not in CHECK_FUNCTIONS:
        raise UsageError(f"unknown check '{check_id}'; known checks: {sorted(CHECK_FUNCTIONS)}")
    logger.info(f"Running check {check_id}")
    try:
        return CHECK_FUNCTIONS[check_id](ctx)
    except QHurwitzError as e:
        logger.error(f"Check {check_id} raised {type(e).__name__}: {e.message}")
        return CheckResult(check_id, SUITE_OF[check_id[0]], "raised " + type(e).__name__, "error",
                           witness=e.to_dict())
    except Exception as e:
        logger.exception(f"Check {check_id} crashed")
        return CheckResult(check_id, SUITE_OF[check_id[0]], "raised " + type(e).__name__, "error",
                           witness={"error": type(e).__name__, "message": str(e)})


def _run_check(item):
    return run_check(*item)


def merge_settings(overrides):
    settings = copy.deepcopy(DEFAULT_SETTINGS)
    for suite, values in (overrides or {}).items():
        if suite in settings and isinstance(values, dict):
            settings[suite].update(values)
    return settings


def parse_flags(pairs):
    flags = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"flag '{pair}' must be key=value")
        key, value = (part.strip() for part in pair.split("=", 1))
        if key not in FLAG_CHOICES:
            raise UsageError(f"unknown flag '{key}'; known flags: {sorted(FLAG_CHOICES)}")
        if value not in FLAG_CHOICES[key]:
            raise UsageError(f"flag {key} accepts {FLAG_CHOICES[key]}, got '{value}'")
        flags[key] = value
    return flags


def _calibrate(name, fn, *args):
    try:
        return fn(*args), None
    except QHurwitzError as e:
        logger.error(f"Calibration {name} failed: {e.message}")
        return calib.Calibration(name, f"error: {e.message}", {}), e.to_dict()


def _selected(calibrations, name, choices, default):
    for result in calibrations:
        if result.name == name and result.selected in choices:
            return result.selected
    return default


def run_verification(suite, params, settings=None, flags=None, jobs=None):
    """Runs the requested suites ("all" for every suite) and returns a VerificationReport.

    The calibrations run first; the checks then use whatever each one selected, falling back to the
    derived convention when a calibration errored or was not evaluated.
    """
    suites = list(VERIFY_SUITES) if suite == "all" else [suite]
    if any(name not in VERIFY_SUITES for name in suites):
        raise UsageError(f"suite must be one of {VERIFY_SUITES + ('all',)}, got '{suite}'")
    settings = settings or merge_settings(None)
    flags = flags or {}
    report = VerificationReport(suites, params.describe(), flags)
    table = RhoTable(params)

    calibrations = []
    for name, fn, args in (("beta-grading", calib.calibrate_grading, ()),
                           ("phi1-scaling", calib.calibrate_phi1_scaling, (params, "0.1", table))):
        result, error = _calibrate(name, fn, *args)
        calibrations.append(result)
        if error:
            report.errors.append(error)
    det_result, error = _calibrate("det-prefactor", calib.calibrate_determinant, params, table)
    det_calibration = DERIVED_CALIBRATION
    if error:
        report.errors.append(error)
        calibrations.append(det_result)
    else:
        det_result, det_calibration = det_result
        calibrations.append(det_result)
    wronskian, error = _calibrate("wronskian-constant", calib.calibrate_wronskian, params, det_calibration, table)
    calibrations.append(wronskian)
    if error:
        report.errors.append(error)

    base = SuiteContext(params, settings, flags)
    if {"mellin", "matrix"} & set(suites):
        mellin_params = base.mellin_params()
        for name, fn, args in (("mellin-orientation", calib.calibrate_mellin_orientation,
                                (mellin_params, base.contour())),
                               ("pole-set", calib.calibrate_pole_set, (mellin_params, 1, base.contour()))):
            result, error = _calibrate(name, fn, *args)
            calibrations.append(result)
            if error:
                report.errors.append(error)
    else:
        calibrations += [calib.not_evaluated("mellin-orientation"), calib.not_evaluated("pole-set")]
    report.calibrations = calibrations

    ctx = SuiteContext(
        params, settings, flags, det_calibration,
        grading=_selected(calibrations, "beta-grading", FLAG_CHOICES["beta-grading"], base.grading),
        phi1_scaling=_selected(calibrations, "phi1-scaling", SCALINGS, base.phi1_scaling),
        wronskian_orientation=_selected(calibrations, "wronskian-constant", WRONSKIAN_ORIENTATIONS,
                                        base.wronskian_orientation),
        mellin_orientation=_selected(calibrations, "mellin-orientation", ORIENTATIONS, base.mellin_orientation))
    items = [(check_id, ctx) for name in suites for check_id, _ in CHECKS[name]]
    report.checks = ordered_map(_run_check, items, jobs)
    logger.info(f"Verification {suite}: {sum(c.passed for c in report.checks)}/{len(report.checks)} checks passed")
    return report
