import argparse
import logging
import os
import sys
import uuid
from dataclasses import dataclass, field
from datetime import datetime

from constants import (DEFAULT_D_MAX, DEFAULT_ENV, DEFAULT_N_MAX_EXACT, DEFAULT_N_MAX_NUMERIC, DEFAULT_ORDER_OFFSET,
                       DEV_CONFIG_FILE, FRAMEWORK_CONFIG_FILE, LOGGER_NAME, LOGGING_FORMAT, LOGGING_LEVEL, LOGS_DIR,
                       N_BRUTE, OUTPUT_FORMATS, QA_CONFIG_FILE, SMOKE_CONFIG_FILE, VERIFY_SUITES)
from clients.JsonClient import SimpleJSONClient
from clients.YAMLClient import FRAMEWORK_SCHEMA, PROFILE_SCHEMA, YAMLClient
from qhurwitz.basis import DERIVED_CALIBRATION, RhoTable, phi_series_eval, tau_det_formula
from qhurwitz.errors import QHurwitzError, UsageError
from qhurwitz.exactalg import exact_str
from qhurwitz.hurwitz import (HURWITZ_METHODS, WEIGHT_MODES, WeightParams, generic_weighted_hurwitz, hurwitz_table,
                              pure_hurwitz, quantum_weighted_hurwitz)
from qhurwitz.matrixmodel import AUDITS, ExternalSource, identity_audits, tau_from_matrix_model, tau_wronskian
from qhurwitz.mellin import ORIENTATIONS, ContourSpec, MBKernel, phi_mellin_eval
from qhurwitz.numeric import NumericParams, configure_parallelism, fmt, parse_rational, to_mpf
from qhurwitz.partitions import Partition, ProfileList, riemann_hurwitz_genus
from qhurwitz.tau import TraceInvariants, tau_eval_numeric, tau_powersum_series, tau_schur_series
from qhurwitz.verification import merge_settings, parse_flags, run_verification
from Utility.frameworkDataContext import CustomContext
from Utility.HTMLReportGenerator import generate_html_report

RUN_ID = str(uuid.uuid4())
RUN_START_TIMESTAMP = datetime.now().strftime('%Y-%m-%d_%H-%M-%S')
LOG_FILE_NAME = f"qhurwitz_run_{RUN_START_TIMESTAMP}.log"

logger = logging.getLogger(LOGGER_NAME)


def configure_logging(log_level=LOGGING_LEVEL, log_to_file=True, log_format=LOGGING_FORMAT):
    run_logger = logging.getLogger(LOGGER_NAME)
    try:
        if run_logger.hasHandlers():
            return run_logger
        formatter = logging.Formatter(log_format)
        if log_to_file:
            os.makedirs(LOGS_DIR, exist_ok=True)
            file_handler = logging.FileHandler(os.path.join(LOGS_DIR, LOG_FILE_NAME))
            file_handler.setFormatter(formatter)
            run_logger.addHandler(file_handler)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        run_logger.addHandler(console_handler)
        run_logger.setLevel(log_level)
        run_logger.info(f"Run started with Run ID: {RUN_ID}, log level: {log_level}")
        return run_logger
    except OSError as e:
        print(f"Error configuring logging: {str(e)}", file=sys.stderr)
        raise


class RunnerConfig:
    """Framework settings plus the numeric profile of one environment."""

    env_config_map = {
        "dev": DEV_CONFIG_FILE,
        "qa": QA_CONFIG_FILE,
        "smoke": SMOKE_CONFIG_FILE,
    }

    def __init__(self, env=DEFAULT_ENV):
        self.env = env
        self.framework = YAMLClient(FRAMEWORK_CONFIG_FILE)
        self.framework.validate(FRAMEWORK_SCHEMA)
        self.profile = self.load_environment_config(env)

    def load_environment_config(self, env):
        config_file = self.env_config_map.get(str(env).lower(), DEV_CONFIG_FILE)
        if config_file != self.env_config_map.get(str(env).lower()):
            logger.warning(f"Unknown environment '{env}'. Defaulting to 'dev'. Using configuration file: {config_file}")
            self.env = "dev"
        else:
            logger.info(f"Loading configuration for environment '{env}' from {config_file}")
        profile = YAMLClient(config_file)
        profile.validate(PROFILE_SCHEMA)
        return profile

    def get(self, path, default=None):
        return self.profile.get(path, default)


@dataclass
class RunConfig:
    command: str
    subcommand: str
    params: NumericParams
    limits: dict = field(default_factory=dict)
    output_format: str = "json"
    out: str = None
    options: dict = field(default_factory=dict)
    contour: ContourSpec = None
    settings: dict = None
    flags: dict = field(default_factory=dict)
    jobs: int = None
    env: str = DEFAULT_ENV

    def option(self, name, default=None):
        value = self.options.get(name)
        return default if value is None else value

    def required(self, name, flag=None):
        value = self.options.get(name)
        if value is None:
            raise UsageError(f"{self.command} {self.subcommand} needs --{flag or name}")
        return value

    @property
    def label(self):
        return f"{self.command} {self.subcommand}".strip()


def _limits(profile):
    return {
        "n_max_exact": int(profile.get("limits.n_max_exact", DEFAULT_N_MAX_EXACT)),
        "n_max_numeric": int(profile.get("limits.n_max_numeric", DEFAULT_N_MAX_NUMERIC)),
        "order_offset": int(profile.get("limits.order_offset", DEFAULT_ORDER_OFFSET)),
        "d_max": int(profile.get("limits.d_max", DEFAULT_D_MAX)),
        "n_brute": int(profile.get("limits.n_brute", N_BRUTE)),
    }


def build_run_config(args, runner_config):
    profile = runner_config.profile
    params = NumericParams.from_profile(
        profile.get("numeric", {}),
        q=parse_rational(args.q) if args.q is not None else None,
        beta=parse_rational(args.beta) if args.beta is not None else None,
        precision_bits=args.precision,
    )
    contour_defaults = profile.get("contour", {})
    contour_kwargs = {"tol": float(contour_defaults.get("tol", 1e-14)),
                      "shape": contour_defaults.get("shape", "rectangle")}
    if args.contour:
        contour = ContourSpec.parse(args.contour, **contour_kwargs)
    else:
        contour = ContourSpec(delta=float(contour_defaults.get("delta", 0.25)),
                              nodes_per_unit=int(contour_defaults.get("nodes_per_unit", 48)), **contour_kwargs)
    settings = merge_settings(profile.get("verification", {}))
    settings["mellin"]["contour"] = {"delta": contour.delta, "nodes_per_unit": contour.nodes_per_unit,
                                     "tol": contour.tol, "shape": contour.shape}
    options = {key: getattr(args, key, None)
               for key in ("mu", "d", "n", "profiles", "x", "k", "nmax", "order", "dmax", "method", "basis", "via",
                           "orientation", "suite", "audit", "c", "mode")}
    framework = runner_config.framework
    jobs = args.jobs
    if jobs is None and not framework.get("framework.parallel_run", True):
        jobs = 1
    return RunConfig(args.command, getattr(args, "subcommand", "") or "", params, _limits(profile), args.format,
                     args.out, options, contour, settings, parse_flags(args.flag), jobs, runner_config.env)


def _check_limit(value, limit, name):
    if value > limit:
        raise UsageError(f"{name}={value} exceeds the configured limit {limit}")


# hurwitz

def cmd_hurwitz(config):
    """Pure, quantum-weighted and generic weighted Hurwitz numbers; `table` for every mu of N."""
    method = config.option("method", "character")
    n_brute = config.limits["n_brute"]
    if config.subcommand == "pure":
        profiles = ProfileList.parse(config.required("profiles"))
        value = pure_hurwitz(profiles, method, n_brute)
        return {"profiles": str(profiles), "n": profiles.weight, "value": exact_str(value), "method": method}
    if config.subcommand == "quantum":
        mu = Partition.parse(config.required("mu"))
        d = int(config.option("d", 0))
        result = quantum_weighted_hurwitz(mu, d, method, n_brute)
        payload = result.to_json()
        payload["genus"] = riemann_hurwitz_genus(mu.weight, mu, d)
        return payload
    if config.subcommand == "weighted":
        mu = Partition.parse(config.required("mu"))
        d = int(config.option("d", 0))
        c = tuple(parse_rational(item) for item in config.required("c").split(","))
        result = generic_weighted_hurwitz(mu, d, WeightParams(c, config.option("mode", "G-product")), method, n_brute)
        return result.to_json()
    if config.subcommand == "table":
        n = int(config.required("n"))
        d_max = int(config.option("dmax", config.limits["d_max"]))
        _check_limit(n, config.limits["n_max_exact"], "n")
        rows = [result.to_json() for result in hurwitz_table(n, d_max, method, n_brute)]
        return {"n": n, "d_max": d_max, "rows": rows}
    raise UsageError(f"unknown hurwitz subcommand '{config.subcommand}'")


# tau

def cmd_tau(config):
    if config.subcommand == "coeffs":
        n_max = int(config.option("nmax", config.limits["n_max_exact"]))
        order = int(config.option("order", n_max + config.limits["order_offset"]))
        _check_limit(n_max, config.limits["n_max_exact"], "nmax")
        basis = config.option("basis", "schur")
        if basis == "schur":
            series = tau_schur_series(n_max, order, config.jobs)
        else:
            grading = config.flags.get("beta-grading", "calibrated")
            series = tau_powersum_series(n_max, order, grading=grading, n_brute=config.limits["n_brute"],
                                         jobs=config.jobs)
        return {"n_max": n_max, "order": order, "basis": basis, "coefficients": series.to_json(),
                "_rows": series.to_rows()}
    if config.subcommand == "eval":
        x = TraceInvariants.parse(config.required("x"))
        params = config.params
        via = config.option("via", "schur")
        payload = {"x": str(x), "n": x.n, "via": via}
        if via == "schur":
            n_max = int(config.option("nmax", config.limits["n_max_numeric"]))
            result = tau_eval_numeric(x, n_max, params, tail_tol=params.tol)
            payload.update(result.to_json())
        elif via == "det":
            with params.workprec():
                payload["value"] = fmt(tau_det_formula(x, params, DERIVED_CALIBRATION))
        elif via == "wronskian":
            with params.workprec():
                payload["value"] = fmt(tau_wronskian(ExternalSource(x), params))
        else:
            raise UsageError(f"tau eval --via must be schur, det or wronskian, got '{via}'")
        return payload
    raise UsageError(f"unknown tau subcommand '{config.subcommand}'")


# phi

def cmd_phi(config):
    k = int(config.required("k"))
    if k < 1:
        raise UsageError(f"k must be at least 1, got {k}")
    params = config.params
    with params.workprec():
        x = to_mpf(parse_rational(config.required("x")))
    if config.subcommand == "eval":
        value = phi_series_eval(k, x, params, RhoTable(params))
        return value.to_json(k, x)
    if config.subcommand == "mellin":
        kernel = MBKernel(k, params, tol=config.contour.tol * 1e-6)
        orientation = config.option("orientation", "reflected")
        result = phi_mellin_eval(k, x, config.contour, kernel, orientation=orientation, jobs=config.jobs)
        payload = {"k": k, "x": fmt(x, 20), "orientation": orientation}
        payload.update(result.to_json())
        return payload
    raise UsageError(f"unknown phi subcommand '{config.subcommand}'")


# matrixmodel

def cmd_matrixmodel(config):
    if config.subcommand == "eval":
        source = ExternalSource(TraceInvariants.parse(config.required("x")))
        result = tau_from_matrix_model(source, config.params, config.contour, jobs=config.jobs)
        payload = {"x": str(source.x), "n": source.n}
        payload.update(result.to_json())
        return payload
    if config.subcommand == "audit":
        report = identity_audits(config.option("audit", "hciz_n2"))
        cases = [{"case": case["case"], "lhs": fmt(case["lhs"], 25), "rhs": fmt(case["rhs"], 25),
                  "residual": fmt(case["residual"], 5)} for case in report["cases"]]
        return {"audit": report["audit"], "cases": cases, "max_residual": fmt(report["max_residual"], 5)}
    raise UsageError(f"unknown matrixmodel subcommand '{config.subcommand}'")


# verify

def cmd_verify(config):
    suite = config.option("suite", "all")
    report = run_verification(suite, config.params, config.settings, config.flags, config.jobs)
    context = CustomContext()
    context.reset_run()
    CustomContext.set_run_data("environment", config.env)
    CustomContext.set_run_data("suite", suite)
    for calibration in report.calibrations:
        context.record_calibration(calibration.name, calibration.selected)
        logger.info(f"Calibration {calibration.name}: {calibration.selected}")
    for check in report.checks:
        context.record_check(check.check_id, check.status)
        if not check.passed:
            logger.error(f"Check {check.check_id} {check.status}: {check.witness}")
    return report


def emit(config, payload, client=None):
    """Renders a command payload in the requested format and returns the exit code."""
    client = client or SimpleJSONClient()
    if config.command == "verify":
        document = payload.to_json()
        client.validate_json_schema(document)
        exit_code = payload.exit_code
        if config.output_format == "html":
            metadata = {"Environment": CustomContext.get_run_data("environment"),
                        "Suite": CustomContext.get_run_data("suite")}
            generate_html_report(document, config.out, metadata=metadata, automation_run_id=RUN_ID)
            return exit_code
        if config.output_format == "csv":
            rows = [{key: check[key] for key in ("id", "suite", "status", "residual", "threshold")}
                    for check in document["checks"]]
            client.write_output(client.to_csv(rows), config.out)
            return exit_code
        client.write_output(client.dumps(document), config.out)
        return exit_code

    rows = payload.pop("_rows", None)
    if config.output_format == "html":
        raise UsageError("--format html is only available for verify")
    if config.output_format == "csv":
        if rows is None:
            rows = payload.get("rows") or [{key: value for key, value in payload.items()
                                            if not isinstance(value, (dict, list))}]
        client.write_output(client.to_csv(rows), config.out)
        return 0
    client.write_output(client.dumps(client.with_schema(config.label, payload)), config.out)
    return 0


COMMANDS = {
    "hurwitz": cmd_hurwitz,
    "tau": cmd_tau,
    "phi": cmd_phi,
    "matrixmodel": cmd_matrixmodel,
    "verify": cmd_verify,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--env', type=str, default=None,
                        help='Profile to load: dev, qa or smoke (default: ENVIRONMENT or dev)')
    common.add_argument('--q', type=str, help='q in (0, 1) as an exact rational, e.g. 1/2')
    common.add_argument('--beta', type=str, help='beta < 0 as an exact rational, e.g. -3/10')
    common.add_argument('--precision', type=int, help='working precision in bits')
    common.add_argument('--nmax', type=int, help='largest |lambda| in series and sums')
    common.add_argument('--order', type=int, help='beta-order of exact series (default nmax + offset)')
    common.add_argument('--dmax', type=int, help='largest total colength d')
    common.add_argument('--contour', type=str, help='delta,left,smax,nodes with auto for left/smax')
    common.add_argument('--format', type=str, choices=OUTPUT_FORMATS, default='json', help='output format')
    common.add_argument('--out', type=str, help='output file (default: stdout)')
    common.add_argument('--flag', action='append', default=[], help='key=value switch, e.g. beta-grading=literal')
    common.add_argument('--jobs', type=int, help='worker processes (capped by QHURWITZ_THREADS)')

    parser = argparse.ArgumentParser(prog="runner.py", description="Quantum weighted Hurwitz numbers and tau-functions.")
    commands = parser.add_subparsers(dest="command", required=True)

    hurwitz = commands.add_parser("hurwitz", help="Hurwitz numbers").add_subparsers(dest="subcommand", required=True)
    for name in ("pure", "quantum", "weighted", "table"):
        sub = hurwitz.add_parser(name, parents=[common])
        sub.add_argument('--method', choices=HURWITZ_METHODS, default="character")
        sub.add_argument('--mu', type=str, help='partition, parts comma-separated')
        sub.add_argument('--d', type=int, help='total colength')
        sub.add_argument('--n', type=int, help='N for the table')
        sub.add_argument('--profiles', type=str, help='profiles separated by ";", e.g. "2,1;2,1"')
        sub.add_argument('--c', type=str, help='weight parameters c_1,c_2,... (weighted)')
        sub.add_argument('--mode', choices=WEIGHT_MODES, default="G-product")

    tau = commands.add_parser("tau", help="tau-function").add_subparsers(dest="subcommand", required=True)
    coeffs = tau.add_parser("coeffs", parents=[common])
    coeffs.add_argument('--basis', choices=("schur", "powersum"), default="schur")
    evaluate = tau.add_parser("eval", parents=[common])
    evaluate.add_argument('--x', type=str, required=True, help='eigenvalues x_1,...,x_n')
    evaluate.add_argument('--via', choices=("schur", "det", "wronskian"), default="schur")

    phi = commands.add_parser("phi", help="adapted basis").add_subparsers(dest="subcommand", required=True)
    for name in ("eval", "mellin"):
        sub = phi.add_parser(name, parents=[common])
        sub.add_argument('--k', type=int, required=True)
        sub.add_argument('--x', type=str, required=True)
        if name == "mellin":
            sub.add_argument('--orientation', choices=ORIENTATIONS, default="reflected")

    matrix = commands.add_parser("matrixmodel", help="matrix integral").add_subparsers(dest="subcommand",
                                                                                        required=True)
    matrix_eval = matrix.add_parser("eval", parents=[common])
    matrix_eval.add_argument('--x', type=str, required=True)
    matrix_audit = matrix.add_parser("audit", parents=[common])
    matrix_audit.add_argument('--audit', choices=AUDITS, default="hciz_n2")

    verify = commands.add_parser("verify", parents=[common], help="run verification suites")
    verify.add_argument('--suite', choices=VERIFY_SUITES + ("all",), default="all")
    return parser


def main(argv=None, client=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    env = args.env or os.getenv("ENVIRONMENT", DEFAULT_ENV)
    try:
        framework = YAMLClient(FRAMEWORK_CONFIG_FILE)
        logging_config = framework.get("logging_config", {})
        configure_logging(framework.get("framework.log_level", LOGGING_LEVEL),
                          bool(logging_config.get("log_to_file", True)),
                          logging_config.get("log_format", LOGGING_FORMAT))
        configure_parallelism(framework.get("framework.max_parallel_jobs", 1))
        runner_config = RunnerConfig(env)
        config = build_run_config(args, runner_config)
        logger.info(f"Running {config.label} with {config.params.describe()}")
        with config.params.workprec():
            payload = COMMANDS[config.command](config)
            exit_code = emit(config, payload, client)
    except QHurwitzError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        client = client or SimpleJSONClient()
        print(client.dumps(client.with_schema(args.command, {"error": e.to_dict()})), end="")
        return e.exit_code
    if exit_code == 0:
        logger.info(f"{args.command} finished with Exit Code 0.")
    else:
        logger.error(f"{args.command} finished with Exit Code {exit_code}.")
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
