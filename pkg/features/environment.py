import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from constants import DEFAULT_ENV, LOGGER_NAME  # noqa: E402
from qhurwitz.numeric import NumericParams  # noqa: E402
from runner import RunnerConfig, configure_logging  # noqa: E402
from Utility.frameworkDataContext import CustomContext  # noqa: E402

logger = logging.getLogger(LOGGER_NAME)


def before_all(context):
    configure_logging(context.config.userdata.get("log_level", "WARNING"), log_to_file=False)
    env = context.config.userdata.get("env", os.getenv("ENVIRONMENT", DEFAULT_ENV))
    context.runner_config = RunnerConfig(env)
    context.base_params = NumericParams.from_profile(context.runner_config.get("numeric", {}))
    logger.info(f"behave run on profile '{context.runner_config.env}': {context.base_params.describe()}")


def before_scenario(context, scenario):
    context.params = context.base_params
    context.error = None


def after_step(context, step):
    if step.status == "failed":
        logger.error(f"Step failed: {step.name}: {step.error_message}")


def after_scenario(context, scenario):
    if scenario.status == "failed":
        logger.error(f"Scenario '{scenario.name}' failed with params {context.params.describe()}")


def after_feature(context, feature):
    CustomContext().reset_run()
