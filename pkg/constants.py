import os

# Root of the project
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
PROJECT_NAME = "QHurwitz"

# Directories
REPORTS_DIR = os.path.join(BASE_DIR, "reports")  # JSON/CSV/HTML outputs written with --out
FEATURES_DIR = os.path.join(BASE_DIR, "features")  # behave feature files
STEPS_DIR = os.path.join(FEATURES_DIR, "steps")
TEMPLATES_DIR = os.path.join(BASE_DIR, "templates")  # Jinja2 report templates
LOGS_DIR = os.path.join(BASE_DIR, "logs")

# Default Environment (overridden by --env or the ENVIRONMENT variable)
DEFAULT_ENV = "dev"

# Paths to Configuration Files
CONFIG_DIR = os.path.join(BASE_DIR, "config")
FRAMEWORK_CONFIG_FILE = os.path.join(CONFIG_DIR, "Framework_Config.yaml")  # logging, parallelism, reports
DEV_CONFIG_FILE = os.path.join(CONFIG_DIR, "dev_config.yaml")  # fast desk profile
QA_CONFIG_FILE = os.path.join(CONFIG_DIR, "qa_config.yaml")  # acceptance profile
SMOKE_CONFIG_FILE = os.path.join(CONFIG_DIR, "smoke_config.yaml")  # reduced verification grids

# Logging Configuration
LOGGER_NAME = "QuantumHurwitzLogger"
LOGGING_LEVEL = "INFO"
LOGGING_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(module)s.%(funcName)s - Line: %(lineno)d - %(message)s"

# Parallel execution
THREADS_ENV_VAR = "QHURWITZ_THREADS"
MAX_PARALLEL_JOBS = 4

# Report settings
REPORT_SCHEMA_VERSION = 1
HTML_REPORT_TEMPLATE = "verification_report.html"
OUTPUT_FORMATS = ("json", "csv", "html")
VERIFY_SUITES = ("exact", "series", "mellin", "matrix")

# Numeric defaults (profiles in config/ override these)
DEFAULT_Q = "1/2"
DEFAULT_BETA = "-3/10"
DEFAULT_PRECISION_BITS = 256
DEFAULT_TOL = 1e-20
DEFAULT_SERIES_MAX_TERMS = 400
DEFAULT_N_MAX_EXACT = 8
DEFAULT_N_MAX_NUMERIC = 20
DEFAULT_ORDER_OFFSET = 4
DEFAULT_D_MAX = 4
N_BRUTE = 6
