import logging
import os
import uuid
from datetime import datetime

from jinja2 import Environment, FileSystemLoader

from constants import HTML_REPORT_TEMPLATE, LOGGER_NAME, PROJECT_NAME, REPORTS_DIR, TEMPLATES_DIR

logger = logging.getLogger(LOGGER_NAME)

# Configure the Jinja2 environment and load templates
template_loader = FileSystemLoader(searchpath=TEMPLATES_DIR)
template_env = Environment(loader=template_loader, autoescape=True)


def handle_none_values(value):
    """Handles None and empty data gracefully."""
    if value is None:
        return 'N/A'
    elif isinstance(value, (dict, list)) and len(value) == 0:
        return 'No Data Available'
    return value


def summarize_checks(checks):
    counts = {"pass": 0, "fail": 0, "error": 0}
    for check in checks:
        counts[check["status"]] = counts.get(check["status"], 0) + 1
    counts["total"] = len(checks)
    return counts


def render_verification_report(report, metadata=None, automation_run_id=None, date_format="%Y-%m-%d %H:%M:%S"):
    """HTML text for a verification report dictionary."""
    automation_run_id = automation_run_id or str(uuid.uuid4())
    template = template_env.get_template(HTML_REPORT_TEMPLATE)
    checks = [dict(check, witness=handle_none_values(check.get("witness"))) for check in report["checks"]]
    return template.render(
        project_name=PROJECT_NAME,
        report=report,
        checks=checks,
        summary=summarize_checks(checks),
        metadata=metadata or {},
        report_generated_date=datetime.now().strftime(date_format),
        automation_run_id=automation_run_id,
    )


def generate_html_report(report, out_path=None, metadata=None, automation_run_id=None):
    """Writes the rendered report; without a path it goes under reports/ with a timestamped name."""
    html_output = render_verification_report(report, metadata, automation_run_id)
    if out_path is None:
        out_path = os.path.join(REPORTS_DIR, f"verification_report_{datetime.now().strftime('%Y%m%d%H%M%S')}.html")
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, 'w', encoding='utf-8') as file:
        file.write(html_output)
    logger.info(f"HTML report generated at: {out_path}")
    return out_path
