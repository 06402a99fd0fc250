from behave import when, then

from Utility.HTMLReportGenerator import render_verification_report
from Utility.frameworkDataContext import CustomContext
from Utility.stepHelpers import assert_no_error, capture
from clients.JsonClient import SimpleJSONClient
from qhurwitz.verification import (SUITE_OF, SuiteContext, VerificationReport, merge_settings, parse_flags,
                                   run_check, run_verification)
from runner import RunnerConfig

SELECTIONS = {
    "grading": "grading",
    "phi1 scaling": "phi1_scaling",
    "Wronskian orientation": "wronskian_orientation",
    "Mellin orientation": "mellin_orientation",
}


def _profile_settings(env):
    return merge_settings(RunnerConfig(env).get("verification", {}))


def _record(report):
    run_context = CustomContext()
    run_context.reset_run()
    for calibration in report.calibrations:
        run_context.record_calibration(calibration.name, calibration.selected)
    for check in report.checks:
        run_context.record_check(check.check_id, check.status)


def _run_suite(context, suite, flags=None, settings=None):
    context.report = capture(context, lambda: run_verification(suite, context.params, settings, flags, jobs=1))
    if context.report is not None:
        _record(context.report)


@when('the verification flags "{text}" are parsed')
def step_parse_flags(context, text):
    context.flags = capture(context, lambda: parse_flags(text.split()))


@then('the parsed flag "{name}" is "{value}"')
def step_parsed_flag(context, name, value):
    assert context.flags[name] == value, context.flags


@when('the settings override "{path}" is set to {value:d}')
def step_settings_override(context, path, value):
    suite, key = path.split(".")
    context.settings = merge_settings({suite: {key: value}})


@then('the merged setting "{path}" is {value:d}')
def step_merged_setting(context, path, value):
    suite, key = path.split(".")
    assert context.settings[suite][key] == value, context.settings[suite]


@when('the "{suite}" suite is run with the flag "{flag}"')
def step_run_suite_with_flag(context, suite, flag):
    _run_suite(context, suite, parse_flags([flag]))


@when('the "{suite}" suite is run')
def step_run_suite(context, suite):
    _run_suite(context, suite)


@then('the calibration "{name}" selected "{selected}"')
def step_calibration(context, name, selected):
    assert_no_error(context)
    found = {c.name: c.selected for c in context.report.calibrations}
    assert found.get(name) == selected, found


@then('the checks "{ids}" all passed')
def step_checks_passed(context, ids):
    statuses = {check.check_id: check for check in context.report.checks}
    failing = {check_id: (statuses[check_id].status, statuses[check_id].witness)
               for check_id in ids.split(",") if not statuses[check_id].passed}
    assert not failing, failing


@then('the check "{check_id}" has status "{status}"')
def step_check_status(context, check_id, status):
    check = next(c for c in context.report.checks if c.check_id == check_id)
    assert check.status == status, (check.status, check.witness)


@then('the check "{check_id}" has a status')
def step_check_has_status(context, check_id):
    check = next(c for c in context.report.checks if c.check_id == check_id)
    assert check.status in ("pass", "fail"), (check.status, check.witness)


@then('the report exit code is {code:d}')
def step_report_exit_code(context, code):
    assert context.report.exit_code == code


@then('the report document matches the report schema')
def step_report_schema(context):
    document = context.report.to_json()
    SimpleJSONClient().validate_json_schema(document)
    assert [check["id"] for check in document["checks"]] == sorted(check["id"] for check in document["checks"])


@then('the run context records every check')
def step_run_context(context):
    recorded = CustomContext().check_results
    assert CustomContext().get_calibration("beta-grading") == "calibrated"
    assert all(check.check_id in recorded for check in context.report.checks)
    assert CustomContext().failed_checks() == sorted(c.check_id for c in context.report.checks if not c.passed)


@then('the HTML rendering lists check "{check_id}" as "{status}"')
def step_html_rendering(context, check_id, status):
    html = render_verification_report(context.report.to_json(), metadata={"Environment": "behave"})
    assert f"<td>{check_id}</td>" in html
    assert f'class="{status}">{status}</td>' in html


@when('the "{suite}" suite is run with the "{env}" profile settings')
def step_run_suite_with_profile(context, suite, env):
    _run_suite(context, suite, settings=_profile_settings(env))


@when('the check "{check_id}" is run with the {selection} "{value}"')
def step_run_check_with_selection(context, check_id, selection, value):
    ctx = SuiteContext(context.params, _profile_settings("smoke"), {}, **{SELECTIONS[selection]: value})
    result = run_check(check_id, ctx)
    context.report = VerificationReport([SUITE_OF[check_id[0]]], context.params.describe(), {}, checks=[result])


@then('the report lists the checks "{ids}"')
def step_report_lists(context, ids):
    assert sorted(check.check_id for check in context.report.checks) == sorted(ids.split(","))
