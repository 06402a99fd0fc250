import contextlib
import io
import json
import os
import shlex
import shutil
import tempfile

import mpmath
from behave import when, then

import Utility.stepHelpers  # noqa: F401  registers the Tolerance step type
from clients.JsonClient import SimpleJSONClient
from runner import main


def _run(context, argv):
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        try:
            code = main(argv)
        except SystemExit as e:
            code = e.code
    output = buffer.getvalue()
    context.exit_code = code
    context.outputs = getattr(context, "outputs", []) + [output]
    context.output = output


def _document(context, index=-1):
    return json.loads(context.outputs[index])


@when('the command "{command}" is run')
def step_run_command(context, command):
    _run(context, shlex.split(command))


@when('the command "{command}" is run with the output written to a temporary file')
def step_run_command_to_file(context, command):
    directory = tempfile.mkdtemp(prefix="qhurwitz_")
    context.add_cleanup(shutil.rmtree, directory, ignore_errors=True)
    context.out_path = os.path.join(directory, "report.html")
    _run(context, shlex.split(command) + ["--out", context.out_path])


@then('the exit code is {code:d}')
def step_exit_code(context, code):
    assert context.exit_code == code, f"exit code {context.exit_code}, output:\n{context.output}"


@then('the JSON field "{path}" is numerically {expected:g} within {threshold:Tolerance}')
def step_json_numeric(context, path, expected, threshold):
    value = SimpleJSONClient().extract_value(_document(context), path)
    assert abs(mpmath.mpf(value) - expected) < threshold, f"{path} = {value}"


@then('the JSON field "{path}" is "{expected}"')
def step_json_field(context, path, expected):
    value = SimpleJSONClient().extract_value(_document(context), path)
    assert str(value) == expected, f"{path} = {value!r}"


@then('the coefficient list for mu "{mu}" is "{expected}"')
def step_coefficient_list(context, mu, expected):
    entry = SimpleJSONClient().find_item(_document(context)["coefficients"], {"mu": mu})
    assert entry["beta_series"] == expected.split(";"), entry


@then('the coefficient list for the empty partition is "{expected}"')
def step_empty_coefficient_list(context, expected):
    step_coefficient_list(context, "", expected)


@then('the last two outputs have the same "{field}"')
def step_same_field(context, field):
    assert _document(context, -2)[field] == _document(context, -1)[field]


@then('the last two outputs are identical')
def step_identical_outputs(context):
    assert context.outputs[-2] == context.outputs[-1]


@then('the output starts with the CSV header "{header}"')
def step_csv_header(context, header):
    assert context.output.splitlines()[0] == header, context.output[:80]


@then('the last three "{field}" fields agree within {threshold:Tolerance}')
def step_three_routes(context, field, threshold):
    values = [mpmath.mpf(_document(context, index)[field]) for index in (-3, -2, -1)]
    spread = max(values) - min(values)
    assert spread < threshold * max(abs(v) for v in values), f"{field} values {values}"


@then('every reported check passed')
def step_all_checks_passed(context):
    document = _document(context)
    failed = [check["id"] for check in document["checks"] if check["status"] != "pass"]
    assert not failed and document["passed"], f"failed checks {failed}"


@then('check "{check_id}" failed with a witness mentioning "{text}"')
def step_check_witness(context, check_id, text):
    check = SimpleJSONClient().find_item(_document(context)["checks"], {"id": check_id})
    assert check["status"] == "fail", check
    assert text in str(check["witness"]), check["witness"]


@then('the written report mentions "{first}" and "{second}"')
def step_report_mentions(context, first, second):
    with open(context.out_path, encoding="utf-8") as file:
        html = file.read()
    assert first in html and second in html


@then('the reported checks are "{ids}"')
def step_reported_checks(context, ids):
    assert [check["id"] for check in _document(context)["checks"]] == ids.split(","), context.output[:200]
