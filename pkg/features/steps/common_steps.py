from behave import then


@then('a "{error_name}" error is raised')
def step_error_raised(context, error_name):
    assert context.error is not None, f"expected {error_name}, nothing was raised"
    assert type(context.error).__name__ == error_name, \
        f"expected {error_name}, got {type(context.error).__name__}: {context.error.message}"


@then('no error is raised')
def step_no_error(context):
    assert context.error is None, f"unexpected {type(context.error).__name__}: {context.error.message}"
