"""suite.lint capability plugin."""

CAPABILITY_ID = "suite.lint"
ENTRY_POINT_MODULE = "capabilities.suite_lint.implementation"
ENTRY_POINT_ATTR = "lint_tests"
