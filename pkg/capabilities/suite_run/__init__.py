"""suite.run capability plugin."""

CAPABILITY_ID = "suite.run"
ENTRY_POINT_MODULE = "capabilities.suite_run.implementation"
ENTRY_POINT_ATTR = "run_tests"
