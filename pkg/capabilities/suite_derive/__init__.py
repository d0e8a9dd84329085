"""suite.derive capability plugin."""

CAPABILITY_ID = "suite.derive"
ENTRY_POINT_MODULE = "capabilities.suite_derive.implementation"
ENTRY_POINT_ATTR = "derive_suite"
