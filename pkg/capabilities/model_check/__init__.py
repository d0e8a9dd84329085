"""model.check capability plugin."""

CAPABILITY_ID = "model.check"
ENTRY_POINT_MODULE = "capabilities.model_check.implementation"
ENTRY_POINT_ATTR = "check_models"
