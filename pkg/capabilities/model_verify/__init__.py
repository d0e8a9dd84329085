"""model.verify capability plugin."""

CAPABILITY_ID = "model.verify"
ENTRY_POINT_MODULE = "capabilities.model_verify.implementation"
ENTRY_POINT_ATTR = "verify_model"
