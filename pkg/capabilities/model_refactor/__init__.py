"""model.refactor capability plugin."""

CAPABILITY_ID = "model.refactor"
ENTRY_POINT_MODULE = "capabilities.model_refactor.implementation"
ENTRY_POINT_ATTR = "refactor_model"
