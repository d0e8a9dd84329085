"""source.format capability plugin."""

CAPABILITY_ID = "source.format"
ENTRY_POINT_MODULE = "capabilities.source_format.implementation"
ENTRY_POINT_ATTR = "format_sources"
