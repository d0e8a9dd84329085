"""MCP adapter for workbench capabilities."""
