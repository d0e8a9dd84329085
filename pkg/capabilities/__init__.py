"""Workbench capability plugins, one per command.

Each subdirectory is a capability plugin containing:
- contract.v1.json   : canonical contract (JSON Schema)
- __init__.py        : entry point declaration
- implementation.py  : surface-agnostic implementation on top of `workbench`
- README.md          : capability documentation
"""
