"""Adapters exposing workbench capabilities on other surfaces."""
