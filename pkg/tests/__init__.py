"""Tests for the agm workbench."""
