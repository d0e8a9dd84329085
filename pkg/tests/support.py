"""Paths and loaders for the fixture models shared by the tests."""
from __future__ import annotations

from pathlib import Path

from workbench.parser import load_model, load_script, load_suites, merge_suites

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
AUCTION = FIXTURES / "auction"
MARKETPLACE = FIXTURES / "marketplace"


def fixture(*parts: str) -> str:
    return str(FIXTURES.joinpath(*parts))


def auction():
    model = load_model(fixture("auction", "auction.agm"))
    return model, merge_suites(load_suites(model, [fixture("auction", "auction.agt")]))


def marketplace():
    model = load_model(fixture("marketplace", "marketplace.agm"))
    return model, merge_suites(load_suites(model, [fixture("marketplace", "marketplace.agt")]))


def marketplace_script(name: str):
    model, suite = marketplace()
    return model, suite, load_script(model, fixture("marketplace", name))
