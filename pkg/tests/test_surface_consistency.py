"""Plugin structure and the agreement between contracts, the CLI and the plugins."""
from __future__ import annotations

import importlib
import json
import unittest
from pathlib import Path

from jsonschema import validators

from core import cli
from core.registry import PLUGINS

CAPABILITIES_DIR = Path(__file__).resolve().parents[1] / "capabilities"
README_SECTIONS = ("## Description", "## Non-goals", "## Deterministic behavior")


def _capability_dirs() -> list[Path]:
    return sorted(d for d in CAPABILITIES_DIR.iterdir() if d.is_dir() and (d / "contract.v1.json").is_file())


def _contract(cap_dir: Path) -> dict:
    return json.loads((cap_dir / "contract.v1.json").read_text(encoding="utf-8"))


class PluginLayoutTests(unittest.TestCase):
    def test_every_plugin_has_its_files_and_readme_sections(self) -> None:
        for cap_dir in _capability_dirs():
            with self.subTest(capability=cap_dir.name):
                for name in ("__init__.py", "implementation.py", "README.md"):
                    self.assertTrue((cap_dir / name).is_file(), f"{cap_dir.name}: missing {name}")
                readme = (cap_dir / "README.md").read_text(encoding="utf-8")
                self.assertTrue(readme.startswith(f"# {_contract(cap_dir)['name']}\n"))
                for section in README_SECTIONS:
                    self.assertIn(section, readme, f"{cap_dir.name}: README lacks {section}")

    def test_directory_names_follow_capability_ids(self) -> None:
        for cap_dir in _capability_dirs():
            with self.subTest(capability=cap_dir.name):
                self.assertEqual(_contract(cap_dir)["name"].replace(".", "_"), cap_dir.name)

    def test_declarations_match_contracts(self) -> None:
        for cap_dir in _capability_dirs():
            with self.subTest(capability=cap_dir.name):
                mod = importlib.import_module(f"capabilities.{cap_dir.name}")
                self.assertEqual(mod.CAPABILITY_ID, _contract(cap_dir)["name"])
                entry = getattr(importlib.import_module(mod.ENTRY_POINT_MODULE), mod.ENTRY_POINT_ATTR, None)
                self.assertTrue(callable(entry), f"{cap_dir.name}: {mod.ENTRY_POINT_ATTR} is not callable")


class ContractTests(unittest.TestCase):
    def test_schemas_are_valid_and_closed(self) -> None:
        for cap_dir in _capability_dirs():
            contract = _contract(cap_dir)
            with self.subTest(capability=cap_dir.name):
                self.assertIn("title", contract["annotations"])
                for key in ("input_schema", "output_schema"):
                    schema = contract[key]
                    validators.validator_for(schema).check_schema(schema)
                self.assertFalse(contract["input_schema"].get("additionalProperties", True))
                self.assertIn("text", contract["output_schema"]["properties"])

    def test_every_capability_has_a_command(self) -> None:
        self.assertEqual(set(cli._SUCCEEDED), set(PLUGINS))
        commands = cli.build_parser()._subparsers._group_actions[0].choices
        self.assertEqual(len(commands), len(PLUGINS))

    def test_cli_payloads_satisfy_the_contracts(self) -> None:
        argvs = [
            ["check", "m.agm"],
            ["test", "m.agm", "t.agt", "--jobs", "2"],
            ["lint", "m.agm", "t.agt", "--threshold", "0.4"],
            ["refactor", "m.agm", "t.agt", "--script", "s.agr", "--out", "out"],
            ["verify", "m.agm", "t.agt", "--after", "n.agm"],
            ["fmt", "--check", "m.agm"],
            ["derive", "m.agm", "--class", "A", "--criterion", "paths", "--k", "3", "--out", "out"],
        ]
        for argv in argvs:
            with self.subTest(command=argv[0]):
                capability_id, payload = cli._payload(cli.build_parser().parse_args(argv))
                schema = PLUGINS[capability_id].contract["input_schema"]
                errors = list(validators.validator_for(schema)(schema).iter_errors(payload))
                self.assertEqual(errors, [])


if __name__ == "__main__":
    unittest.main()
