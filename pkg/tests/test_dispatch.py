import unittest

from core.dispatch import dispatch
from core.registry import PLUGINS
from tests.support import fixture


class DispatchTests(unittest.TestCase):
    def test_run_suite_success(self):
        payload = {"model": fixture("auction", "auction.agm"), "tests": [fixture("auction", "auction.agt")]}
        result = dispatch("suite.run", payload)
        self.assertTrue(result["ok"], result)
        output = result["result"]
        self.assertTrue(output["passed"])
        self.assertEqual(output["counts"], {"pass": 5, "fail": 0, "error": 0})
        self.assertIn("text", output)

    def test_run_suite_validation_error(self):
        result = dispatch("suite.run", {"model": fixture("auction", "auction.agm"), "tests": []})
        self.assertFalse(result["ok"], result)
        self.assertEqual(result["error"]["type"], "validation_error")

    def test_engine_errors_keep_their_code(self):
        result = dispatch("model.check", {"models": [fixture("auction", "nowhere.agm")]})
        self.assertFalse(result["ok"], result)
        self.assertEqual(result["error"]["type"], "missing-file")

    def test_blocked_script_details_are_json(self):
        payload = {
            "model": fixture("marketplace", "marketplace.agm"),
            "tests": [fixture("marketplace", "marketplace.agt")],
            "script": fixture("marketplace", "passwd_clash.agr"),
        }
        result = dispatch("model.verify", payload)
        self.assertTrue(result["ok"], result)
        self.assertEqual(result["result"]["blocked_at"], 1)
        self.assertEqual(result["result"]["steps"][0]["violations"][0]["condition"], "C1")

    def test_registry_holds_one_capability_per_command(self):
        self.assertEqual(
            sorted(PLUGINS),
            ["model.check", "model.refactor", "model.verify", "source.format", "suite.derive", "suite.lint", "suite.run"],
        )
        self.assertEqual(PLUGINS["suite.derive"].directory.name, "suite_derive")

    def test_unknown_capability(self):
        result = dispatch("model.explode", {})
        self.assertEqual(result["error"]["type"], "capability_not_found")


if __name__ == "__main__":
    unittest.main()
