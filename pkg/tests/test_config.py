import tempfile
import unittest
from pathlib import Path

from workbench.config import Settings, load_settings
from workbench.errors import UsageError


class LoadSettingsTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _write(self, text):
        path = self.dir / "agm.yaml"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_defaults(self):
        settings = load_settings(env={})
        self.assertEqual(settings, Settings())
        self.assertEqual((settings.budget.max_steps, settings.budget.max_depth), (100000, 1000))

    def test_yaml_file_overrides_defaults(self):
        path = self._write(
            "budget:\n  max_steps: 500\nlint:\n  over_specification_threshold: 0.25\n"
            "runtime:\n  ignore_unexpected_events: true\nsuite:\n  jobs: 3\n"
        )
        settings = load_settings(path, env={})
        self.assertEqual(settings.max_steps, 500)
        self.assertEqual(settings.max_depth, 1000)
        self.assertEqual(settings.over_specification_threshold, 0.25)
        self.assertTrue(settings.ignore_unexpected_events)
        self.assertEqual(settings.jobs, 3)

    def test_environment_overrides_the_file(self):
        path = self._write("budget:\n  max_steps: 500\n  max_depth: 40\n")
        settings = load_settings(path, env={"AGM_BUDGET_STEPS": "77"})
        self.assertEqual((settings.max_steps, settings.max_depth), (77, 40))

    def test_config_location_from_environment(self):
        path = self._write("suite:\n  jobs: 2\n")
        self.assertEqual(load_settings(env={"AGM_CONFIG": path}).jobs, 2)

    def test_empty_file_keeps_defaults(self):
        self.assertEqual(load_settings(self._write(""), env={}), Settings())

    def test_cli_overrides_skip_unset_flags(self):
        settings = Settings(jobs=2).with_overrides(jobs=None, max_steps=10)
        self.assertEqual((settings.jobs, settings.max_steps), (2, 10))

    def test_invalid_documents(self):
        for text in ("budget:\n  max_steps: 0\n", "colour: blue\n", "lint:\n  over_specification_threshold: 2\n", "budget: [\n"):
            with self.subTest(text=text):
                with self.assertRaises(UsageError) as caught:
                    load_settings(self._write(text), env={})
                self.assertEqual(caught.exception.code, "invalid-config")

    def test_invalid_environment_values(self):
        for value in ("many", "0"):
            with self.subTest(value=value):
                with self.assertRaises(UsageError) as caught:
                    load_settings(env={"AGM_BUDGET_DEPTH": value})
                self.assertEqual(caught.exception.code, "invalid-config")

    def test_missing_files(self):
        missing = str(self.dir / "nowhere.yaml")
        with self.assertRaises(UsageError) as caught:
            load_settings(missing, env={})
        self.assertEqual(caught.exception.code, "missing-file")
        with self.assertRaises(UsageError) as caught:
            load_settings(env={"AGM_CONFIG": missing})
        self.assertEqual(caught.exception.code, "missing-file")


if __name__ == "__main__":
    unittest.main()
