import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from tests.generators import pull_up_triple
from tests.support import AUCTION, auction, fixture, marketplace_script
from workbench.invariance import classify, compare_models, verify_invariance
from workbench.model import validate_model
from workbench.parser import load_model

MUTANTS = sorted((AUCTION / "mutants").glob("*.agm"))


def _verdicts(report):
    return {t.name: t.verdict for t in report.tests}


class ClassifyTests(unittest.TestCase):
    def test_verdict_table(self):
        self.assertEqual(classify("unchanged", "pass", "pass"), "invariant")
        self.assertEqual(classify("unchanged", "pass", "fail"), "broken")
        self.assertEqual(classify("unchanged", "fail", "pass"), "excluded")
        self.assertEqual(classify("unchanged", "error", "error"), "excluded")
        self.assertEqual(classify("adapted", "pass", "pass"), "adapted-pass")
        self.assertEqual(classify("adapted", None, "error"), "adapted-fail")
        self.assertEqual(classify("needs-attention", "pass", "pass"), "attention")


class ScriptInvarianceTests(unittest.TestCase):
    def test_pull_up_keeps_observations(self):
        report = verify_invariance(*marketplace_script("pull_up_name.agr"))
        self.assertEqual(
            _verdicts(report),
            {
                "bidExtendsClosingTime": "invariant",
                "guestLoginCounts": "invariant",
                "guestLogin": "adapted-pass",
                "memberCheck": "adapted-pass",
            },
        )
        self.assertEqual(report.gate, "pass")
        self.assertEqual(
            {t.name for t in report.tests if t.gating},
            {"bidExtendsClosingTime", "guestLoginCounts"},
        )

    def test_clones_are_reported_as_adapted_and_follow_their_origin(self):
        report = verify_invariance(*marketplace_script("pull_up_name_clone.agr"))
        clone = next(t for t in report.tests if t.name == "guestLogin_2")
        self.assertEqual((clone.before, clone.after, clone.verdict), (None, "pass", "adapted-pass"))
        self.assertFalse(clone.gating)
        self.assertEqual(report.gate, "pass")

    def test_renames_keep_observations(self):
        report = verify_invariance(*marketplace_script("renames.agr"))
        self.assertEqual(report.gate, "pass")
        self.assertNotIn("adapted-fail", _verdicts(report).values())

    def test_blocked_script_excludes_everything_and_fails_the_gate(self):
        report = verify_invariance(*marketplace_script("blocked_then_rename.agr"))
        self.assertEqual(report.blocked_at, 1)
        self.assertEqual(set(_verdicts(report).values()), {"excluded"})
        self.assertEqual(report.gate, "fail")
        self.assertIn("blocked at step 1\n", report.render())

    def test_report_shape(self):
        report = verify_invariance(*marketplace_script("pull_up_name.agr")).to_dict(generated_at="2026-01-01T00:00:00Z")
        self.assertEqual(report["gate"], "pass")
        self.assertIsNone(report["blocked_at"])
        self.assertEqual(report["generated_at"], "2026-01-01T00:00:00Z")
        self.assertEqual(
            set(report["tests"][0]),
            {"name", "category", "before", "after", "disposition", "verdict", "gating"},
        )


class CompareModelsTests(unittest.TestCase):
    def test_mutated_body_breaks_a_gating_test(self):
        model, suite = auction()
        mutated = load_model(fixture("auction", "auction_mutated.agm"))
        report = compare_models(model, mutated, suite)
        verdicts = _verdicts(report)
        self.assertEqual(verdicts["bidExtendsClosingTime"], "broken")
        self.assertEqual(verdicts["closeEndsAuction"], "invariant")
        self.assertEqual(verdicts["closingTimeNeverShrinks"], "invariant")
        self.assertEqual(report.gate, "fail")
        self.assertIn("broken bidExtendsClosingTime [acceptance] gating pass -> fail (unchanged)", report.render())

    def test_every_hand_written_mutant_fails_the_gate(self):
        model, suite = auction()
        self.assertEqual(len(MUTANTS), 10)
        for path in MUTANTS:
            with self.subTest(mutant=path.name):
                mutant = load_model(str(path))
                self.assertTrue(validate_model(mutant).clean)
                self.assertNotEqual(mutant, model)
                report = compare_models(model, mutant, suite)
                self.assertIn("broken", {t.verdict for t in report.tests if t.gating})
                self.assertEqual(report.gate, "fail")

    def test_identical_models_are_invariant(self):
        model, suite = auction()
        report = compare_models(model, model, suite, jobs=2)
        self.assertEqual(set(_verdicts(report).values()), {"invariant"})
        self.assertEqual(report.gate, "pass")


class PullUpPropertyTests(unittest.TestCase):
    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_applicable_pull_up_never_breaks_published_acceptance_tests(self, seed):
        model, step, suite = pull_up_triple(random.Random(seed))
        report = verify_invariance(model, suite, [step])
        self.assertIsNone(report.blocked_at)
        (entry,) = report.tests
        self.assertTrue(entry.gating)
        self.assertIn(entry.verdict, {"invariant", "adapted-pass"})
        self.assertEqual(report.gate, "pass")


if __name__ == "__main__":
    unittest.main()
