import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from tests.generators import random_model
from tests.support import auction, marketplace
from workbench.errors import ModelError
from workbench.model import (
    effective_attributes,
    effective_methods,
    find_method,
    is_abstract_class,
    navigable_roles,
    resolve_method,
    role_info,
    validate_model,
)
from workbench.parser import parse_model


def _rules(text: str) -> set:
    return {f.rule for f in validate_model(parse_model(text)).findings}


class WellFormednessTests(unittest.TestCase):
    def test_fixture_models_are_clean(self):
        for model, _ in (auction(), marketplace()):
            report = validate_model(model)
            self.assertTrue(report.clean, [str(f) for f in report.findings])

    def test_duplicate_class(self):
        self.assertIn("duplicate-class", _rules("class A {}\nclass A {}"))

    def test_reserved_class_name(self):
        self.assertIn("reserved-class-name", _rules("class TESTER {}"))

    def test_unknown_superclass(self):
        self.assertIn("unknown-superclass", _rules("class A extends Missing {}"))

    def test_inheritance_cycle(self):
        self.assertIn("cycle-in-inheritance", _rules("class A extends B {}\nclass B extends A {}"))

    def test_duplicate_attribute_and_unknown_type(self):
        rules = _rules("class A {\n  attr x: Int\n  attr x: Thing\n}")
        self.assertIn("duplicate-attribute", rules)
        self.assertIn("unknown-type", rules)

    def test_shadowed_attribute(self):
        self.assertIn("shadowed-attribute", _rules("class A {\n  attr x: Int\n}\nclass B extends A {\n  attr x: Int\n}"))

    def test_abstract_method_rules(self):
        self.assertIn("missing-body", _rules("class A {\n  method m()\n}"))
        self.assertIn("abstract-with-body", _rules("class A {\n  abstract method m() {}\n}"))

    def test_override_signature_mismatch(self):
        text = (
            "class A {\n  method m(x: Int) {}\n}\n"
            "class B extends A {\n  method m(x: String) {}\n}"
        )
        self.assertIn("override-signature-mismatch", _rules(text))

    def test_statechart_rules(self):
        text = (
            "class A {\n  method go() {}\n  statechart {\n    initial S;\n    state T;\n"
            "    T -> U on go;\n    T -> T on stop;\n  }\n}"
        )
        rules = _rules(text)
        self.assertIn("unknown-state", rules)
        self.assertIn("unknown-trigger", rules)

    def test_association_rules(self):
        text = (
            "class A {\n  attr r: Int\n}\nclass B {}\n"
            "assoc x A.r 1 -- * B.r\nassoc x A.a 1 -- 1 Missing.b"
        )
        rules = _rules(text)
        self.assertIn("duplicate-role", rules)
        self.assertIn("duplicate-association", rules)
        self.assertIn("unknown-class", rules)

    def test_role_attribute_collision(self):
        text = "class A {\n  attr items: Int\n}\nclass B {}\nassoc own A.owner 1 -- * B.items"
        self.assertIn("role-attribute-collision", _rules(text))

    def test_duplicate_invariant(self):
        text = (
            "class A {\n  attr x: Int\n}\n"
            "invariant pos context A: self.x >= 0\ninvariant pos context A: self.x < 10"
        )
        self.assertIn("duplicate-invariant", _rules(text))

    def test_validation_reports_every_finding(self):
        text = "class A extends Missing {\n  attr x: Thing\n}\nclass A {}"
        self.assertGreaterEqual(len(validate_model(parse_model(text)).findings), 3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_generated_models_are_well_formed(self, seed):
        report = validate_model(random_model(random.Random(seed)))
        self.assertTrue(report.clean, [str(f) for f in report.findings])


class LookupTests(unittest.TestCase):
    def setUp(self):
        self.model, _ = marketplace()

    def test_effective_attributes_follow_inheritance(self):
        names = [a.name for a in effective_attributes(self.model, "Guest")]
        self.assertEqual(names[0], "email")
        self.assertIn("loginCount", names)

    def test_dynamic_dispatch_picks_nearest_declaration(self):
        owner, method = find_method(self.model, "Member", "checkPasswd")
        self.assertEqual(owner.name, "Member")
        self.assertTrue(method.is_query)
        self.assertIsNone(find_method(self.model, "Person", "checkPasswd"))

    def test_resolve_method_raises_for_unknown(self):
        with self.assertRaises(ModelError):
            resolve_method(self.model, "Person", "login")

    def test_effective_methods_include_inherited(self):
        self.assertEqual(set(effective_methods(self.model, "Guest")), {"checkPasswd", "login"})

    def test_roles_are_navigable_from_the_opposite_end(self):
        self.assertEqual([r.role for r in navigable_roles(self.model, "Auction")], ["bids"])
        info = role_info(self.model, "Bid", "auction")
        self.assertTrue(info.single)
        self.assertFalse(role_info(self.model, "Auction", "bids").single)

    def test_abstract_class_detection(self):
        model = parse_model("class A {\n  abstract method m()\n}\nclass B extends A {\n  method m() {}\n}")
        self.assertTrue(is_abstract_class(model, "A"))
        self.assertFalse(is_abstract_class(model, "B"))


if __name__ == "__main__":
    unittest.main()
