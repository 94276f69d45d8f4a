import unittest

from stencilforge.datastructures import SymbolRegistry


class BaseTestCase(unittest.TestCase):
    maxDiff = None

    def setUp(self):
        self.registry = SymbolRegistry()

    def assert_text(self, expr, text):
        self.assertEqual(expr.to_text(), text)

