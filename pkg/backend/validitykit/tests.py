from django.test import SimpleTestCase
from django.urls import reverse

from .exceptions import CsvParseError, DegenerateClusterError, InvalidInputError, ValidityError
from .seeding import stream, replicate_seed


class ExceptionTests(SimpleTestCase):
    def test_codes_are_stable(self):
        self.assertEqual(InvalidInputError('x').code, 'E-INPUT')
        self.assertEqual(CsvParseError('bad', line=3).code, 'E-PARSE')
        self.assertTrue(issubclass(InvalidInputError, ValueError))

    def test_parse_error_names_line(self):
        err = CsvParseError('not a number', line=7)
        self.assertEqual(err.line, 7)
        self.assertIn('line 7', str(err))

    def test_degenerate_error_carries_k(self):
        err = DegenerateClusterError(2, 2).at_k(5)
        self.assertEqual((err.m, err.k_col, err.k), (2, 2, 5))
        self.assertIn('k=5', str(err))
        self.assertEqual(err.as_payload()['code'], 'E-DEGENERATE')
        self.assertIsInstance(err, ValidityError)


class SeedingTests(SimpleTestCase):
    def test_same_keys_same_draws(self):
        a = stream(11, 0).standard_normal(5)
        b = stream(11, 0).standard_normal(5)
        self.assertEqual(a.tolist(), b.tolist())

    def test_keys_separate_streams(self):
        a = stream(11, 1, 0).random(5)
        b = stream(11, 2, 0).random(5)
        self.assertNotEqual(a.tolist(), b.tolist())

    def test_replicate_seed(self):
        self.assertEqual(replicate_seed(100, 4), 104)


class RootViewTests(SimpleTestCase):
    def test_health_check(self):
        response = self.client.get(reverse('health-check'))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['status'], 'healthy')

    def test_api_root_lists_endpoints(self):
        response = self.client.get(reverse('api-root'))
        self.assertIn('analyze', response.json()['endpoints'])
