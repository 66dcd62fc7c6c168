import io

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from validitykit.exceptions import CsvParseError, InvalidInputError
from .datasets import Dataset, read_csv_dataset
from .utils import DistanceMatrix, center_columns, principal_axes, squared_distance_matrix

IRIS_PETALS = settings.BASE_DIR / 'testdata' / 'iris_petals.csv'


def random_rotation(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


class DatasetTests(SimpleTestCase):
    def test_values_are_read_only(self):
        data = Dataset([[1.0, 2.0], [3.0, 4.0]])
        with self.assertRaises(ValueError):
            data.values[0, 0] = 5.0

    def test_non_finite_entry_names_row_and_column(self):
        with self.assertRaisesMessage(InvalidInputError, 'row 2, column 1'):
            Dataset([[1.0, 2.0], [np.nan, 4.0]])

    def test_one_dimensional_input_becomes_column(self):
        data = Dataset([0.0, 1.0, 10.0, 11.0])
        self.assertEqual((data.n, data.p), (4, 1))


class CsvIngestionTests(SimpleTestCase):
    def test_iris_petals_with_header(self):
        data = read_csv_dataset(IRIS_PETALS)
        self.assertEqual((data.n, data.p), (150, 2))
        self.assertEqual(data.columns, ('petal_length', 'petal_width'))
        self.assertEqual(data.values[50].tolist(), [4.7, 1.4])

    def test_headerless_file_and_blank_lines(self):
        data = read_csv_dataset(io.StringIO("1,2\n\n3,4\n5,6\n"), source='inline')
        self.assertEqual(data.values.tolist(), [[1, 2], [3, 4], [5, 6]])
        self.assertEqual(data.columns, ())

    def test_bad_cell_reports_line_number(self):
        with self.assertRaises(CsvParseError) as ctx:
            read_csv_dataset(io.StringIO("a,b\n1,2\n\n3,x\n"), source='inline')
        self.assertEqual(ctx.exception.line, 4)
        self.assertEqual(ctx.exception.code, 'E-PARSE')

    def test_empty_file(self):
        with self.assertRaises(CsvParseError):
            read_csv_dataset(io.StringIO(""), source='inline')

    def test_header_only(self):
        with self.assertRaises(CsvParseError):
            read_csv_dataset(io.StringIO("x,y\n"), source='inline')


class SquaredDistanceTests(SimpleTestCase):
    def test_four_points_on_a_line(self):
        dm = squared_distance_matrix(Dataset([0.0, 1.0, 10.0, 11.0]))
        self.assertEqual(dm.d2[0].tolist(), [0.0, 1.0, 100.0, 121.0])
        np.testing.assert_array_equal(dm.d2, dm.d2.T)
        self.assertTrue(np.all(np.diag(dm.d2) == 0))

    def test_identical_rows_are_at_zero(self):
        dm = squared_distance_matrix(Dataset([[1.0, 2.0], [3.0, 1.0], [1.0, 2.0]]))
        self.assertEqual(dm.d2[0, 2], 0.0)

    def test_iris_pair(self):
        dm = squared_distance_matrix(read_csv_dataset(IRIS_PETALS))
        self.assertEqual(dm.n, 150)
        self.assertAlmostEqual(dm.d2[0, 50], 12.33, places=9)

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((12, 3))
        moved = x @ random_rotation(rng, 3) + np.array([5.0, -2.0, 0.5])
        before = squared_distance_matrix(Dataset(x)).d2
        after = squared_distance_matrix(Dataset(moved)).d2
        np.testing.assert_allclose(after, before, rtol=1e-9, atol=1e-9 * before.max())

    def test_scaling_by_two_is_exact(self):
        x = np.random.default_rng(5).uniform(size=(9, 2))
        base = squared_distance_matrix(Dataset(x)).d2
        doubled = squared_distance_matrix(Dataset(2.0 * x)).d2
        np.testing.assert_array_equal(doubled, 4.0 * base)

    def test_euclidean_is_square_root(self):
        dm = squared_distance_matrix(Dataset([0.0, 3.0]))
        self.assertEqual(dm.euclidean()[0, 1], 3.0)

    def test_rejects_asymmetric_matrix(self):
        with self.assertRaises(InvalidInputError):
            DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))


class CenteringTests(SimpleTestCase):
    def test_single_row_centers_to_zero(self):
        self.assertEqual(center_columns(Dataset([[4.0, -1.0]])).values.tolist(), [[0.0, 0.0]])

    def test_column(self):
        self.assertEqual(center_columns(Dataset([1.0, 2.0, 3.0])).values.ravel().tolist(), [-1.0, 0.0, 1.0])

    def test_idempotent(self):
        data = Dataset(np.random.default_rng(1).uniform(size=(7, 3)))
        once = center_columns(data).values
        np.testing.assert_allclose(center_columns(center_columns(data)).values, once, atol=1e-15)


class PrincipalAxesTests(SimpleTestCase):
    def test_axis_aligned_data_gives_identity(self):
        data = Dataset([[3.0, 0.0], [-3.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        np.testing.assert_allclose(principal_axes(data), np.eye(2), atol=1e-12)

    def test_diagonal_line(self):
        data = center_columns(Dataset([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        rotation = principal_axes(data)
        np.testing.assert_allclose(rotation[:, 0], [2 ** -0.5, 2 ** -0.5], atol=1e-12)
        np.testing.assert_allclose(rotation.T @ rotation, np.eye(2), atol=1e-10)

    def test_orthonormal_on_random_data(self):
        data = center_columns(Dataset(np.random.default_rng(10).standard_normal((10, 3))))
        rotation = principal_axes(data)
        np.testing.assert_allclose(rotation.T @ rotation, np.eye(3), atol=1e-10)
        rotated = data.values @ rotation
        variances = rotated.var(axis=0)
        self.assertTrue(np.all(np.diff(variances) <= 1e-12))

    def test_rank_deficient_input_is_completed(self):
        data = center_columns(Dataset([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]))
        rotation = principal_axes(data)
        np.testing.assert_allclose(rotation.T @ rotation, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(rotation[:, 0], [1.0, 0.0, 0.0], atol=1e-12)

    def test_requires_centered_data(self):
        with self.assertRaises(InvalidInputError):
            principal_axes(Dataset([[1.0, 1.0], [2.0, 3.0]]))

    def test_requires_two_rows(self):
        with self.assertRaises(InvalidInputError):
            principal_axes(Dataset([[0.0, 0.0]]))
