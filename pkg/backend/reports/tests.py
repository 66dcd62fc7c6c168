import io
import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.files.uploadedfile import SimpleUploadedFile
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from django.urls import reverse
from rest_framework import status
from rest_framework.renderers import JSONRenderer
from rest_framework.test import APITestCase

from validitykit.exceptions import InvalidInputError
from geometry.datasets import Dataset, read_csv_dataset
from .report import CSV_COLUMNS, analyze
from .serializers import ValidityReportSerializer

IRIS = settings.BASE_DIR / 'testdata' / 'iris_petals.csv'
IRIS_K3_ROWS = [
    ['0.985', '0.004', '0.011'],
    ['0.040', '0.714', '0.246'],
    ['0.036', '0.092', '0.872'],
]


def run(command, *args, **options):
    stdout, stderr = io.StringIO(), io.StringIO()
    call_command(command, *args, stdout=stdout, stderr=stderr, **options)
    return stdout.getvalue(), stderr.getvalue()


class IrisReportTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.report = analyze(read_csv_dataset(IRIS), k_max=10, B=100, seed=settings.VALIDITY['SEED'])

    def test_selections(self):
        self.assertEqual(self.report.selected['phi'], 3)
        self.assertEqual(self.report.selected['silhouette'], 3)
        self.assertEqual(self.report.selected['gap_unif'], 4)
        self.assertEqual(self.report.selected['gap_pca'], 4)
        self.assertEqual(self.report.selected['ch'], 6)

    def test_phi_values(self):
        self.assertAlmostEqual(self.report.phi.delta_T_by_k[3], 0.935, delta=0.005)
        self.assertAlmostEqual(self.report.phi.phi1_by_k[3], 2.61, delta=0.02)

    def test_selected_k_within_range(self):
        for k in self.report.selected.values():
            self.assertTrue(1 <= k <= self.report.k_max)

    def test_csv_layout(self):
        frame = pd.read_csv(io.StringIO(self.report.to_csv()))
        self.assertEqual(list(frame.columns), CSV_COLUMNS)
        self.assertEqual(frame['k'].tolist(), list(range(1, 11)))
        self.assertTrue(pd.isna(frame.loc[0, 'phi1']))
        self.assertTrue(pd.isna(frame.loc[9, 'phi1']))
        self.assertTrue(pd.isna(frame.loc[0, 'silhouette']))
        self.assertFalse(pd.isna(frame.loc[0, 'gap_unif']))

    def test_json_round_trip(self):
        rendered = JSONRenderer().render(ValidityReportSerializer(self.report).data)
        self.assertEqual(JSONRenderer().render(json.loads(rendered)), rendered)
        self.assertEqual(json.loads(rendered)['selected']['phi'], 3)

    def test_threshold_changes_phi_family_only(self):
        data = read_csv_dataset(IRIS)
        thresholded = analyze(data, k_max=6, threshold=0.1, B=10, seed=1)
        plain = analyze(data, k_max=6, B=10, seed=1)
        self.assertEqual(thresholded.gap_uniform, plain.gap_uniform)
        self.assertEqual(thresholded.ch, plain.ch)
        self.assertEqual(thresholded.silhouette, plain.silhouette)
        self.assertEqual(thresholded.phi.threshold, 0.1)
        self.assertNotEqual(thresholded.phi.delta_T_by_k, plain.phi.delta_T_by_k)


class AnalyzeGuardTests(SimpleTestCase):
    def test_too_few_observations(self):
        with self.assertRaises(InvalidInputError):
            analyze(Dataset([0.0, 1.0, 2.0]), k_max=3)

    def test_k_max_above_n(self):
        with self.assertRaises(InvalidInputError):
            analyze(Dataset(np.arange(6.0)), k_max=6)


class AnalyzeCommandTests(SimpleTestCase):
    def test_csv_output(self):
        stdout, stderr = run('analyze', str(IRIS), kmax=5, bootstraps=10, format='csv')
        frame = pd.read_csv(io.StringIO(stdout))
        self.assertEqual(list(frame.columns), CSV_COLUMNS)
        self.assertEqual(len(frame), 5)
        self.assertIn(f"seed {settings.VALIDITY['SEED']}", stderr)

    def test_json_output_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'iris.json'
            run('analyze', str(IRIS), '--kmax', '5', '--bootstraps', '10', '--threshold', '--out', str(out))
            payload = json.loads(out.read_text())
        self.assertEqual(payload['threshold'], settings.VALIDITY['THRESHOLD'])
        self.assertEqual(payload['n'], 150)

    def test_empty_file(self):
        with tempfile.NamedTemporaryFile('w', suffix='.csv') as handle:
            with self.assertRaisesMessage(CommandError, '[E-PARSE]'):
                run('analyze', handle.name)

    def test_missing_file(self):
        with self.assertRaisesMessage(CommandError, '[E-INPUT]'):
            run('analyze', '/nonexistent/data.csv')


class MembershipCommandTests(SimpleTestCase):
    def test_iris_table(self):
        stdout, _ = run('membership', str(IRIS), k=3)
        lines = stdout.splitlines()
        rows = [line.split()[2:5] for line in lines if line.startswith('membership')]
        self.assertEqual(rows, IRIS_K3_ROWS)
        self.assertIn('delta_T = 0.935', stdout)

    def test_threshold_rows_sum_to_one(self):
        stdout, _ = run('membership', str(IRIS), '--k', '3', '--threshold', '--format', 'json')
        payload = json.loads(stdout)
        self.assertTrue(payload['thresholded'])
        for row in payload['delta_mk']:
            self.assertAlmostEqual(sum(row), 1.0, places=12)

    def test_single_cluster_rejected(self):
        with self.assertRaisesMessage(CommandError, '[E-K]'):
            run('membership', str(IRIS), k=1)

    def test_k_above_n(self):
        with self.assertRaisesMessage(CommandError, '[E-INPUT]'):
            run('membership', str(IRIS), k=150)


class SimulateCommandTests(SimpleTestCase):
    def test_writes_tally_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            stdout, _ = run('simulate', 'four-2d-n5', R=2, kmax=6, bootstraps=10, out=tmp)
            frame = pd.read_csv(Path(tmp) / 'four-2d-n5.csv', index_col=0)
            payload = json.loads((Path(tmp) / 'four-2d-n5.json').read_text())
        self.assertIn('four-2d-n5', stdout)
        self.assertEqual(len(frame), 6)
        self.assertEqual(list(frame.columns), ['1', '2', '3', '4', '5', '6', 'failures'])
        self.assertEqual(payload['R'], 2)
        self.assertEqual(payload['seed'], settings.VALIDITY['SEED'])
        self.assertEqual(payload['d_power'], 1)

    def test_criterion_options(self):
        with tempfile.TemporaryDirectory() as tmp:
            run('simulate', 'four-2d-n5', R=1, kmax=5, bootstraps=10, ch='as-printed', gap_dpower=2, out=tmp)
            payload = json.loads((Path(tmp) / 'four-2d-n5.json').read_text())
        self.assertEqual(payload['ch_formula'], 'as-printed')
        self.assertEqual(payload['d_power'], 2)

    def test_spec_file(self):
        spec = {'name': 'pair', 'kind': 'gaussian-mixture', 'dims': 2, 'sizes': [8, 8],
                'centers': [[0, 0], [9, 9]], 'sd': 0.5}
        with tempfile.TemporaryDirectory() as tmp:
            spec_path = Path(tmp) / 'pair.json'
            spec_path.write_text(json.dumps(spec))
            run('simulate', spec=str(spec_path), R=3, kmax=5, methods=['phi', 'silhouette'], out=tmp)
            frame = pd.read_csv(Path(tmp) / 'pair.csv', index_col=0)
        self.assertEqual(list(frame.index), ['phi ratio', 'Silhouette'])
        self.assertEqual(int(frame.loc['phi ratio', '2']), 3)

    def test_invalid_spec_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            spec_path = Path(tmp) / 'bad.json'
            spec_path.write_text(json.dumps({'name': 'bad', 'kind': 'gaussian-mixture', 'dims': 0, 'sizes': [3]}))
            with self.assertRaisesMessage(CommandError, 'dims:'):
                run('simulate', spec=str(spec_path), out=tmp)

    def test_unknown_scenario(self):
        with self.assertRaisesMessage(CommandError, '[E-INPUT] unknown scenario'):
            run('simulate', 'five-3d')

    def test_needs_scenario_or_spec(self):
        with self.assertRaises(CommandError):
            run('simulate')


class AnalyzeApiTests(APITestCase):
    def upload(self, content, name='data.csv'):
        return SimpleUploadedFile(name, content.encode(), content_type='text/csv')

    def test_analyze_upload(self):
        rows = '\n'.join(f'{x},{y}' for x, y in np.random.default_rng(3).uniform(size=(30, 2)))
        response = self.client.post(
            reverse('analyze'), {'file': self.upload('a,b\n' + rows), 'k_max': 5, 'bootstraps': 10},
            format='multipart',
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK, response.data)
        self.assertEqual(response.data['n'], 30)
        self.assertEqual(response.data['source'], 'data.csv')
        self.assertEqual(set(response.data['selected']), {'phi', 'gap_unif', 'gap_pca', 'ch', 'silhouette'})
        self.assertEqual(response.data['gap_pca']['d_power'], 1)

    def test_analyze_with_squared_dispersion(self):
        rows = '\n'.join(f'{x},{y}' for x, y in np.random.default_rng(4).uniform(size=(20, 2)))
        response = self.client.post(
            reverse('analyze'), {'file': self.upload('a,b\n' + rows), 'k_max': 4, 'bootstraps': 10, 'gap_d_power': 2},
            format='multipart',
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK, response.data)
        self.assertEqual(response.data['gap_uniform']['d_power'], 2)

    def test_parse_error(self):
        response = self.client.post(reverse('analyze'), {'file': self.upload('1,2\n3,x\n')}, format='multipart')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['code'], 'E-PARSE')
        self.assertIn('line 2', response.data['error'])

    def test_missing_file(self):
        response = self.client.post(reverse('analyze'), {}, format='multipart')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('file', response.data)
