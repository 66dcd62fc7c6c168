from django.conf import settings
from django.core.management.base import BaseCommand
from rest_framework.renderers import JSONRenderer

from validitykit.exceptions import ValidityError
from indices.utils import CH_FORMULAS, CH_STANDARD, DISPERSION_POWERS
from reports.report import analyze
from reports.serializers import ValidityReportSerializer
from ._common import add_threshold_argument, command_error, load_dataset, write_output


class Command(BaseCommand):
    help = 'Per-k validity report (delta_T, phi ratio, GAP, CH, silhouette) for a numeric CSV file'

    def add_arguments(self, parser):
        defaults = settings.VALIDITY
        parser.add_argument('csv_path')
        parser.add_argument('--kmax', type=int, default=defaults['K_MAX'])
        add_threshold_argument(parser)
        parser.add_argument('--bootstraps', type=int, default=defaults['BOOTSTRAPS'])
        parser.add_argument('--seed', type=int, default=defaults['SEED'])
        parser.add_argument('--ch', choices=CH_FORMULAS, default=CH_STANDARD)
        parser.add_argument('--gap-dpower', type=int, choices=DISPERSION_POWERS, default=defaults['GAP_D_POWER'])
        parser.add_argument('--format', choices=['json', 'csv'], default='json')
        parser.add_argument('--out', default=None)

    def handle(self, *args, **options):
        try:
            data = load_dataset(options['csv_path'])
            report = analyze(
                data,
                k_max=options['kmax'],
                threshold=options['threshold'],
                B=options['bootstraps'],
                seed=options['seed'],
                ch_formula=options['ch'],
                clamp=settings.VALIDITY['DELTA_T_CLAMP'],
                d_power=options['gap_dpower'],
            )
        except ValidityError as e:
            raise command_error(e) from e

        self.stderr.write(f"seed {report.seed}")
        if options['format'] == 'csv':
            text = report.to_csv()
        else:
            text = JSONRenderer().render(ValidityReportSerializer(report).data).decode() + '\n'
        write_output(self, text, options['out'])
