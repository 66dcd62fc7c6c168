import pandas as pd
from django.core.management.base import BaseCommand
from rest_framework.renderers import JSONRenderer

from validitykit.exceptions import InvalidInputError, UnsupportedKError, ValidityError
from geometry.utils import squared_distance_matrix
from linkage.utils import complete_linkage, cut
from membership.serializers import MembershipMatrixSerializer
from membership.utils import apply_threshold, membership_for
from ._common import add_threshold_argument, command_error, load_dataset, write_output


def membership_table(mm) -> str:
    """delta_mk with memberships as rows and clusters as columns, to 3 decimals."""
    k = mm.k
    clusters = [f'cluster {c}' for c in range(1, k + 1)]
    table = pd.DataFrame(mm.delta_mk, index=[f'membership {m}' for m in range(1, k + 1)], columns=clusters)
    table['delta_m.'] = mm.delta_m_dot
    table.loc['delta_.k'] = list(mm.delta_dot_k) + [float('nan')]
    lines = [table.to_string(float_format='{:.3f}'.format, na_rep='')]
    lines.append(f'delta_T = {mm.delta_T:.3f}')
    if mm.thresholded:
        lines.append(f'threshold = {mm.threshold}')
    return '\n'.join(lines) + '\n'


class Command(BaseCommand):
    help = 'Degree-of-membership matrix of the complete-linkage cut at k clusters'

    def add_arguments(self, parser):
        parser.add_argument('csv_path')
        parser.add_argument('--k', type=int, required=True)
        add_threshold_argument(parser)
        parser.add_argument('--format', choices=['text', 'json'], default='text')
        parser.add_argument('--out', default=None)

    def handle(self, *args, **options):
        k = options['k']
        try:
            data = load_dataset(options['csv_path'])
            if k < 2:
                raise UnsupportedKError(f"the degree of membership may only be considered at k > 1 (got k={k})")
            if k > data.n - 1:
                raise InvalidInputError(f"k={k} exceeds n-1={data.n - 1}")
            dm = squared_distance_matrix(data)
            mm = membership_for(dm, cut(complete_linkage(dm), k))
            if options['threshold'] is not None:
                mm = apply_threshold(mm, options['threshold'])
        except ValidityError as e:
            raise command_error(e) from e

        if options['format'] == 'json':
            text = JSONRenderer().render(MembershipMatrixSerializer(mm).data).decode() + '\n'
        else:
            text = membership_table(mm)
        write_output(self, text, options['out'])
