import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.renderers import JSONRenderer

from validitykit.exceptions import InvalidInputError, ValidityError
from simulate.scenarios import builtin_scenarios, scenario_by_name
from simulate.serializers import ScenarioSpecSerializer, TallyTableSerializer
from indices.utils import CH_FORMULAS, CH_STANDARD, DISPERSION_POWERS
from simulate.study import METHODS, StudyParameters, run_study
from ._common import add_threshold_argument, command_error


def load_spec_file(path):
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    serializer = ScenarioSpecSerializer(data=payload)
    if not serializer.is_valid():
        details = '; '.join(
            f"{field}: {' '.join(str(m) for m in messages)}" for field, messages in serializer.errors.items()
        )
        raise InvalidInputError(f"{path}: {details}")
    return serializer.save()


class Command(BaseCommand):
    help = 'Run the simulation study and write one tally table (CSV and JSON) per scenario'

    def add_arguments(self, parser):
        defaults = settings.VALIDITY
        parser.add_argument('scenario', nargs='?', help="Built-in scenario name, or 'all'")
        parser.add_argument('--spec', help='JSON scenario spec file')
        parser.add_argument('--R', type=int, default=defaults['REPLICATIONS'])
        parser.add_argument('--kmax', type=int, default=defaults['K_MAX'])
        parser.add_argument('--seed', type=int, default=defaults['SEED'])
        parser.add_argument('--bootstraps', type=int, default=defaults['BOOTSTRAPS'])
        parser.add_argument('--methods', nargs='+', choices=METHODS, default=list(METHODS))
        parser.add_argument('--ch', choices=CH_FORMULAS, default=CH_STANDARD)
        parser.add_argument('--gap-dpower', type=int, choices=DISPERSION_POWERS, default=defaults['GAP_D_POWER'])
        add_threshold_argument(parser)
        parser.add_argument('--workers', type=int, default=1, help='Replicates evaluated in parallel')
        parser.add_argument('--out', default='.', help='Directory for <scenario>.csv and <scenario>.json')

    def handle(self, *args, **options):
        if bool(options['scenario']) == bool(options['spec']):
            raise CommandError("[E-INPUT] give either a scenario name or --spec FILE")

        threshold = options['threshold']
        try:
            if options['spec']:
                specs = [load_spec_file(options['spec'])]
            elif options['scenario'] == 'all':
                specs = builtin_scenarios(settings.VALIDITY['GAUSSIAN_SD'])
            else:
                specs = [scenario_by_name(options['scenario'], settings.VALIDITY['GAUSSIAN_SD'])]
            params = StudyParameters(
                methods=options['methods'],
                R=options['R'],
                k_max=options['kmax'],
                seed=options['seed'],
                B=options['bootstraps'],
                threshold=settings.VALIDITY['THRESHOLD'] if threshold is None else threshold,
                ch_formula=options['ch'],
                clamp=settings.VALIDITY['DELTA_T_CLAMP'],
                d_power=options['gap_dpower'],
            )
            if options['workers'] > 1:
                with ProcessPoolExecutor(max_workers=options['workers']) as executor:
                    tables = run_study(specs, params, map_fn=executor.map)
            else:
                tables = run_study(specs, params)
        except ValidityError as e:
            raise command_error(e) from e

        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        self.stderr.write(f"seed {params.seed}")
        for table in tables:
            csv_path = out / f'{table.scenario.name}.csv'
            json_path = out / f'{table.scenario.name}.json'
            table.to_csv(csv_path)
            json_path.write_bytes(JSONRenderer().render(TallyTableSerializer(table).data) + b'\n')
            self.stdout.write(f"{table.scenario.name}: wrote {csv_path} and {json_path}")
