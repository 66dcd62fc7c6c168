"""
Helpers shared by the management commands.
"""
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from validitykit.exceptions import InvalidInputError, ValidityError
from geometry.datasets import read_csv_dataset


def command_error(error: ValidityError) -> CommandError:
    return CommandError(f"[{error.code}] {error.message}")


def add_threshold_argument(parser):
    parser.add_argument(
        '--threshold', type=float, nargs='?', const=settings.VALIDITY['THRESHOLD'], default=None,
        help=f"Zero degrees of membership below T (default T={settings.VALIDITY['THRESHOLD']} when given bare)",
    )


def load_dataset(csv_path):
    try:
        return read_csv_dataset(csv_path)
    except OSError as e:
        raise InvalidInputError(f"cannot read {csv_path}: {e.strerror or e}") from e


def write_output(command, text, out=None):
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        command.stderr.write(f"Wrote {path}")
    else:
        command.stdout.write(text, ending='' if text.endswith('\n') else '\n')
