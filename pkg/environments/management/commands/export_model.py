from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import DomainError, SolverDivergenceError
from core.model_io import model_to_json
from core.robust_solvers import value_iteration
from core.utils import parse_param
from environments.builders import ENVIRONMENTS, build_environment


class Command(BaseCommand):
    help = 'Build a benchmark environment and write it as a JSON model file'

    def add_arguments(self, parser):
        parser.add_argument('env', choices=sorted(ENVIRONMENTS), help='Environment name')
        parser.add_argument(
            '--param', action='append', default=[], metavar='KEY=VALUE',
            help='Builder parameter, e.g. --param alpha=0.5 (repeatable)',
        )
        parser.add_argument('--out', required=True, help='Destination of the model file')
        parser.add_argument('--qtable-out', help='Also write the robust Q-table as CSV')

    def handle(self, *args, **options):
        try:
            params = dict(parse_param(p) for p in options['param'])
            model = build_environment(options['env'], **params)
        except (DomainError, ValueError, TypeError) as exc:
            raise CommandError(f"Invalid environment parameters: {exc}", returncode=2)

        out = Path(options['out'])
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            with out.open('w') as fp:
                model_to_json(model, fp)
        except OSError as exc:
            raise CommandError(f"Could not write {out}: {exc}", returncode=4)

        self.stdout.write(self.style.SUCCESS(
            f"✓ Wrote {options['env']} model to {out}: {model.num_states} states, "
            f"{model.num_actions} actions, {model.num_entries} transition entries"
        ))

        if options['qtable_out']:
            try:
                qtable = value_iteration(model, 'robust')
            except SolverDivergenceError as exc:
                raise CommandError(str(exc), returncode=3)
            try:
                qtable.to_csv(options['qtable_out'])
            except OSError as exc:
                raise CommandError(f"Could not write {options['qtable_out']}: {exc}", returncode=4)
            self.stdout.write(self.style.SUCCESS(
                f"✓ Wrote robust Q-table ({qtable.iterations} iterations) to {options['qtable_out']}"
            ))
