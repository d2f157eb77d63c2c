import logging
import time
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from analytics.experiments import run_experiment
from analytics.models import ExperimentRun
from analytics.report_generators import TraceReportGenerator
from analytics.serializers import ExperimentConfig
from core.exceptions import DomainError, LinearProgramError, SolverDivergenceError
from core.solver_config import SolverConfig
from core.utils import config_digest

logger = logging.getLogger('experiments')


class Command(BaseCommand):
    help = 'Run a TOML-configured parameter sweep and write its statistics as CSV'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to the TOML experiment file')
        parser.add_argument('--seed', type=int, help='Override the base seed')
        parser.add_argument('--episodes', type=int, help='Override the number of episodes per batch')
        parser.add_argument('--jobs', type=int, default=None, help='Worker threads for episodes')
        parser.add_argument('--out', help='Destination CSV (defaults to the configured output)')
        parser.add_argument('--trace-out', help='Also write per-step traces as CSV')
        parser.add_argument('--trace-episodes', type=int, default=1, help='Episodes per batch in the trace')
        parser.add_argument('--no-record', action='store_true', help='Do not record the run in the database')

    def handle(self, *args, **options):
        try:
            config = ExperimentConfig.from_toml(options['config']).with_overrides(
                seed=options['seed'], episodes=options['episodes'],
            )
        except FileNotFoundError:
            raise CommandError(f"Config file not found: {options['config']}", returncode=2)
        except DomainError as exc:
            raise CommandError(str(exc), returncode=2)

        jobs = SolverConfig.default_jobs() if options['jobs'] is None else options['jobs']
        if jobs < 1:
            raise CommandError(f"--jobs must be positive, got {jobs}", returncode=2)
        out = Path(options['out'] or config.output or SolverConfig.results_dir() / f"{config.name}.csv")

        run = None if options['no_record'] else self._record(
            lambda: ExperimentRun.objects.create(
                name=config.name,
                env=config.env.name,
                sweep_kind=config.sweep_kind,
                param_name=config.param_name,
                planners=[p.name for p in config.planners],
                config=config.as_dict(),
                config_digest=config_digest(config.as_dict()),
                n_episodes=config.n_episodes,
                base_seed=config.base_seed,
                jobs=jobs,
                output_path=str(out),
            )
        )

        def progress(index, value, stats):
            self.stdout.write(f'○ {config.param_name}={value:g} ({index + 1}/{len(config.values)})')
            if run:
                self._record(lambda: run.record_stats(value, stats))

        started = time.perf_counter()
        if run:
            self._record(run.mark_running)
        try:
            report = run_experiment(config, jobs=jobs, progress=progress)
        except (SolverDivergenceError, LinearProgramError) as exc:
            logger.error(f"{config.name} failed: {exc}")
            if run:
                self._record(lambda: run.mark_failed(str(exc)))
            raise CommandError(str(exc), returncode=3)
        except DomainError as exc:
            if run:
                self._record(lambda: run.mark_failed(str(exc)))
            raise CommandError(str(exc), returncode=2)

        try:
            report.write_csv(out)
            if options['trace_out']:
                TraceReportGenerator(config, report.batches, options['trace_episodes']).write_csv(options['trace_out'])
        except OSError as exc:
            if run:
                self._record(lambda: run.mark_failed(str(exc)))
            raise CommandError(f"Could not write results: {exc}", returncode=4)

        if run:
            self._record(lambda: run.mark_completed(time.perf_counter() - started, out))
        self.stdout.write(report.to_text())
        self.stdout.write(self.style.SUCCESS(f'✓ Wrote {config.name} results to {out}'))

    def _record(self, action):
        """Database bookkeeping never fails a run"""
        try:
            return action()
        except DatabaseError as exc:
            logger.warning(f"Could not record experiment history: {exc}")
            return None
