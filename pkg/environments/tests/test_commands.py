import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.model_io import model_from_json
from environments.builders import build_lucky_unlucky, build_snakemaze


class ExportModelCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def export(self, *args):
        out = StringIO()
        call_command('export_model', *args, stdout=out)
        return out.getvalue()

    def test_writes_a_loadable_model(self):
        path = self.dir / 'models' / 'maze.json'
        output = self.export('snakemaze', '--param', 'width=3', '--param', 'height=4', '--param', 'alpha=0.7',
                             '--out', str(path))
        self.assertIn('13 states', output)
        with path.open() as fp:
            self.assertEqual(model_from_json(fp), build_snakemaze(3, 4, alpha=0.7))

    def test_dashed_parameter_names(self):
        path = self.dir / 'lu.json'
        self.export('lucky-unlucky', '--param', 'p-max=0.3', '--out', str(path))
        with path.open() as fp:
            self.assertEqual(model_from_json(fp), build_lucky_unlucky(0.3, 0.2))

    def test_qtable_export(self):
        qtable = self.dir / 'q.csv'
        output = self.export('ab', '--out', str(self.dir / 'ab.json'), '--qtable-out', str(qtable))
        self.assertIn('robust Q-table', output)
        frame = pd.read_csv(qtable)
        self.assertAlmostEqual(frame.loc[(frame.s == 0) & (frame.a == 0), 'value'].item(), 0.8)

    def test_invalid_parameters(self):
        for param in ('alpha=2', 'depth=3', 'width'):
            with self.subTest(param=param):
                with self.assertRaises(CommandError) as ctx:
                    self.export('snakemaze', '--param', param, '--out', str(self.dir / 'x.json'))
                self.assertEqual(ctx.exception.returncode, 2)

    def test_unwritable_destination(self):
        blocker = self.dir / 'file'
        blocker.write_text('')
        with self.assertRaises(CommandError) as ctx:
            self.export('ab', '--out', str(blocker / 'model.json'))
        self.assertEqual(ctx.exception.returncode, 4)
