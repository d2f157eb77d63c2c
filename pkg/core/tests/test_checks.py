from django.test import SimpleTestCase, override_settings

from core.checks import check_solver_settings


class SolverSettingsCheckTests(SimpleTestCase):
    def ids(self):
        return [message.id for message in check_solver_settings(None)]

    def test_default_settings_pass(self):
        self.assertEqual(self.ids(), [])

    @override_settings(RAMLAB_VI_TOLERANCE=0.0, RAMLAB_DEFAULT_JOBS=-1)
    def test_non_positive_values(self):
        self.assertEqual(self.ids(), ['ramlab.E001', 'ramlab.E001'])

    @override_settings(RAMLAB_TIE_TOLERANCE=0.01)
    def test_loose_tie_tolerance(self):
        self.assertEqual(self.ids(), ['ramlab.W001'])

    @override_settings(RAMLAB_HORIZON_CAPS={'ab': 0})
    def test_horizon_caps(self):
        self.assertEqual(self.ids(), ['ramlab.E002'])
