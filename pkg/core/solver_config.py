"""
Solver configuration and constants
"""
from pathlib import Path

from django.conf import settings


class SolverConfig:
    """
    Numeric defaults for the solvers, planners and oracle.

    Every value can be overridden in settings (and therefore through the
    environment, see ramlab/settings.py).
    """

    # Variants
    ROBUST = 'robust'
    OPTIMISTIC = 'optimistic'
    EXACT = 'exact'

    # Tie-breaking modes
    TIE_LEXICOGRAPHIC = 'lexicographic'
    TIE_SEEDED_RANDOM = 'seeded_random'
    TIE_ML_PREFERRED = 'ml_preferred'

    DEFAULTS = {
        'RAMLAB_VI_TOLERANCE': 1e-8,
        'RAMLAB_VI_MAX_ITER': 100000,
        'RAMLAB_PROB_EPSILON': 1e-9,
        'RAMLAB_TIE_TOLERANCE': 1e-9,
        'RAMLAB_GAME_TOLERANCE': 1e-12,
        'RAMLAB_GAME_MAX_ROUNDS': 1000,
        'RAMLAB_ORACLE_GRID': 1000,
        'RAMLAB_ORACLE_BELIEF_BUDGET': 10000,
        'RAMLAB_DEFAULT_JOBS': 1,
    }

    HORIZON_CAPS = {
        'ab': 2,
        'lucky-unlucky': 2,
        'belief-dep': 2,
        'snakemaze': 100,
        'drone': 100,
    }

    @classmethod
    def get(cls, name):
        """Read a setting, falling back to the library default"""
        return getattr(settings, name, cls.DEFAULTS[name])

    @classmethod
    def vi_tolerance(cls):
        return float(cls.get('RAMLAB_VI_TOLERANCE'))

    @classmethod
    def vi_max_iter(cls):
        return int(cls.get('RAMLAB_VI_MAX_ITER'))

    @classmethod
    def prob_epsilon(cls):
        """Tolerance for probability sums"""
        return float(cls.get('RAMLAB_PROB_EPSILON'))

    @classmethod
    def tie_tolerance(cls):
        """Values closer than this are ties in arg-max and in the measuring condition"""
        return float(cls.get('RAMLAB_TIE_TOLERANCE'))

    @classmethod
    def game_tolerance(cls):
        return float(cls.get('RAMLAB_GAME_TOLERANCE'))

    @classmethod
    def game_max_rounds(cls):
        return int(cls.get('RAMLAB_GAME_MAX_ROUNDS'))

    @classmethod
    def oracle_grid(cls):
        return int(cls.get('RAMLAB_ORACLE_GRID'))

    @classmethod
    def oracle_belief_budget(cls):
        return int(cls.get('RAMLAB_ORACLE_BELIEF_BUDGET'))

    @classmethod
    def default_jobs(cls):
        return int(cls.get('RAMLAB_DEFAULT_JOBS'))

    @classmethod
    def horizon_cap(cls, env_name):
        """Episode length cap for an environment"""
        caps = getattr(settings, 'RAMLAB_HORIZON_CAPS', cls.HORIZON_CAPS)
        return int(caps.get(env_name, cls.HORIZON_CAPS.get(env_name, 100)))

    @classmethod
    def results_dir(cls):
        return Path(getattr(settings, 'RAMLAB_RESULTS_DIR', 'results'))
