"""
System checks for the solver settings
"""
from django.core.checks import Error, Warning, register

from .solver_config import SolverConfig

POSITIVE = (
    'RAMLAB_VI_TOLERANCE',
    'RAMLAB_VI_MAX_ITER',
    'RAMLAB_PROB_EPSILON',
    'RAMLAB_TIE_TOLERANCE',
    'RAMLAB_GAME_TOLERANCE',
    'RAMLAB_GAME_MAX_ROUNDS',
    'RAMLAB_ORACLE_GRID',
    'RAMLAB_ORACLE_BELIEF_BUDGET',
    'RAMLAB_DEFAULT_JOBS',
)


@register()
def check_solver_settings(app_configs, **kwargs):
    errors = []
    for name in POSITIVE:
        value = SolverConfig.get(name)
        if not value > 0:
            errors.append(Error(f"{name} must be positive, got {value}", id='ramlab.E001'))
    if SolverConfig.tie_tolerance() > 1e-3:
        errors.append(Warning(
            f"RAMLAB_TIE_TOLERANCE={SolverConfig.tie_tolerance()} merges clearly different action values",
            id='ramlab.W001',
        ))
    for env in SolverConfig.HORIZON_CAPS:
        if SolverConfig.horizon_cap(env) < 1:
            errors.append(Error(f"Horizon cap for {env} must be at least 1", id='ramlab.E002'))
    return errors
