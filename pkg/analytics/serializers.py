"""
Serializers for TOML experiment configurations
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, replace

from rest_framework import serializers

from core.exceptions import DomainError
from core.planners import ML_MV_MODES, TIE_BREAKS, planner_configs
from core.solver_config import SolverConfig
from environments.builders import ENVIRONMENTS, EnvSpec, environment_params

SWEEP_PARAMETERS = {
    'cost': 'c',
    'p_max': 'p_max',
    'alpha': 'alpha',
    'misspecification': 'alpha',
}
NATURE_KINDS = ('rmdp_worst', 'average')


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated sweep: a fixed environment, one swept parameter, several planners"""
    name: str
    env: EnvSpec
    planners: tuple
    sweep_kind: str
    values: tuple
    n_episodes: int = 100
    base_seed: int = 0
    output: str = ''
    planning_alpha: float = None
    nature: str = 'rmdp_worst'
    horizon_cap: int = None
    tie_break: str = SolverConfig.TIE_LEXICOGRAPHIC
    ml_mv_mode: str = 'robust_actions'

    @property
    def param_name(self):
        return SWEEP_PARAMETERS[self.sweep_kind]

    @property
    def is_misspecified(self):
        return self.sweep_kind == 'misspecification'

    def true_env(self, value):
        """Environment the simulator runs at one sweep value"""
        return self.env.with_params(**{self.param_name: value})

    def planning_env(self, value):
        """Environment the planners solve at one sweep value"""
        if self.is_misspecified:
            return self.env.with_params(alpha=self.planning_alpha)
        return self.true_env(value)

    def with_overrides(self, seed=None, episodes=None):
        changes = {}
        if seed is not None:
            changes['base_seed'] = seed
        if episodes is not None:
            if episodes < 1:
                raise DomainError(f"Need at least one episode, got {episodes}")
            changes['n_episodes'] = episodes
        return replace(self, **changes)

    def as_dict(self):
        data = asdict(self)
        data['env'] = {'name': self.env.name, 'params': dict(self.env.params)}
        data['planners'] = [p.name for p in self.planners]
        return data

    @classmethod
    def from_mapping(cls, data):
        serializer = ExperimentConfigSerializer(data=data)
        if not serializer.is_valid():
            raise DomainError(f"Invalid experiment configuration: {dict(serializer.errors)}")
        return serializer.save()

    @classmethod
    def from_toml(cls, path):
        with open(path, 'rb') as fp:
            try:
                data = tomllib.load(fp)
            except tomllib.TOMLDecodeError as exc:
                raise DomainError(f"Could not parse {path}: {exc}")
        return cls.from_mapping(data)


class ExperimentSectionSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=100)
    env = serializers.ChoiceField(choices=sorted(ENVIRONMENTS))
    planners = serializers.ListField(child=serializers.CharField(), min_length=1)
    n_episodes = serializers.IntegerField(min_value=1, default=100)
    base_seed = serializers.IntegerField(min_value=0, default=0)
    output = serializers.CharField(required=False, allow_blank=True, default='')
    horizon_cap = serializers.IntegerField(min_value=1, required=False)
    tie_break = serializers.ChoiceField(choices=TIE_BREAKS, default=SolverConfig.TIE_LEXICOGRAPHIC)
    ml_mv_mode = serializers.ChoiceField(choices=ML_MV_MODES, default='robust_actions')

    def validate(self, data):
        try:
            data['planner_configs'] = planner_configs(data['planners'], data['tie_break'], data['ml_mv_mode'])
        except DomainError as exc:
            raise serializers.ValidationError({'planners': str(exc)})
        return data


class SweepSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=sorted(SWEEP_PARAMETERS))
    values = serializers.ListField(child=serializers.FloatField(), min_length=1)
    planning_alpha = serializers.FloatField(required=False)
    nature = serializers.ChoiceField(choices=NATURE_KINDS, default='rmdp_worst')

    def validate_values(self, values):
        if any(b <= a for a, b in zip(values, values[1:])):
            raise serializers.ValidationError("Sweep values must be strictly increasing")
        return values

    def validate(self, data):
        kind = data['kind']
        if kind == 'misspecification' and 'planning_alpha' not in data:
            raise serializers.ValidationError({'planning_alpha': "Required for misspecification sweeps"})
        if kind != 'misspecification' and 'planning_alpha' in data:
            raise serializers.ValidationError({'planning_alpha': "Only misspecification sweeps plan at a fixed alpha"})
        alphas = list(data['values']) if kind in ('alpha', 'misspecification') else []
        if 'planning_alpha' in data:
            alphas.append(data['planning_alpha'])
        if any(not 0.0 < a <= 1.0 for a in alphas):
            raise serializers.ValidationError("Confidence levels must lie in (0, 1]")
        if kind == 'p_max' and any(not 0.0 <= p <= 1.0 for p in data['values']):
            raise serializers.ValidationError({'values': "p_max must lie in [0, 1]"})
        if kind == 'cost' and any(c < 0.0 for c in data['values']):
            raise serializers.ValidationError({'values': "Measuring costs must be non-negative"})
        return data


class ExperimentConfigSerializer(serializers.Serializer):
    """Validates a whole TOML experiment file ([experiment], [env], [sweep])"""

    experiment = ExperimentSectionSerializer()
    env = serializers.DictField(required=False, default=dict)
    sweep = SweepSerializer()

    def validate(self, data):
        name = data['experiment']['env']
        param = SWEEP_PARAMETERS[data['sweep']['kind']]
        try:
            defaults = environment_params(name, **data['env'])
        except (DomainError, ValueError, TypeError) as exc:
            raise serializers.ValidationError({'env': str(exc)})
        if param not in defaults:
            raise serializers.ValidationError(
                {'sweep': f"Environment '{name}' has no parameter '{param}' to sweep"}
            )
        if param in data['env']:
            raise serializers.ValidationError({'env': f"'{param}' is swept and cannot also be fixed"})
        return data

    def create(self, validated_data):
        experiment = validated_data['experiment']
        sweep = validated_data['sweep']
        return ExperimentConfig(
            name=experiment['name'],
            env=EnvSpec(experiment['env'], dict(validated_data['env'])),
            planners=tuple(experiment['planner_configs']),
            sweep_kind=sweep['kind'],
            values=tuple(sweep['values']),
            n_episodes=experiment['n_episodes'],
            base_seed=experiment['base_seed'],
            output=experiment['output'],
            planning_alpha=sweep.get('planning_alpha'),
            nature=sweep['nature'],
            horizon_cap=experiment.get('horizon_cap'),
            tie_break=experiment['tie_break'],
            ml_mv_mode=experiment['ml_mv_mode'],
        )
