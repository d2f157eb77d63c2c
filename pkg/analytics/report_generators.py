import logging
from pathlib import Path

import pandas as pd
from django.utils import timezone

logger = logging.getLogger('experiments')

FLOAT_FORMAT = '%.12g'
STAT_COLUMNS = [
    'mean_return', 'ci_return',
    'mean_nonscalarized', 'ci_nonscalarized',
    'mean_measurements', 'ci_measurements',
    'n',
]


class ReportGenerator:
    """Base class for all report generators"""

    def __init__(self, config):
        self.config = config
        self.generated_at = timezone.now()

    def format_interval(self, mean, ci):
        """Format a mean with its 95 % half-width"""
        return f"{mean:.4f} ± {ci:.4f}"

    def export_to_dataframe(self):
        raise NotImplementedError

    def write_csv(self, path):
        """Write the report as CSV; identical inputs give identical bytes"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = self.export_to_dataframe()
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path


class SweepReportGenerator(ReportGenerator):
    """Aggregate statistics of one parameter sweep, one row per (sweep value, planner)"""

    def __init__(self, config, batches=None):
        super().__init__(config)
        self.batches = list(batches or [])

    def add(self, value, stats):
        self.batches.append((value, list(stats)))

    @property
    def columns(self):
        columns = ['env', 'planner', 'param_name', 'param_value']
        if self.config.is_misspecified:
            columns.append('planning_alpha')
        return columns + STAT_COLUMNS

    def export_to_dataframe(self):
        rows = []
        for value, stats in self.batches:
            for batch in stats:
                row = {
                    'env': self.config.env.name,
                    'param_name': self.config.param_name,
                    'param_value': value,
                    'planning_alpha': self.config.planning_alpha,
                }
                row.update(batch.as_row())
                rows.append(row)
        return pd.DataFrame(rows, columns=self.columns)

    def generate_detailed_report(self):
        """Summary per planner plus the best planner at every sweep value"""
        frame = self.export_to_dataframe()
        report = {
            'experiment': self.config.name,
            'generated_at': self.generated_at,
            'rows': len(frame),
            'planners': {},
            'best_by_value': {},
        }
        if frame.empty:
            return report

        for planner, group in frame.groupby('planner', sort=False):
            report['planners'][planner] = {
                'mean_return': float(group['mean_return'].mean()),
                'total_measurements': float(group['mean_measurements'].sum()),
                'measuring_values': group.loc[group['mean_measurements'] > 0, 'param_value'].tolist(),
            }
        for value, group in frame.groupby('param_value', sort=True):
            best = group.loc[group['mean_return'].idxmax()]
            report['best_by_value'][value] = best['planner']
        return report

    def to_text(self):
        frame = self.export_to_dataframe()
        lines = [f"{self.config.name}: {self.config.env.name}, sweep over {self.config.param_name}"]
        for _, row in frame.iterrows():
            lines.append(
                f"  {row['param_name']}={row['param_value']:<8g} {row['planner']:<10} "
                f"return {self.format_interval(row['mean_return'], row['ci_return'])}  "
                f"measurements {self.format_interval(row['mean_measurements'], row['ci_measurements'])}"
            )
        return '\n'.join(lines)


class TraceReportGenerator(ReportGenerator):
    """Per-step decision traces of the first episodes of every batch"""

    def __init__(self, config, batches, max_episodes=1):
        super().__init__(config)
        self.batches = list(batches)
        self.max_episodes = max_episodes

    def export_to_dataframe(self):
        frames = []
        for value, stats in self.batches:
            for batch in stats:
                for result in batch.results[:self.max_episodes]:
                    frame = result.trace_frame()
                    if frame.empty:
                        continue
                    frame.insert(0, 'seed', result.seed)
                    frame.insert(0, 'planner', result.planner)
                    frame.insert(0, 'param_value', value)
                    frames.append(frame)
        if not frames:
            return pd.DataFrame(columns=['param_value', 'planner', 'seed', 't'])
        return pd.concat(frames, ignore_index=True)
