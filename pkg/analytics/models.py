from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One execution of a sweep configuration"""
    STATUS_CHOICES = [
        ('PENDING', 'Pending'),
        ('RUNNING', 'Running'),
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]

    name = models.CharField(max_length=100)
    env = models.CharField(max_length=50)
    sweep_kind = models.CharField(max_length=30)
    param_name = models.CharField(max_length=30)
    planners = models.JSONField(default=list)
    config = models.JSONField(default=dict)
    config_digest = models.CharField(max_length=64)
    n_episodes = models.PositiveIntegerField()
    base_seed = models.PositiveIntegerField(default=0)
    jobs = models.PositiveIntegerField(default=1)
    output_path = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='PENDING')
    error_message = models.TextField(blank=True)
    runtime_seconds = models.FloatField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['env'], name='experiment_env_idx'),
            models.Index(fields=['config_digest'], name='experiment_digest_idx'),
            models.Index(fields=['status'], name='experiment_status_idx'),
        ]

    def __str__(self):
        return f"{self.name} ({self.env}, {self.get_status_display()})"

    def mark_running(self):
        self.status = 'RUNNING'
        self.save(update_fields=['status'])

    def mark_completed(self, runtime, output_path=''):
        self.status = 'COMPLETED'
        self.runtime_seconds = runtime
        self.output_path = str(output_path)
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'runtime_seconds', 'output_path', 'completed_at'])

    def mark_failed(self, message):
        self.status = 'FAILED'
        self.error_message = message
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'error_message', 'completed_at'])

    def record_stats(self, value, stats):
        """Store one sweep value's batch statistics"""
        SweepResult.objects.bulk_create([
            SweepResult(run=self, param_value=value, position=i, **batch.as_row())
            for i, batch in enumerate(stats)
        ])


class SweepResult(models.Model):
    """Aggregate statistics of one planner at one sweep value"""
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='results')
    planner = models.CharField(max_length=30)
    param_value = models.FloatField()
    position = models.PositiveIntegerField(default=0)
    mean_return = models.FloatField()
    ci_return = models.FloatField()
    mean_nonscalarized = models.FloatField()
    ci_nonscalarized = models.FloatField()
    mean_measurements = models.FloatField()
    ci_measurements = models.FloatField()
    n = models.PositiveIntegerField()

    class Meta:
        ordering = ['run', 'param_value', 'position']
        unique_together = ['run', 'planner', 'param_value']

    def __str__(self):
        return f"{self.planner} @ {self.param_value:g}: {self.mean_return:.4f} ± {self.ci_return:.4f}"
