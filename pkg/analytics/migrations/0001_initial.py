import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("name", models.CharField(max_length=100)),
                ("env", models.CharField(max_length=50)),
                ("sweep_kind", models.CharField(max_length=30)),
                ("param_name", models.CharField(max_length=30)),
                ("planners", models.JSONField(default=list)),
                ("config", models.JSONField(default=dict)),
                ("config_digest", models.CharField(max_length=64)),
                ("n_episodes", models.PositiveIntegerField()),
                ("base_seed", models.PositiveIntegerField(default=0)),
                ("jobs", models.PositiveIntegerField(default=1)),
                ("output_path", models.CharField(blank=True, max_length=500)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("PENDING", "Pending"),
                            ("RUNNING", "Running"),
                            ("COMPLETED", "Completed"),
                            ("FAILED", "Failed"),
                        ],
                        default="PENDING",
                        max_length=10,
                    ),
                ),
                ("error_message", models.TextField(blank=True)),
                ("runtime_seconds", models.FloatField(blank=True, null=True)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("completed_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "ordering": ["-created_at"],
                "indexes": [
                    models.Index(fields=["env"], name="experiment_env_idx"),
                    models.Index(fields=["config_digest"], name="experiment_digest_idx"),
                    models.Index(fields=["status"], name="experiment_status_idx"),
                ],
            },
        ),
        migrations.CreateModel(
            name="SweepResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("planner", models.CharField(max_length=30)),
                ("param_value", models.FloatField()),
                ("position", models.PositiveIntegerField(default=0)),
                ("mean_return", models.FloatField()),
                ("ci_return", models.FloatField()),
                ("mean_nonscalarized", models.FloatField()),
                ("ci_nonscalarized", models.FloatField()),
                ("mean_measurements", models.FloatField()),
                ("ci_measurements", models.FloatField()),
                ("n", models.PositiveIntegerField()),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="results",
                        to="analytics.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "param_value", "position"],
                "unique_together": {("run", "planner", "param_value")},
            },
        ),
    ]
