from django.contrib import admin

from .models import ExperimentRun, SweepResult


class SweepResultInline(admin.TabularInline):
    model = SweepResult
    extra = 0
    can_delete = False
    readonly_fields = (
        'planner', 'param_value', 'mean_return', 'ci_return',
        'mean_nonscalarized', 'ci_nonscalarized', 'mean_measurements', 'ci_measurements', 'n',
    )
    exclude = ('position',)


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('name', 'env', 'param_name', 'n_episodes', 'base_seed', 'status', 'runtime_seconds', 'created_at')
    list_filter = ('env', 'sweep_kind', 'status')
    search_fields = ('name', 'config_digest', 'output_path')
    readonly_fields = ('config', 'config_digest', 'created_at', 'completed_at', 'runtime_seconds')
    inlines = (SweepResultInline,)
    fieldsets = (
        ('Experiment', {
            'fields': ('name', 'env', 'sweep_kind', 'param_name', 'planners')
        }),
        ('Execution', {
            'fields': ('n_episodes', 'base_seed', 'jobs', 'output_path', 'status', 'error_message')
        }),
        ('Provenance', {
            'fields': ('config', 'config_digest', 'runtime_seconds', 'created_at', 'completed_at')
        }),
    )


@admin.register(SweepResult)
class SweepResultAdmin(admin.ModelAdmin):
    list_display = ('run', 'planner', 'param_value', 'mean_return', 'ci_return', 'mean_measurements', 'n')
    list_filter = ('planner', 'run__env')
    search_fields = ('run__name', 'planner')
