from django.apps import AppConfig


class CoreConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core"
    verbose_name = "Planning library"

    def ready(self):
        """Register the solver settings checks"""
        import core.checks  # noqa
