"""
ASGI config for the ramlab project.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "ramlab.settings")

application = get_asgi_application()
