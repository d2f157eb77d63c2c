"""
WSGI config for the ramlab project.

Only the admin site is served; the planning library itself is driven through
management commands.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "ramlab.settings")

application = get_wsgi_application()
