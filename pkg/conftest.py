import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "wgmsim.settings")
django.setup()

# Mirror `manage.py test`: allow the 'testserver' host, use locmem email, etc.
from django.test.utils import setup_test_environment  # noqa: E402

setup_test_environment()
