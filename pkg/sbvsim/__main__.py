"""Allows `python -m sbvsim`"""

import sys

from .cli import main

sys.exit(main())
