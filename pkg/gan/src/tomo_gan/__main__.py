"""Module entry point so ``python -m tomo_gan`` matches the installed script."""

import sys

from .cli import main

sys.exit(main())
