"""Module entry point so ``python -m tomo`` matches the installed script."""

import sys

from .cli import main

sys.exit(main())
