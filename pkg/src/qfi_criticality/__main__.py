import sys

from .cli_sweeps import main

sys.exit(main())
