""" CLI Initializer for StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License

Usage: python3 -m statepoll {verb} model.json
"""

import sys

from ._cli import main

sys.exit(main())
