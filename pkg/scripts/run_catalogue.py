#!/usr/bin/env python3
"""Print the scaling classification table for the equation catalogue.

Thin wrapper around `roughstart classify`; pass --out to keep the JSON
artifact somewhere other than the current directory.
"""

import sys

from roughstart.cli import main

if __name__ == "__main__":
    sys.exit(main(["classify"] + sys.argv[1:]))
