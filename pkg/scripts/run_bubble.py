#!/usr/bin/env python3
"""Default bubble experiment: simulate, dump fields, verify, ladder."""

import sys

from mixzone.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "runs/bubble"

rc = main(["simulate", "--output", OUT])
rc = rc or main(["fields", "--output", OUT, "--time", "0.01"])
rc = rc or main(["fields", "--output", OUT, "--time", "0.02"])
rc = rc or main(["ladder", "--output", OUT])
rc = rc or main(["verify", "--output", OUT])
sys.exit(rc)
