#!/usr/bin/env python3
"""Turned-graph experiment: overturned x1-periodic interface."""

import os
import sys
import tempfile

from mixzone.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "runs/turned"

CFG = f"""
scenario = turned-graph
n = 512
dt = 0.00125
t_final = 0.01
output_times = 0.005 0.01
ladder_times = 0.01 0.005 0.0025
output_dir = {OUT}
"""

with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
    fh.write(CFG)
    path = fh.name
try:
    rc = main(["simulate", "--config", path])
    rc = rc or main(["fields", "--config", path, "--time", "0.01"])
finally:
    os.unlink(path)
sys.exit(rc)
