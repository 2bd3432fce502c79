#!/usr/bin/env python3
"""
sbvsim Startup Script
Runs the simulator command line from a source checkout: python run.py <subcommand> --config FILE
"""

import sys

from sbvsim.cli import main

if __name__ == "__main__":
    sys.exit(main())
