#!/usr/bin/env python
"""
Command-line entry point for running a stability computation locally.
"""
import sys

from backend.maslov.config.env_manager import load_environment

# Load environment variables before the configuration classes are imported
load_environment()

from backend.maslov.api.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
