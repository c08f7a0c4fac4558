#!/usr/bin/env python3
"""Command-line entry point: ``python eudkit.py <subcommand> ...``."""
from core.cli import main

if __name__ == "__main__":
    main()
