#!/usr/bin/env python3
"""
matchbench - Schema Matching Experiment Harness
Run this script to use the command line without installing the package.
"""

import os
import sys

# Add the project root to the path
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)


def main():
    """Start the matchbench command line."""
    try:
        from matchbench.cli import main as cli
    except ImportError as e:
        print(f"Missing dependency ({e}). Please run: pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
