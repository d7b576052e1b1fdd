"""CLI entry point wrapper for the ``splinesys`` console script."""

import sys

from main import main as _main


def main() -> None:
    """Run the verifier CLI and exit with its status."""
    sys.exit(_main())
