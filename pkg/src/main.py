"""
Main CLI entry point for the ETF tail-risk monitor.
"""

import sys

from src.entrypoints.cli import main as cli_main


def main() -> None:
    """Main CLI entry point."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
