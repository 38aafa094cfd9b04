"""Entrypoints package."""

from src.entrypoints.cli import build_parser, main

__all__ = ["build_parser", "main"]
