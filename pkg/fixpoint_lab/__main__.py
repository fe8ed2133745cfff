#!/usr/bin/env python3

"""Main entry point for the fixpoint CLI."""

from fixpoint_lab import cli

if __name__ == "__main__":
    cli.main()
