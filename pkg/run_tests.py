#!/usr/bin/env python3
"""
Test runner for the dastgcn test suites.

This script provides a convenient way to run all tests with proper
configuration and reporting.
"""

import argparse
import sys
from pathlib import Path

import pytest

TEST_DIR = Path(__file__).parent / "dastgcn" / "tests"


def build_pytest_args(args: argparse.Namespace) -> list[str]:
    """
    Translate runner options into pytest arguments.

    Args:
        args: Parsed command line arguments

    Returns:
        Argument list for pytest.main
    """
    target = TEST_DIR
    if args.module:
        name = args.module if args.module.endswith(".py") else f"{args.module}.py"
        target = TEST_DIR / name

    pytest_args = [str(target), f"-{'v' * args.verbosity}" if args.verbosity else "-q"]
    if args.pattern:
        pytest_args += ["-k", args.pattern]
    if args.failfast:
        pytest_args.append("-x")
    if args.slow:
        pytest_args += ["-m", "slow or not slow"]
    if args.coverage:
        pytest_args += ["--cov=dastgcn", "--cov-report=term-missing"]
    return pytest_args


def main():
    """Main test runner function."""
    parser = argparse.ArgumentParser(description="Run tests for dastgcn")

    parser.add_argument(
        "--module", "-m", help="Run tests from specific module (e.g., test_numerics)"
    )

    parser.add_argument(
        "--pattern",
        "-p",
        help="Only run tests whose names match this pytest -k expression",
    )

    parser.add_argument(
        "--verbosity",
        "-v",
        type=int,
        choices=[0, 1, 2],
        default=1,
        help="Test output verbosity (0=quiet, 1=normal, 2=verbose)",
    )

    parser.add_argument(
        "--failfast", "-f", action="store_true", help="Stop on first test failure"
    )

    parser.add_argument(
        "--slow", "-s", action="store_true", help="Include the desk-scale acceptance runs"
    )

    parser.add_argument(
        "--coverage", "-c", action="store_true", help="Report coverage with pytest-cov"
    )

    parser.add_argument(
        "--list", "-l", action="store_true", help="List available test modules and exit"
    )

    args = parser.parse_args()

    # List available test modules
    if args.list:
        print("Available test modules:")
        for test_file in sorted(TEST_DIR.glob("test_*.py")):
            print(f"  {test_file.stem}")
        return 0

    return int(pytest.main(build_pytest_args(args)))


if __name__ == "__main__":
    sys.exit(main())
