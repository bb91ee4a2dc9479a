#!/usr/bin/env python3
"""
FIN Solver Startup Script
Loads the environment, reports the active configuration and runs a CLI command
"""
import os
import sys
from pathlib import Path

# Load environment variables from .env file FIRST before any imports
# Configuration classes read the environment at import time
from dotenv import load_dotenv
env_path = Path('.') / '.env'
load_dotenv(dotenv_path=env_path, override=True)

# Now import solver modules
from fin.cli import main as cli_main
from fin.config import get_config


def main(argv=None):
    """Main startup function"""
    argv = sys.argv[1:] if argv is None else argv
    config_name = os.getenv('FIN_ENV', 'development')

    try:
        config = get_config(config_name)
    except ValueError as e:
        print(f"✗ Invalid configuration: {e}")
        return 1

    if not argv:
        print("=" * 60)
        print("FIN Solver")
        print("=" * 60)
        print(f"Environment: {config_name}")
        print(f"Bundled scenarios: {config.DATA_DIR}")
        print()
        print("Usage: python run.py <validate|solve|sweep|multiapp|export-graph|evaluate> [options]")
        print("Example: python run.py solve --scenario b_alexnet_cifar10.json --alpha 80 --delta 5")
        return 0

    try:
        return cli_main(argv)
    except KeyboardInterrupt:
        print("\n\nInterrupted.")
        return 130


if __name__ == '__main__':
    sys.exit(main())
