"""
Entry point of the els toolkit.
Loads the environment and hands the arguments to the command line.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv

load_dotenv()

from src.cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
