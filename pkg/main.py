import logging
import os
import sys

from dotenv import load_dotenv

from qcycle.cli import main

load_dotenv()

logging.basicConfig(level=os.environ.get("QCYCLE_LOG_LEVEL", "INFO").upper())

if __name__ == "__main__":
    sys.exit(main())
