"""
XX-chain entanglement engine entry point.

    python app.py concurrence --n 14 --b 0:2:41 --T 0.005 --L 1:4

See README.md for the subcommands and example invocations.
"""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
