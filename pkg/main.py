"""Primary entrypoint for running the tool from a checkout.

Usage examples:
- `python main.py geometry solve --nu1 2571.0 --nu2 3160.2 --d 2865.42`
- `python main.py bench rb --config configs/setting2.json --seed 7`

Installed, the same commands run as `nvregsim ...`.
"""
import sys

from nvregsim.core.app import main

if __name__ == "__main__":
    sys.exit(main())
