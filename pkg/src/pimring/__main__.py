"""Allow running pimring as a module: python -m pimring"""

import sys

from pimring.app import main

if __name__ == "__main__":
    sys.exit(main())
