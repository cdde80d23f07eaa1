import sys

from fpeit.cli import _main

sys.exit(_main())
