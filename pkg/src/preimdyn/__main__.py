import sys

from preimdyn.cli import main

sys.exit(main())
