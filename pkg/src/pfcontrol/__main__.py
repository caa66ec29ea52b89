import sys

from pfcontrol.cli import main

sys.exit(main())
