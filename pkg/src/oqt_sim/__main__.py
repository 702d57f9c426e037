import sys

from oqt_sim.cli import main

sys.exit(main())
