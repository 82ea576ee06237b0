import sys

from slitlab.cli import main

sys.exit(main())
