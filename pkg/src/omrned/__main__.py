import sys

from omrned.cli import main

sys.exit(main())
