import sys

from maxrgm.cli import main

sys.exit(main())
