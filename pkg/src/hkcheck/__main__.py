import sys

from hkcheck.cli import main

sys.exit(main())
