import sys

from radiomap.cli import main

sys.exit(main())
