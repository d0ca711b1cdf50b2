import sys

from mtorus.cli import main

sys.exit(main())
