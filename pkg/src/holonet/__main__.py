import sys

from holonet.cli import main

sys.exit(main())
