import sys

from chanprot.cli import main

sys.exit(main())
