import sys

from smoothlm.cli import main

sys.exit(main())
