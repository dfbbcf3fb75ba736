import sys

from sdcabench.cli import main

sys.exit(main())
