import sys

from lassolab.cli import main

sys.exit(main())
