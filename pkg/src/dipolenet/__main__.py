import sys

from dipolenet.cli import main

sys.exit(main())
