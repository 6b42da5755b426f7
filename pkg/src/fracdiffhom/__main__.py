import sys

from fracdiffhom.cli import main

sys.exit(main())
