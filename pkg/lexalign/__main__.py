import sys

from lexalign.cli import main

sys.exit(main())
