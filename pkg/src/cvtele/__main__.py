import sys

from cvtele.cli import main

sys.exit(main())
