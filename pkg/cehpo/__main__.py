import sys

from cehpo.main import main

sys.exit(main())
