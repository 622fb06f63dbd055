import sys

from genetic_curriculum.cli import main

sys.exit(main())
