# -*- coding: utf-8 -*-
import sys

from illposed_gd.cli.main import main

sys.exit(main())
