#!/usr/bin/env python
# Prints WAREHOUSE_PATH then DAGSTER_HOME, one per line, for setup.sh
import os
import sys

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from chaosmap.constants import DAGSTER_PATH, WAREHOUSE_PATH  # noqa: E402

print(WAREHOUSE_PATH.replace("\\", "/"))
print(DAGSTER_PATH.replace("\\", "/"))
