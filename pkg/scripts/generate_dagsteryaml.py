#!/usr/bin/env python
import sys


def render(dagster_home: str, max_runs: int) -> str:
    dagster_home = dagster_home.replace("\\", "/")
    return f"""storage:
  sqlite:
    base_dir: "{dagster_home}"
run_coordinator:
  module: dagster.core.run_coordinator
  class: QueuedRunCoordinator
  config:
    max_concurrent_runs: {max_runs}
"""


def main() -> None:
    if len(sys.argv) < 2:
        print("Usage: generate_dagsteryaml.py <DAGSTER_HOME> [MAX_CONCURRENT_RUNS]", file=sys.stderr)
        sys.exit(1)
    max_runs = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    if max_runs < 1:
        print("MAX_CONCURRENT_RUNS must be >= 1", file=sys.stderr)
        sys.exit(1)
    print(render(sys.argv[1], max_runs), end="")


if __name__ == "__main__":
    main()
