#!/usr/bin/env python3
"""Regenerate the CLI config files in scripts/configs/ from the canonical
experiment definitions (so `optshare run --config ...` reproduces them)."""

import json
import pathlib
import sys

from optshare.experiments import config_to_dict, trend_configs


def main() -> int:
    out_dir = pathlib.Path(__file__).parent / "configs"
    out_dir.mkdir(exist_ok=True)
    for name, config in trend_configs().items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(config_to_dict(config), indent=2) + "\n")
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
