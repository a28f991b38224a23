# Copyright 2026 The omx Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates omx JSON reports against docs/report.schema.json.

usage: check_schema.py OMX_BINARY SOURCE_DIR
"""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema

RUNS = [
    ["teleport"],
    ["teleport", "--n-bar", "0.2", "--alpha", "0.6", "--beta", "0.8i", "--samples", "5", "--seed", "3"],
    ["teleport", "--model", "bosonic", "--n-bar", "0.1", "--include-psi"],
    ["swap", "--n-bar", "0.15"],
    ["run", "{src}/circuits/teleport.omx"],
    ["run", "{src}/circuits/swap.omx"],
    ["run", "{src}/circuits/teleport.omx", "--backend", "density"],
]


def main() -> int:
    omx, src = sys.argv[1], Path(sys.argv[2])
    schema = json.loads((src / "docs" / "report.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for args in RUNS:
        argv = [omx] + [a.format(src=src) for a in args]
        report = json.loads(subprocess.run(argv, check=True, capture_output=True, text=True).stdout)
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        status = "ok" if not errors else "INVALID"
        print(f"{status}: {' '.join(args)}")
        for e in errors:
            print(f"  {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
