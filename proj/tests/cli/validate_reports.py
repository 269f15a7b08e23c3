"""Validate gylab JSON reports against the shipped schema."""
import json
import sys
from pathlib import Path

import jsonschema


def main(argv):
    if len(argv) < 3:
        print("usage: validate_reports.py SCHEMA REPORT...", file=sys.stderr)
        return 2
    schema = json.loads(Path(argv[1]).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for name in argv[2:]:
        report = json.loads(Path(name).read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for err in errors:
            print(f"{name}: {'/'.join(map(str, err.path))}: {err.message}")
        failed += bool(errors)
        if not errors:
            print(f"{name}: ok")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
