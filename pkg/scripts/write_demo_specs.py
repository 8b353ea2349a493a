"""Write a folder of ready to run spec and operator files.

The specs cover the shipped fixtures at small window sizes, one
deliberately corrupted window, and a ray fan variant; the operator
files feed the rmf subcommand.  Point the CLI at them:

    relfan build --spec demo_specs/elliptic.json
    relfan check --spec demo_specs/elliptic.json --suite relations
    relfan rmf --spec demo_specs/elliptic.json --n-data demo_specs/op_exists.json
"""

import argparse
import json
from pathlib import Path

SPECS = {
    "elliptic.json": {"fixture": "elliptic", "window": 3, "corpus": 100, "seed": 7},
    "jordan3.json": {"fixture": "jordan3", "window": 3, "corpus": 100, "seed": 7},
    "triple.json": {"fixture": "triple", "window": 1, "corpus": 40, "seed": 7},
    "elliptic_broken.json": {"fixture": "elliptic", "window": 2, "seed": 7, "corrupt": "drop-faces"},
    "elliptic_neron.json": {"fixture": "elliptic", "fan": "neron-rays", "window": 2},
}

OPERATORS = {
    # image of the distinguished vector under the extension; the first
    # lands inside the allowed space, the second is refused
    "op_exists.json": {"e_image": ["1", "0"]},
    "op_refused.json": {"e_image": ["0", "1"]},
    "op_zero.json": {"e_image": ["0", "0"]},
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="demo_specs", help="target directory")
    args = parser.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, payload in {**SPECS, **OPERATORS}.items():
        path = out / name
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
