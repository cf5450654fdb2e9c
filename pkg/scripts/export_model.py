#!/usr/bin/env python3
"""Write the constructed structure for a given dimension as a structure file.

The output is consumable by the ``finvar eval``, ``closure``, ``definable``,
and ``automorphisms`` subcommands.
"""

import argparse
import json
import sys

from finvar import build_model, save_structure


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=3, help="dimension (>= 3)")
    parser.add_argument("--out", required=True, help="output JSON path")
    parser.add_argument("--no-s-cycle", action="store_true",
                        help="drop the binary cycle relation (n >= 4 only)")
    args = parser.parse_args()
    model = build_model(args.n, with_s_cycle=not args.no_s_cycle)
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(save_structure(model.structure), handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote universe-{model.structure.universe_size} structure to {args.out}")
    print(f"element labels: {model.labels}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
