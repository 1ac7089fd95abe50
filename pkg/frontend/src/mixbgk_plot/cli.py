"""mixbgk-plot <figure-kind> --in DIR --out FILE [--fields ...] [--normalized]"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, plot_profiles, plot_scaling


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mixbgk-plot",
                                 description="render figures from a run bundle")
    ap.add_argument("kind", choices=sorted(FIGURE_KINDS))
    ap.add_argument("--in", dest="in_dir", required=True,
                    help="run output directory (CSV/JSON bundle)")
    ap.add_argument("--out", required=True, help="image file (.png or .svg)")
    ap.add_argument("--fields", nargs="+", default=None,
                    help="profile fields to include (profiles only)")
    ap.add_argument("--normalized", action="store_true",
                    help="restrict to *_norm fields (profiles only)")
    args = ap.parse_args(argv)
    if args.kind == "scaling":
        plot_scaling(args.in_dir, args.out)
    else:
        plot_profiles(args.in_dir, args.out, fields=args.fields,
                      normalized=args.normalized)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
