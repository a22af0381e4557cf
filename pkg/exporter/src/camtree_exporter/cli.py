"""Exporter command line: write dataset bundles or a tree corpus."""

from __future__ import annotations

import argparse
import sys

from .export import DATASETS, DEFAULT_DEPTHS, corpus_export, train_export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="camtree-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datasets", help="train and export the reference dataset trees")
    p.add_argument("--out", default="models")
    p.add_argument("--datasets", default=",".join(DATASETS))
    p.add_argument("--seed", type=int, default=None, help="override the per-dataset pinned split seed")

    p = sub.add_parser("corpus", help="export a corpus of trees for the balance study")
    p.add_argument("--out", default="models/corpus")
    p.add_argument("--n-trees", type=int, default=300)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "datasets":
        for name in args.datasets.split(","):
            metrics = train_export(name, args.out, max_depth=DEFAULT_DEPTHS.get(name), seed=args.seed)
            print(
                f"{name}: test accuracy {metrics['test_accuracy']:.4f}, "
                f"{metrics['n_leaves']} leaves, depth {metrics['depth']}",
                file=sys.stderr,
            )
    else:
        paths = corpus_export(args.n_trees, args.out, max_depth=args.max_depth, seed=args.seed)
        print(f"wrote {len(paths)} trees to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
