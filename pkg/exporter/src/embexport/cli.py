"""CLI: embexport export --corpus PATH --text-field NAME --model NAME --out PATH"""
from __future__ import annotations

import argparse
import sys

from .exporter import DEFAULT_MODEL, ExportError, export


def build_parser():
    p = argparse.ArgumentParser(prog="embexport", description=__doc__)
    sub = p.add_subparsers(dest="command")
    sp = sub.add_parser("export", help="encode a JSONL corpus to EMB1")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--text-field", default="narrative")
    sp.add_argument("--model", default=DEFAULT_MODEL,
                    help="sentence-transformers model name, or hashing:<dim> "
                         "for the offline fallback")
    sp.add_argument("--out", required=True)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "export":
        parser.print_usage(sys.stderr)
        return 1
    try:
        manifest = export(args.corpus, args.text_field, args.model, args.out)
    except ExportError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print("wrote %s (%d docs, dim %d) using %s"
          % (args.out, manifest["n_docs"], manifest["dim"],
             manifest["model_name"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
