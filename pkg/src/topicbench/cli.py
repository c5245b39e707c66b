"""Command-line surface.

Subcommands: ingest, plsa, embed, cluster, coherence, map, compare.
Exit codes: 0 success, 1 usage/config error, 2 data or format error.
"""
from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from dataclasses import fields

import numpy as np

from . import cluster as _cluster
from . import coherence as _coherence
from . import corpus as _corpus
from . import embed as _embed
from . import plots as _plots
from . import plsa as _plsa
from . import report as _report
from .errors import ConfigError, DataFormatError, TopicbenchError


class _Parser(argparse.ArgumentParser):
    # spec contract: usage errors exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(1)


def default_stopword_path():
    ref = importlib.resources.files("topicbench").joinpath("data/stopwords_en.txt")
    return str(ref)


def _apply_overrides(cfg, overrides, used):
    """Apply key=value --config overrides onto a dataclass by field name."""
    for f in fields(cfg):
        if f.name in overrides:
            raw = overrides[f.name]
            cur = getattr(cfg, f.name)
            if isinstance(cur, bool):
                val = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(cur, int):
                val = int(raw)
            elif isinstance(cur, float):
                val = float(raw)
            else:
                val = raw
            setattr(cfg, f.name, val)
            used.add(f.name)
    return cfg


def _parse_overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError("--config expects key=value (got %r)" % item)
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _add_global_flags(p, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=0 if not suppress else d)
    p.add_argument("--threads", type=int, default=1 if not suppress else d)
    p.add_argument("--out-dir", default="." if not suppress else d)
    p.add_argument("--config", action="append", metavar="KEY=VALUE",
                   default=d, help="override any config field, repeatable")


def build_parser():
    p = _Parser(prog="topicbench", description=__doc__)
    _add_global_flags(p)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add_parser(*args, **kwargs):
        # global flags are also accepted after the subcommand
        sp = sub.add_parser(*args, **kwargs)
        _add_global_flags(sp, suppress=True)
        return sp

    sp = add_parser("ingest", help="JSONL -> corpus cache")
    sp.add_argument("--input", required=True)
    sp.add_argument("--text-field", default="narrative")
    sp.add_argument("--stopwords", default=None)
    sp.add_argument("--cache-name", default="corpus.cache")

    sp = add_parser("plsa", help="fit PLSA and write a model snapshot")
    sp.add_argument("--corpus", required=True, help="corpus cache directory")
    sp.add_argument("--k", type=int, default=6)
    sp.add_argument("--max-iters", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--restarts", type=int, default=1)
    sp.add_argument("--top-n", type=int, default=10)

    sp = add_parser("embed", help="compute LSA embeddings or validate EMB1")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--embeddings", default=None, help="external EMB1/csv file")
    sp.add_argument("--dim", type=int, default=50)

    sp = add_parser("cluster", help="cluster embeddings, emit topics JSON")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--min-cluster-size", type=int, default=10)
    sp.add_argument("--min-samples", type=int, default=None)
    sp.add_argument("--pca-dim", type=int, default=5)
    sp.add_argument("--top-n", type=int, default=10)

    sp = add_parser("coherence", help="score a topics JSON with C_v")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--topics", required=True)
    sp.add_argument("--window", type=int, default=110)
    sp.add_argument("--top-n", type=int, default=10)

    sp = add_parser("map", help="intertopic distances and 2-D coordinates")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--model", help="PLSA snapshot (jensen_shannon)")
    g.add_argument("--weights", help="c-TF-IDF weights CSV (cosine)")

    sp = add_parser("compare", help="full harness over a JSONL corpus")
    sp.add_argument("--corpus", required=True, help="JSONL file or corpus cache")
    sp.add_argument("--text-field", default="narrative")
    sp.add_argument("--stopwords", default=None)
    sp.add_argument("--embeddings", default=None)
    sp.add_argument("--k", type=int, default=6)
    sp.add_argument("--min-cluster-size", type=int, default=10)
    sp.add_argument("--lsa-dim", type=int, default=50)
    sp.add_argument("--pca-dim", type=int, default=5)
    sp.add_argument("--top-n", type=int, default=10)
    sp.add_argument("--no-figures", action="store_true",
                    help="skip PNG/CSV figure outputs")
    return p


def _load_cache(path):
    return _corpus.load_corpus(path)


def _make_preprocess_config(args, overrides, used):
    stop = getattr(args, "stopwords", None) or default_stopword_path()
    cfg = _corpus.PreprocessConfig(stopword_path=stop)
    _apply_overrides(cfg, overrides, used)
    cfg.validate()
    return cfg


def cmd_ingest(args, overrides, used):
    cfg = _make_preprocess_config(args, overrides, used)
    docs, warnings = _corpus.load_jsonl(args.input, args.text_field)
    corp = _corpus.build_corpus(docs, cfg, threads=args.threads)
    corp.warnings = warnings + corp.warnings
    out = os.path.join(args.out_dir, args.cache_name)
    _corpus.save_corpus(corp, out)
    print("wrote corpus cache %s (%d docs, %d terms)"
          % (out, corp.n_docs, len(corp.vocab)))
    for w in corp.warnings:
        print("warning: %s" % w, file=sys.stderr)
    return 0


def cmd_plsa(args, overrides, used):
    cfg = _plsa.PlsaConfig(k=args.k, max_iters=args.max_iters, tol=args.tol,
                           seed=args.seed, restarts=args.restarts)
    _apply_overrides(cfg, overrides, used)
    cfg.validate()
    corp = _load_cache(args.corpus)
    model = _plsa.plsa_fit(corp.counts, cfg)
    snap = os.path.join(args.out_dir, "plsa_model.bin")
    _plsa.save_model(model, snap)
    topics = _report.plsa_topic_set(model, corp.vocab, top_n=args.top_n)
    tpath = os.path.join(args.out_dir, "plsa_topics.json")
    _cluster.save_topics(topics, tpath)
    print("fit k=%d in %d iterations, final log-likelihood %.4f"
          % (cfg.k, len(model.ll_trace), model.ll_trace[-1]))
    print("wrote %s and %s" % (snap, tpath))
    return 0


def cmd_embed(args, overrides, used):
    corp = _load_cache(args.corpus)
    out = os.path.join(args.out_dir, "embeddings.emb1")
    if args.embeddings:
        emb = _embed.load_embeddings(args.embeddings, corp.n_docs)
        _embed.write_emb1(emb.vectors, out)
        print("validated %s (%d x %d), wrote %s"
              % (args.embeddings, emb.n_docs, emb.dim, out))
    else:
        dim = min(args.dim, corp.n_docs, len(corp.vocab))
        emb = _embed.lsa_embed(corp.counts, dim, seed=args.seed)
        _embed.write_emb1(emb.vectors, out)
        print("wrote LSA embeddings %s (%d x %d)" % (out, emb.n_docs, dim))
    return 0


def cmd_cluster(args, overrides, used):
    corp = _load_cache(args.corpus)
    params = _cluster.ClusterParams(min_cluster_size=args.min_cluster_size,
                                    min_samples=args.min_samples)
    _apply_overrides(params, overrides, used)
    params.validate()
    emb = _embed.load_embeddings(args.embeddings, corp.n_docs)
    reduced = _embed.reduce_pca(emb, min(args.pca_dim, emb.dim),
                                mask=corp.kept_mask, seed=args.seed)
    assignment = _cluster.hdbscan_fit(reduced, params, corp.kept_mask)
    for w in assignment.warnings:
        print("warning: %s" % w, file=sys.stderr)
    if assignment.n_clusters == 0:
        raise DataFormatError("no clusters found; lower min_cluster_size")
    weights, warns = _cluster.c_tf_idf(corp.counts, assignment.labels)
    for w in warns:
        print("warning: %s" % w, file=sys.stderr)
    topics = _cluster.top_words_per_cluster(
        weights, corp.vocab, assignment.labels, n=args.top_n,
        kept_mask=corp.kept_mask)
    tpath = os.path.join(args.out_dir, "cluster_topics.json")
    _cluster.save_topics(topics, tpath)
    wpath = os.path.join(args.out_dir, "ctfidf_weights.csv")
    np.savetxt(wpath, weights, delimiter=",")
    lpath = os.path.join(args.out_dir, "cluster_labels.csv")
    np.savetxt(lpath, assignment.labels, fmt="%d", delimiter=",")
    print("found %d clusters (outlier fraction %.3f); wrote %s"
          % (assignment.n_clusters, topics.outlier_fraction, tpath))
    return 0


def cmd_coherence(args, overrides, used):
    corp = _load_cache(args.corpus)
    cfg = _coherence.CoherenceConfig(window=args.window, top_n=args.top_n)
    _apply_overrides(cfg, overrides, used)
    cfg.validate()
    topics = _cluster.load_topics(args.topics)
    rep = _coherence.cv_coherence(topics, corp.token_seqs, cfg)
    out = os.path.join(args.out_dir, "coherence.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(rep.to_json(), fh, indent=2)
    print("mean C_v %.4f over %d topic(s); wrote %s"
          % (rep.mean, len(rep.per_topic), out))
    return 0


def cmd_map(args, overrides, used):
    if args.model:
        model = _plsa.load_model(args.model)
        m = _report.intertopic_map(model.word_given_topic, "jensen_shannon")
    else:
        rows = np.loadtxt(args.weights, delimiter=",", ndmin=2)
        m = _report.intertopic_map(rows, "cosine")
    out = os.path.join(args.out_dir, "intertopic_map.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"metric": m["metric"],
                   "distances": np.asarray(m["distances"]).tolist(),
                   "coords": np.asarray(m["coords"]).tolist()}, fh, indent=2)
    print("wrote %s (%d topics)" % (out, len(m["coords"])))
    return 0


def cmd_compare(args, overrides, used):
    if os.path.isdir(args.corpus):
        corp = _load_cache(args.corpus)
    else:
        cfg = _make_preprocess_config(args, overrides, used)
        docs, warnings = _corpus.load_jsonl(args.corpus, args.text_field)
        corp = _corpus.build_corpus(docs, cfg, threads=args.threads)
        corp.warnings = warnings + corp.warnings
    plsa_cfg = _plsa.PlsaConfig(k=args.k, seed=args.seed)
    _apply_overrides(plsa_cfg, overrides, used)
    plsa_cfg.validate()
    params = _cluster.ClusterParams(min_cluster_size=args.min_cluster_size)
    _apply_overrides(params, overrides, used)
    params.validate()
    coh_cfg = _coherence.CoherenceConfig(top_n=args.top_n)
    _apply_overrides(coh_cfg, overrides, used)
    coh_cfg.validate()
    emb = None
    if args.embeddings:
        emb = _embed.load_embeddings(args.embeddings, corp.n_docs)
    rep = _report.compare(
        corp, plsa_cfg, params, coh_cfg, embeddings=emb,
        lsa_dim=args.lsa_dim, pca_dim=args.pca_dim, seed=args.seed,
        top_n=args.top_n,
    )
    # assemble everything first so a failed stage never leaves partial files
    os.makedirs(args.out_dir, exist_ok=True)
    jpath = os.path.join(args.out_dir, "report.json")
    tpath = os.path.join(args.out_dir, "report.txt")
    _report.save_report(rep, jpath, tpath)
    written = [jpath, tpath]
    if not args.no_figures:
        written += _plots.render_all(rep.to_json(), args.out_dir)
    print(_report.render_text(rep))
    print("wrote: %s" % ", ".join(written))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "plsa": cmd_plsa,
    "embed": cmd_embed,
    "cluster": cmd_cluster,
    "coherence": cmd_coherence,
    "map": cmd_map,
    "compare": cmd_compare,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        overrides = _parse_overrides(args.config)
        used = set()
        os.makedirs(args.out_dir, exist_ok=True)
        code = COMMANDS[args.command](args, overrides, used)
        unused = set(overrides) - used
        if unused:
            print("warning: unused --config key(s): %s"
                  % ", ".join(sorted(unused)), file=sys.stderr)
        return code
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (DataFormatError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except TopicbenchError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
