"""
Command line entry point.

    qnlp generate      write the labelled corpus as JSON lines
    qnlp train         run an experiment and write its report
    qnlp ask           answer a question with a trained model
    qnlp export-qasm   write one QASM file per corpus sentence
    qnlp demo-density  print the hyponymy table of the animal example
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import density
from .circuit import ParameterStore, apply_qubit_reduction, compile_sentence
from .errors import ConfigError, NoReduction, QnlpError, UnknownWord
from .experiment import export_circuits, load_config, output_dir, run_experiment
from .grammar import parse, question_tokens
from .training import answer_question, corpus_shapes, load_model


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.workers is not None:
        cfg.workers = args.workers
    return cfg


def cmd_generate(args) -> int:
    cfg = _config(args)
    corpus = cfg.make_corpus()
    text = corpus.to_jsonl()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(f"wrote {len(corpus.sentences)} sentences to {out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    out = output_dir(cfg, args.out)
    report = run_experiment(cfg, out, plot=not args.no_plot)
    print(f"train_accuracy\t{report['train_accuracy']:.4f}")
    print(f"test_accuracy\t{report['test_accuracy']:.4f}")
    print(f"final_loss\t{report['loss_history'][-1]:.6f}")
    if "question" in report:
        q = report["question"]
        print(f"question\t{q['text']}\t{q['truth_value']:.6f}\t{str(q['answer']).lower()}")
    print(f"report\t{out / 'report.json'}")
    return 0


def cmd_ask(args) -> int:
    params, ansatz, lexicon = load_model(args.model)
    tokens = question_tokens(args.question, lexicon)
    try:
        q = parse(tokens, lexicon)
    except NoReduction as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"stuck types: {exc.stuck}", file=sys.stderr)
        return 2
    value, answer = answer_question(q, params, ansatz, lexicon)
    width = apply_qubit_reduction(compile_sentence(q, ansatz)).width
    print(f"{value:.6f}\t{str(answer).lower()}\twidth={width}")
    return 0


def cmd_export_qasm(args) -> int:
    cfg = _config(args)
    corpus = cfg.make_corpus()
    if args.model:
        params, ansatz, _ = load_model(args.model)
    else:
        ansatz = cfg.ansatz
        shapes = corpus_shapes(corpus, ansatz, cfg.lexicon)
        params = ParameterStore.random(shapes, np.random.default_rng(cfg.init_seed))
    out = output_dir(cfg, args.out) / "circuits"
    paths = export_circuits(corpus, ansatz, out, params, reduce=not args.no_reduce)
    for p in paths:
        print(p)
    return 0


def cmd_demo_density(args) -> int:
    words = density.animal_hierarchy()
    table = density.hyponym_table(words)
    if args.json:
        print(json.dumps([{"hyponym": a, "hypernym": b, "holds": v}
                          for (a, b), v in table.items()], indent=2))
        return 0
    names = list(words)
    width = max(map(len, names))
    print(" " * width + "  " + "  ".join(f"{n:>{len(n)}}" for n in names))
    for a in names:
        cells = "  ".join(f"{('yes' if table[a, b] else '-'):>{len(b)}}" for b in names)
        print(f"{a:>{width}}  {cells}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnlp", description="Train and query quantum sentence classifiers.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output directory (overrides $QNLP_OUT and the config)"):
        sp.add_argument("--config", help="experiment TOML file (default: bundled config)")
        sp.add_argument("--seed", type=int, help="seed for initialisation and SPSA")
        sp.add_argument("--workers", type=int, help="threads for loss terms")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("generate", help="write the labelled corpus")
    common(sp, "corpus file to write (default: stdout)")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("train", help="train and write the report")
    common(sp)
    sp.add_argument("--no-plot", action="store_true", help="skip the loss-history PNG")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("ask", help="answer a yes/no question")
    sp.add_argument("question", help="e.g. 'Does Bob who is silly love Alice who is rich?'")
    sp.add_argument("--model", required=True, help="model.json from a train run")
    sp.set_defaults(func=cmd_ask)

    sp = sub.add_parser("export-qasm", help="write OpenQASM 2 files for the corpus")
    common(sp)
    sp.add_argument("--model", help="bind trained parameters (default: seeded random)")
    sp.add_argument("--no-reduce", action="store_true", help="skip qubit reduction")
    sp.set_defaults(func=cmd_export_qasm)

    sp = sub.add_parser("demo-density", help="hyponymy table for the animal example")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_demo_density)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownWord as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoReduction as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QnlpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
