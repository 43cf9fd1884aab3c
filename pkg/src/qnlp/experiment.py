"""
Config-driven runs: build or load a corpus, compile, train, test, answer
a question, and write the report with its artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .circuit import AnsatzConfig, apply_qubit_reduction, compile_sentence, to_qasm
from .errors import ConfigError, QnlpError
from .grammar import (
    LabeledCorpus, Lexicon, RelationalWorld, default_lexicon, make_corpus, parse,
    question_tokens,
)
from .training import Evaluator, SpsaConfig, answer_question, save_model, train

OUT_ENV = "QNLP_OUT"
REPORT_VERSION = 1


def data_path(name: str) -> Path:
    return Path(str(resources.files("qnlp") / "data" / name))


def default_config_text() -> str:
    return data_path("default.toml").read_text()


@dataclass
class ExperimentConfig:
    lexicon: Lexicon
    corpus_path: Path | None = None
    world: str = "default"
    world_seed: int = 0
    test_fraction: float = 0.25
    split_seed: int = 0
    required_train: tuple = ("Alice loves Bob",)
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    evaluator: Evaluator = field(default_factory=Evaluator)
    init_seed: int = 0
    workers: int = 1
    out: Path = Path("qnlp-out")
    question: str | None = None
    text: str = ""

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.world not in ("default", "random"):
            raise ConfigError(f"world must be 'default' or 'random', got {self.world!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def seeds(self) -> dict:
        return {"init": self.init_seed, "spsa": self.spsa.seed, "split": self.split_seed,
                "world": self.world_seed, "evaluator": self.evaluator.seed}

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """One seed for both initialisation and SPSA perturbations."""
        return replace(self, init_seed=seed, spsa=replace(self.spsa, seed=seed))

    def make_world(self) -> RelationalWorld:
        if self.world == "random":
            return RelationalWorld.random(self.lexicon, self.world_seed)
        return RelationalWorld.default()

    def make_corpus(self) -> LabeledCorpus:
        if self.corpus_path is not None:
            return LabeledCorpus.load(self.corpus_path, self.lexicon)
        try:
            return make_corpus(self.lexicon, self.make_world(), self.test_fraction,
                               self.split_seed, self.required_train)
        except ValueError as exc:
            raise ConfigError(f"cannot split the generated corpus: {exc}") from None


def _section(data, name) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def _resolve(value, base: Path) -> Path | None:
    if value in (None, "", "builtin"):
        return None
    p = Path(value)
    p = p if p.is_absolute() else base / p
    if not p.exists():
        raise ConfigError(f"path {value!r} does not exist (resolved to {p})")
    return p


def parse_config(text: str, base: Path | None = None) -> ExperimentConfig:
    """Parse TOML ``text``; relative paths resolve against ``base``."""
    base = base or Path.cwd()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    corpus = _section(data, "corpus")
    run = _section(data, "run")
    try:
        lex_path = _resolve(corpus.get("lexicon"), base)
        lexicon = Lexicon.load(lex_path) if lex_path else default_lexicon()
        ev = _section(data, "evaluator")
        return ExperimentConfig(
            lexicon=lexicon,
            corpus_path=_resolve(corpus.get("path"), base),
            world=corpus.get("world", "default"),
            world_seed=int(corpus.get("world_seed", 0)),
            test_fraction=float(corpus.get("test_fraction", 0.25)),
            split_seed=int(corpus.get("split_seed", 0)),
            required_train=tuple(corpus.get("required_train", ("Alice loves Bob",))),
            ansatz=AnsatzConfig.from_json(_section(data, "ansatz")),
            spsa=SpsaConfig.from_json(_section(data, "spsa")),
            evaluator=Evaluator(ev.get("mode", "exact"), int(ev.get("shots", 0)),
                                int(ev.get("seed", 0))),
            init_seed=int(run.get("init_seed", 0)),
            workers=int(run.get("workers", 1)),
            out=Path(run.get("out", "qnlp-out")),
            question=_section(data, "question").get("text"),
            text=text,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return parse_config(default_config_text(), data_path(""))
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)


def output_dir(cfg: ExperimentConfig, override=None) -> Path:
    """``override`` (the --out flag) wins, then the environment, then the config."""
    if override:
        return Path(override)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return cfg.out


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")


def export_circuits(corpus: LabeledCorpus, ansatz: AnsatzConfig, out: Path, params=None,
                    reduce: bool = True) -> list:
    """One QASM file per sentence; returns the written paths."""
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, s in enumerate(corpus.sentences):
        c = compile_sentence(s, ansatz)
        c = apply_qubit_reduction(c) if reduce else c
        c = replace(c, label=s.text)
        p = out / f"{i:03d}_{slug(s.text)}.qasm"
        p.write_text(to_qasm(c, params))
        paths.append(p)
    return paths


def loss_csv(history) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "loss"])
    for k, v in enumerate(history):
        w.writerow([k, repr(float(v))])
    return buf.getvalue()


def _predictions(corpus, result) -> list:
    rows = []
    for split, rep in (("train", result.train_report), ("test", result.test_report)):
        for sid, pred, label, dist in rep.per_sentence:
            rows.append({"id": sid, "text": corpus.sentences[sid].text, "split": split,
                         "label": label, "prediction": pred, "predicted": int(pred >= 0.5),
                         "distance": dist})
    return sorted(rows, key=lambda r: r["id"])


def run_experiment(cfg: ExperimentConfig, out=None, plot: bool = True) -> dict:
    """
    Full run; writes report.json, loss_history.csv (and a PNG of it),
    model.json, corpus.jsonl and circuits/*.qasm into the output directory.
    Returns the report.  Poor accuracy is reported, not raised.
    """
    out = output_dir(cfg, out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = cfg.make_corpus()
    try:
        result = train(corpus, cfg.spsa, cfg.ansatz, cfg.init_seed, cfg.evaluator,
                       cfg.lexicon, cfg.workers)
    except QnlpError as exc:
        raise QnlpError(f"training failed: {type(exc).__name__}: {exc}") from exc
    report = {
        "version": REPORT_VERSION,
        "loss_history": [float(v) for v in result.loss_history],
        "train_accuracy": result.train_accuracy,
        "test_accuracy": result.test_accuracy,
        "predictions": _predictions(corpus, result),
        "seeds": cfg.seeds(),
        "config": cfg.text,
    }
    if cfg.question:
        tokens = question_tokens(cfg.question, cfg.lexicon)
        q = parse(tokens, cfg.lexicon)
        value, answer = answer_question(q, result.final_params, cfg.ansatz, cfg.lexicon)
        report["question"] = {"text": cfg.question, "tokens": list(tokens),
                              "truth_value": value, "answer": bool(answer)}
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    history = result.loss_history
    (out / "loss_history.csv").write_text(loss_csv(history))
    if plot:
        from .plotting import plot_loss_history
        plot_loss_history(history, out / "loss_history.png")
    save_model(out / "model.json", result.final_params, cfg.ansatz, cfg.lexicon)
    corpus.save(out / "corpus.jsonl")
    export_circuits(corpus, cfg.ansatz, out / "circuits", result.final_params)
    return report
