"""Supervised learning of word parameters with SPSA, and question answering."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import AnsatzConfig, ParameterStore, apply_qubit_reduction, compile_sentence, param_shapes
from .errors import ConfigError, UnknownWord
from .grammar import Lexicon, default_lexicon, parse
from .simulator import evaluate, sample

TWO_PI = 2 * math.pi
THRESHOLD = 0.5


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.1
    c: float = 0.1
    A: float = 10.0
    alpha_decay: float = 0.602
    gamma_decay: float = 0.101
    iterations: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("gain a must be nonnegative")
        for name in ("c", "alpha_decay", "gamma_decay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.A < 0:
            raise ValueError("stability constant A must be nonnegative")
        if int(self.iterations) < 0:
            raise ValueError("iterations must be nonnegative")

    def gains(self, k: int) -> tuple:
        return self.a / (self.A + k) ** self.alpha_decay, self.c / k ** self.gamma_decay

    def to_json(self):
        return {"a": self.a, "c": self.c, "A": self.A, "alpha_decay": self.alpha_decay,
                "gamma_decay": self.gamma_decay, "iterations": self.iterations, "seed": self.seed}

    @classmethod
    def from_json(cls, data) -> "SpsaConfig":
        return cls(**data)


@dataclass(frozen=True)
class Evaluator:
    """``mode`` is 'exact' or 'shots'; shot mode draws with a per-call seed."""

    mode: str = "exact"
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"evaluator mode must be exact or shots, got {self.mode!r}")
        if self.mode == "shots" and self.shots < 1:
            raise ValueError("shot mode needs a positive shot count")

    def predict(self, circuit, params, call: int = 0) -> float:
        if self.mode == "exact":
            return evaluate(circuit, params).truth_value_estimate
        seed = np.random.SeedSequence([self.seed, call])
        return sample(circuit, params, self.shots, seed, zero_ok=True).truth_value_estimate


@dataclass
class LossReport:
    total: float
    per_sentence: list

    def accuracy(self) -> float:
        if not self.per_sentence:
            return float("nan")
        hits = sum((p >= THRESHOLD) == bool(y) for _, p, y, _ in self.per_sentence)
        return hits / len(self.per_sentence)


class CircuitCache:
    """Compiled, qubit-reduced circuits per sentence text."""

    def __init__(self, ansatz: AnsatzConfig, reduce: bool = True):
        self.ansatz = ansatz
        self.reduce = reduce
        self._store = {}

    def __call__(self, sentence):
        key = sentence.tokens
        if key not in self._store:
            c = compile_sentence(sentence, self.ansatz)
            self._store[key] = apply_qubit_reduction(c) if self.reduce else c
        return self._store[key]


def loss(params, data, evaluator: Evaluator | None = None, circuits=None,
         workers: int = 1, call: int = 0) -> LossReport:
    """
    Squared-error loss over ``data``, a list of (id, sentence, label).
    Sentence terms may be evaluated in parallel; the result is the same.
    """
    evaluator = evaluator or Evaluator()
    circuits = circuits or CircuitCache(AnsatzConfig())

    def term(j):
        sid, sentence, label = data[j]
        pred = evaluator.predict(circuits(sentence), params, call * 1000003 + j)
        return sid, pred, label, (pred - label) ** 2

    if workers > 1 and len(data) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(term, range(len(data))))
    else:
        rows = [term(j) for j in range(len(data))]
    return LossReport(float(sum(r[3] for r in rows)), rows)


def wrap_angles(theta):
    return np.mod(theta, TWO_PI)


def spsa_step(theta, loss_fn, k: int, cfg: SpsaConfig, rng, wrap: bool = True):
    """
    One SPSA update of the flat vector ``theta`` at iteration ``k >= 1``:
    a symmetric Bernoulli perturbation of size c_k, a gradient estimate
    from the two loss values, and a step of size a_k.
    """
    if k < 1:
        raise ValueError("SPSA iterations are counted from 1")
    theta = np.asarray(theta, dtype=float)
    a_k, c_k = cfg.gains(k)
    delta = rng.choice([-1.0, 1.0], size=theta.shape)
    plus = loss_fn(theta + c_k * delta)
    minus = loss_fn(theta - c_k * delta)
    new = theta - a_k * (plus - minus) / (2 * c_k) * delta
    return wrap_angles(new) if wrap else new


def spsa_minimize(loss_fn, theta0, cfg: SpsaConfig, wrap: bool = True, callback=None):
    """Run ``cfg.iterations`` SPSA steps; returns (theta, loss history)."""
    rng = np.random.default_rng(cfg.seed)
    theta = np.asarray(theta0, dtype=float)
    history = [float(loss_fn(theta))]
    for k in range(1, cfg.iterations + 1):
        theta = spsa_step(theta, loss_fn, k, cfg, rng, wrap)
        history.append(float(loss_fn(theta)))
        if callback is not None:
            callback(k, theta, history[-1])
    return theta, history


@dataclass
class TrainResult:
    final_params: ParameterStore
    loss_history: list
    train_accuracy: float
    test_accuracy: float
    train_report: LossReport = None
    test_report: LossReport = None
    checkpoints: list = field(default_factory=list)


def corpus_shapes(corpus, ansatz: AnsatzConfig, lexicon: Lexicon) -> dict:
    words = {t for s in corpus.sentences for t in s.tokens}
    entries = [(e.word, e.pos, e.pregroup_type) for e in lexicon if e.word in words]
    return {w: k for w, k in param_shapes(entries, ansatz).items() if k}


def train(corpus, cfg: SpsaConfig | None = None, ansatz: AnsatzConfig | None = None,
          init_seed=0, evaluator: Evaluator | None = None, lexicon: Lexicon | None = None,
          workers: int = 1, checkpoint_every: int = 0) -> TrainResult:
    """
    Fit word parameters to the training labels, starting from uniform random
    angles drawn with ``init_seed``, then score both splits with the exact
    evaluator at threshold 0.5.
    """
    cfg = cfg or SpsaConfig()
    ansatz = ansatz or AnsatzConfig()
    evaluator = evaluator or Evaluator()
    lexicon = default_lexicon() if lexicon is None else lexicon
    circuits = CircuitCache(ansatz)
    shapes = corpus_shapes(corpus, ansatz, lexicon)
    words = sorted(shapes)
    init = ParameterStore.random(shapes, np.random.default_rng(init_seed))
    train_data = corpus.subset("train")
    calls = [0]

    def objective(theta):
        calls[0] += 1
        params = ParameterStore.unflatten(theta, shapes, words)
        return loss(params, train_data, evaluator, circuits, workers, calls[0]).total

    checkpoints = []

    def record(k, theta, value):
        if checkpoint_every and k % checkpoint_every == 0:
            checkpoints.append({"iteration": k,
                                "params": ParameterStore.unflatten(theta, shapes, words).to_json(),
                                "loss": value})

    theta, history = spsa_minimize(objective, init.flatten(words), cfg, callback=record)
    final = ParameterStore.unflatten(theta, shapes, words)
    exact = Evaluator()
    train_report = loss(final, train_data, exact, circuits, workers)
    test_report = loss(final, corpus.subset("test"), exact, circuits, workers)
    return TrainResult(final, history, train_report.accuracy(), test_report.accuracy(),
                       train_report, test_report, checkpoints)


def answer_question(question, params, ansatz: AnsatzConfig | None = None,
                    lexicon: Lexicon | None = None) -> tuple:
    """Exact truth value of a question sentence and its thresholded answer."""
    ansatz = ansatz or AnsatzConfig()
    lexicon = default_lexicon() if lexicon is None else lexicon
    if not hasattr(question, "diagram"):
        question = parse(question, lexicon)
    for t in question.tokens:
        entry = lexicon[t]
        if entry.pos != "relative_pronoun" and t not in params:
            raise UnknownWord(t)
    circuit = apply_qubit_reduction(compile_sentence(question, ansatz))
    value = evaluate(circuit, params).truth_value_estimate
    return value, value >= THRESHOLD


# Model files.

def save_model(path, params, ansatz: AnsatzConfig, lexicon: Lexicon, extra=None):
    data = {"params": params.to_json(), "ansatz": ansatz.to_json(), "lexicon": lexicon.to_json()}
    data.update(extra or {})
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_model(path) -> tuple:
    try:
        data = json.loads(Path(path).read_text())
        return (ParameterStore.from_json(data["params"]), AnsatzConfig.from_json(data["ansatz"]),
                Lexicon.from_json(data["lexicon"]))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot load model {path}: {exc}") from None


def save_checkpoint(path, iteration: int, params, value: float):
    Path(path).write_text(json.dumps(
        {"iteration": iteration, "params": params.to_json(), "loss": value}, sort_keys=True) + "\n")


def load_checkpoint(path) -> tuple:
    data = json.loads(Path(path).read_text())
    return data["iteration"], ParameterStore.from_json(data["params"]), data["loss"]
