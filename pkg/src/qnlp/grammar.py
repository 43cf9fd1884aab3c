"""
Toy pregroup grammar: lexicon, parsing to sentence diagrams, exhaustive
generation, relative-pronoun questions, and a labelled corpus drawn from a
small relational world.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .diagram import Box, Diagram, Id, Ty, _from_offsets
from .errors import ConfigError, NoReduction, TypeMismatch, UnknownWord

N, S = Ty("n"), Ty("s")

POS_TYPES = {
    "noun": N,
    "transitive_verb": N.r @ S @ N.l,
    "copula": N.r @ S @ N.l,
    "adjective": N,
    "relative_pronoun": N.r @ N @ S.l @ N,
}

TEMPLATES = {
    "noun tverb noun": ("noun", "transitive_verb", "noun"),
    "noun copula adjective": ("noun", "copula", "adjective"),
}


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    pos: str
    pregroup_type: Ty = None

    def __post_init__(self):
        if not self.word:
            raise ValueError("empty word")
        if self.pos not in POS_TYPES:
            raise ValueError(f"unknown part of speech {self.pos!r} for {self.word!r}")
        expected = POS_TYPES[self.pos]
        if self.pregroup_type is None:
            object.__setattr__(self, "pregroup_type", expected)
        elif Ty(*self.pregroup_type) != expected:
            raise TypeMismatch(self.pregroup_type, expected, f"type of {self.word!r}")

    def box(self) -> Box:
        return Box(self.word, Ty(), self.pregroup_type, "word", self.pos)


class Lexicon:
    """Ordered word list; lookups by word."""

    def __init__(self, entries=()):
        self.entries = tuple(entries)
        self._by_word = {}
        for e in self.entries:
            if e.word in self._by_word:
                raise ValueError(f"duplicate lexicon word {e.word!r}")
            self._by_word[e.word] = e

    def __contains__(self, word):
        return word in self._by_word

    def __getitem__(self, word) -> LexiconEntry:
        try:
            return self._by_word[word]
        except KeyError:
            raise UnknownWord(word) from None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def words(self, pos) -> list:
        return [e.word for e in self.entries if e.pos == pos]

    def to_json(self):
        return [{"word": e.word, "pos": e.pos} for e in self.entries]

    @classmethod
    def from_json(cls, data) -> "Lexicon":
        try:
            return cls(LexiconEntry(item["word"], item["pos"]) for item in data)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed lexicon entry: {exc}") from None

    @classmethod
    def load(cls, path) -> "Lexicon":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read lexicon {path}: {exc}") from None


def default_lexicon() -> Lexicon:
    return Lexicon([
        LexiconEntry("Alice", "noun"),
        LexiconEntry("Bob", "noun"),
        LexiconEntry("loves", "transitive_verb"),
        LexiconEntry("hates", "transitive_verb"),
        LexiconEntry("is", "copula"),
        LexiconEntry("rich", "adjective"),
        LexiconEntry("silly", "adjective"),
        LexiconEntry("who", "relative_pronoun"),
    ])


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    diagram: Diagram

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def __str__(self):
        return self.text


# Parsing.

def _reduce(types: tuple):
    """
    Cup offsets reducing ``types`` to the shortest reachable list, trying
    the leftmost cancellation first.  Returns (offsets, remaining types).
    """

    @lru_cache(maxsize=None)
    def best(ts):
        result = ((), ts)
        for i in range(len(ts) - 1):
            if ts[i].cancels_with(ts[i + 1]):
                rest, left = best(ts[:i] + ts[i + 2:])
                if len(left) < len(result[1]):
                    result = ((i,) + rest, left)
                    if not left:
                        break
        return result

    return best(tuple(types))


def _search(types: tuple, target: tuple):
    """Cup offsets reducing ``types`` to exactly ``target``, or None."""

    @lru_cache(maxsize=None)
    def go(ts):
        if ts == target:
            return ()
        for i in range(len(ts) - 1):
            if ts[i].cancels_with(ts[i + 1]):
                rest = go(ts[:i] + ts[i + 2:])
                if rest is not None:
                    return (i,) + rest
        return None

    return go(tuple(types))


def _cup_box(left, right) -> Box:
    dom = Ty(left, right)
    return Box(f"CUP({dom})", dom, Ty(), "cup")


def words_then_cups(boxes, offsets) -> Diagram:
    """Word states side by side, then the given cups."""
    items = []
    width = 0
    for box in boxes:
        items.append((width, box))
        width += len(box.cod)
    current = [t for b in boxes for t in b.cod]
    for i in offsets:
        items.append((i, _cup_box(current[i], current[i + 1])))
        del current[i:i + 2]
    return _from_offsets(Ty(), items)


def parse(tokens, lexicon: Lexicon | None = None, target=S) -> Sentence:
    """
    Diagram of ``tokens``: the word states tensored left to right, then cups
    reducing the type list to ``target``.
    """
    lexicon = default_lexicon() if lexicon is None else lexicon
    tokens = tuple(tokens)
    boxes = [lexicon[t].box() for t in tokens]
    types = tuple(t for b in boxes for t in b.cod)
    target = tuple(Ty(*target)) if not isinstance(target, Ty) else tuple(target)
    offsets = _search(types, target)
    if offsets is None:
        raise NoReduction(tokens, Ty(*_reduce(types)[1]))
    return Sentence(tokens, words_then_cups(boxes, offsets))


def generate_all(lexicon: Lexicon | None = None, templates=tuple(TEMPLATES)) -> list:
    """Every instantiation of the templates, parsed, in lexicon order."""
    lexicon = default_lexicon() if lexicon is None else lexicon
    out = []
    for name in templates:
        pattern = TEMPLATES[name] if isinstance(name, str) else tuple(name)
        for tokens in itertools.product(*[lexicon.words(pos) for pos in pattern]):
            out.append(parse(tokens, lexicon))
    return out


def build_question(subject: Sentence, verb: str, obj: Sentence,
                   lexicon: Lexicon | None = None) -> Sentence:
    """
    Compose two noun phrases with a transitive verb: subject, verb, object
    side by side, then the subject cup and the object cup.
    """
    lexicon = default_lexicon() if lexicon is None else lexicon
    for part in (subject, obj):
        if part.diagram.cod != N:
            raise TypeMismatch(part.diagram.cod, N, f"noun phrase {part.text!r}")
    entry = lexicon[verb]
    if entry.pos != "transitive_verb":
        raise TypeMismatch(entry.pregroup_type, POS_TYPES["transitive_verb"],
                           f"{verb!r} is not a transitive verb")
    d = subject.diagram @ Diagram.from_box(entry.box()) @ obj.diagram
    d = d >> Diagram.from_box(_cup_box(N[0], N.r[0])) @ Id(S @ N.l @ N)
    d = d >> Id(S) @ Diagram.from_box(_cup_box(N.l[0], N[0]))
    return Sentence(subject.tokens + (verb,) + obj.tokens, d)


def noun_phrase(tokens, lexicon: Lexicon | None = None) -> Sentence:
    """A fragment reducing to a single noun, such as 'Bob who is silly'."""
    return parse(tokens, lexicon, target=N)


def question_tokens(text, lexicon: Lexicon | None = None) -> tuple:
    """
    Tokens of a yes/no question: a leading 'does' and trailing '?' are
    dropped and a bare verb after the subject phrase takes its -s form.
    """
    lexicon = default_lexicon() if lexicon is None else lexicon
    raw = text.split() if isinstance(text, str) else list(text)
    raw = [t.rstrip("?") for t in raw if t.rstrip("?")]
    if raw and raw[0].lower() == "does":
        raw = raw[1:]
    out = []
    for t in raw:
        if t not in lexicon and t + "s" in lexicon:
            t = t + "s"
        out.append(t)
    return tuple(out)


# Ground truth.

@dataclass
class RelationalWorld:
    """Which nouns each adjective holds of and which pairs each verb relates."""

    nouns: tuple
    properties: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)

    def holds(self, tokens, lexicon: Lexicon | None = None) -> bool:
        """Truth of a sentence or question under this world."""
        lexicon = default_lexicon() if lexicon is None else lexicon
        tokens = list(tokens)
        value, rest = self._phrase(tokens, lexicon, top=True)
        if rest:
            raise NoReduction(tokens, Ty(*[t for w in rest for t in lexicon[w].pregroup_type]))
        return value

    def _noun(self, tokens, lexicon):
        """Parse 'N (who V X)?' returning (noun, truth of modifiers, rest)."""
        noun, *rest = tokens
        if lexicon[noun].pos != "noun":
            raise NoReduction(tokens, lexicon[noun].pregroup_type)
        ok = True
        if rest and lexicon[rest[0]].pos == "relative_pronoun":
            verb, *rest = rest[1:]
            pos = lexicon[verb].pos
            if pos == "copula":
                adj, *rest = rest
                ok = noun in self.properties.get(adj, set())
            else:
                other, mod, rest = self._noun(rest, lexicon)
                ok = mod and (noun, other) in self.relations.get(verb, set())
        return noun, ok, rest

    def _phrase(self, tokens, lexicon, top):
        subj, ok_s, rest = self._noun(tokens, lexicon)
        verb, *rest = rest
        if lexicon[verb].pos == "copula":
            adj, *rest = rest
            return ok_s and subj in self.properties.get(adj, set()), rest
        obj, ok_o, rest = self._noun(rest, lexicon)
        return ok_s and ok_o and (subj, obj) in self.relations.get(verb, set()), rest

    def to_json(self):
        return {
            "nouns": list(self.nouns),
            "properties": {a: sorted(v) for a, v in sorted(self.properties.items())},
            "relations": {r: sorted(list(p) for p in v) for r, v in sorted(self.relations.items())},
        }

    @classmethod
    def from_json(cls, data) -> "RelationalWorld":
        return cls(tuple(data["nouns"]),
                   {a: set(v) for a, v in data.get("properties", {}).items()},
                   {r: {tuple(p) for p in v} for r, v in data.get("relations", {}).items()})

    @classmethod
    def default(cls) -> "RelationalWorld":
        return cls(("Alice", "Bob"),
                   {"rich": {"Alice"}, "silly": {"Bob"}},
                   {"loves": {("Alice", "Alice")}, "hates": {("Bob", "Alice")}})

    @classmethod
    def random(cls, lexicon: Lexicon, seed) -> "RelationalWorld":
        """
        Each adjective holds of exactly one noun and each verb relates exactly
        one ordered pair, drawn with ``seed``.
        """
        rng = np.random.default_rng(seed)
        nouns = tuple(lexicon.words("noun"))
        props = {a: {nouns[rng.integers(len(nouns))]} for a in lexicon.words("adjective")}
        pairs = list(itertools.product(nouns, nouns))
        rels = {v: {pairs[rng.integers(len(pairs))]} for v in lexicon.words("transitive_verb")}
        return cls(nouns, props, rels)


# Corpus.

@dataclass
class LabeledCorpus:
    """Sentences with 0/1 labels and a train/test partition of their indices."""

    sentences: list
    labels: list
    train: list
    test: list

    def __post_init__(self):
        self.validate()

    def validate(self):
        n = len(self.sentences)
        if len(self.labels) != n:
            raise ValueError("one label per sentence")
        if any(label not in (0, 1) for label in self.labels):
            raise ValueError("labels must be 0 or 1")
        train, test = set(self.train), set(self.test)
        if train & test:
            raise ValueError(f"sentences {sorted(train & test)} are in both splits")
        if train | test != set(range(n)) or len(self.train) + len(self.test) != n:
            raise ValueError("the split must cover every sentence exactly once")
        seen = {t for i in self.train for t in self.sentences[i].tokens}
        for i in self.test:
            missing = set(self.sentences[i].tokens) - seen
            if missing:
                raise ValueError(
                    f"test sentence {self.sentences[i].text!r} uses words not in training: "
                    f"{sorted(missing)}")

    def subset(self, which: str):
        idx = self.train if which == "train" else self.test
        return [(i, self.sentences[i], self.labels[i]) for i in idx]

    @property
    def vocabulary(self) -> list:
        return sorted({t for s in self.sentences for t in s.tokens})

    def to_jsonl(self) -> str:
        split = {i: "train" for i in self.train} | {i: "test" for i in self.test}
        return "".join(json.dumps({"tokens": list(s.tokens), "label": y, "split": split[i]}) + "\n"
                       for i, (s, y) in enumerate(zip(self.sentences, self.labels)))

    def save(self, path):
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str, lexicon: Lexicon | None = None, source="corpus") -> "LabeledCorpus":
        lexicon = default_lexicon() if lexicon is None else lexicon
        sentences, labels, train, test = [], [], [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                tokens, label, split = rec["tokens"], rec["label"], rec["split"]
                if split not in ("train", "test") or label not in (0, 1):
                    raise ValueError(f"bad split {split!r} or label {label!r}")
                sentence = parse(tokens, lexicon)
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"{source}, line {lineno}: {exc}") from None
            except (UnknownWord, NoReduction) as exc:
                raise ConfigError(f"{source}, line {lineno}: {exc}") from None
            (train if split == "train" else test).append(len(sentences))
            sentences.append(sentence)
            labels.append(int(label))
        try:
            return cls(sentences, labels, train, test)
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    @classmethod
    def load(cls, path, lexicon: Lexicon | None = None) -> "LabeledCorpus":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read corpus {path}: {exc}") from None
        return cls.from_jsonl(text, lexicon, source=str(path))


def label_all(sentences, world: RelationalWorld, lexicon: Lexicon | None = None) -> list:
    return [int(world.holds(s.tokens, lexicon)) for s in sentences]


def split_corpus(sentences, labels, test_fraction: float, seed, required_train=(),
                 max_tries: int = 10000) -> tuple:
    """
    Random train/test split, redrawn until every test word occurs in
    training, the test set holds both labels when the corpus does, and
    each ``required_train`` sentence text is in training.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test fraction must lie in (0, 1), got {test_fraction}")
    n = len(sentences)
    n_test = max(1, int(round(test_fraction * n)))
    if n_test >= n:
        raise ValueError("the split leaves no training sentences")
    rng = np.random.default_rng(seed)
    required = set(required_train)
    both = len(set(labels)) > 1
    for _ in range(max_tries):
        order = rng.permutation(n)
        test = sorted(int(i) for i in order[:n_test])
        train = sorted(int(i) for i in order[n_test:])
        if any(sentences[i].text in required for i in test):
            continue
        if both and len({labels[i] for i in test}) < 2:
            continue
        vocab = {t for i in train for t in sentences[i].tokens}
        if all(set(sentences[i].tokens) <= vocab for i in test):
            return train, test
    raise ValueError("no split satisfies the vocabulary and label constraints")


def make_corpus(lexicon: Lexicon | None = None, world: RelationalWorld | None = None,
                test_fraction: float = 0.25, seed=0, required_train=("Alice loves Bob",)):
    lexicon = default_lexicon() if lexicon is None else lexicon
    world = world or RelationalWorld.default()
    sentences = generate_all(lexicon)
    labels = label_all(sentences, world, lexicon)
    train, test = split_corpus(sentences, labels, test_fraction, seed, required_train)
    return LabeledCorpus(sentences, labels, train, test)
