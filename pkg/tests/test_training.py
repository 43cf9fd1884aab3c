import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnlp.circuit import AnsatzConfig, ParameterStore
from qnlp.errors import UnknownWord
from qnlp.grammar import LabeledCorpus, generate_all, label_all, make_corpus, parse
from qnlp.training import (
    CircuitCache, Evaluator, LossReport, SpsaConfig, answer_question, corpus_shapes,
    load_checkpoint, load_model, loss, save_checkpoint, save_model, spsa_minimize, spsa_step,
    train,
)


def bowl(target):
    return lambda x: float(np.sum((np.asarray(x) - target) ** 2))


def random_store(corpus, lexicon, seed):
    shapes = corpus_shapes(corpus, AnsatzConfig(), lexicon)
    return ParameterStore.random(shapes, np.random.default_rng(seed)), shapes


class TestLoss:
    def test_perfect_predictions(self):
        r = LossReport(0.0, [(0, 1.0, 1, 0.0), (1, 0.0, 0, 0.0)])
        assert r.total == 0 and r.accuracy() == 1.0

    def test_half_against_one(self, corpus, lexicon, monkeypatch):
        data = corpus.subset("train")[:1]
        monkeypatch.setattr(Evaluator, "predict", lambda self, c, p, call=0: 0.5)
        rep = loss({}, [(data[0][0], data[0][1], 1)])
        assert rep.total == 0.25 and rep.per_sentence[0][3] == 0.25

    def test_total_is_sum_and_nonnegative(self, corpus, lexicon):
        params, _ = random_store(corpus, lexicon, 3)
        rep = loss(params, corpus.subset("train"))
        assert rep.total >= 0
        assert np.isclose(rep.total, sum(r[3] for r in rep.per_sentence))
        for _, pred, label, dist in rep.per_sentence:
            assert 0 <= pred <= 1 and np.isclose(dist, (pred - label) ** 2)

    def test_deterministic_and_thread_invariant(self, corpus, lexicon):
        params, _ = random_store(corpus, lexicon, 4)
        a = loss(params, corpus.subset("train"))
        b = loss(params, corpus.subset("train"), workers=4)
        assert a.per_sentence == b.per_sentence

    def test_directional_derivative_sign(self, corpus, lexicon):
        """Central differences at 1e-5 against a five-point stencil at 1e-3."""
        data = corpus.subset("train")
        cache = CircuitCache(AnsatzConfig())
        _, shapes = random_store(corpus, lexicon, 0)
        words = sorted(shapes)
        rng = np.random.default_rng(11)

        def f(theta):
            return loss(ParameterStore.unflatten(theta, shapes, words), data, circuits=cache).total

        for _ in range(3):
            theta = rng.uniform(0, 2 * np.pi, sum(shapes.values()))
            for _ in range(5):
                d = rng.normal(size=theta.size)
                d /= np.linalg.norm(d)
                h = 1e-5
                central = (f(theta + h * d) - f(theta - h * d)) / (2 * h)
                g = 1e-3
                stencil = (-f(theta + 2 * g * d) + 8 * f(theta + g * d)
                           - 8 * f(theta - g * d) + f(theta - 2 * g * d)) / (12 * g)
                assert np.sign(central) == np.sign(stencil)
                assert abs(central - stencil) < 1e-4 * max(1.0, abs(stencil))


class TestSpsa:
    @pytest.mark.parametrize("seed", range(10))
    def test_quadratic_bowl(self, seed):
        target = np.random.default_rng(100 + seed).uniform(-2, 2, 4)
        _, history = spsa_minimize(bowl(target), np.zeros(4), SpsaConfig(iterations=500, seed=seed),
                                   wrap=False)
        assert history[-1] < 1e-2

    def test_zero_gain_leaves_params(self):
        theta = np.array([0.3, 1.2, 5.0])
        out = spsa_step(theta, bowl(np.zeros(3)), 1, SpsaConfig(a=0.0), np.random.default_rng(0))
        assert np.array_equal(out, theta)

    def test_same_seed_same_trajectory(self):
        cfg = SpsaConfig(iterations=50, seed=3)
        a = spsa_minimize(bowl(np.ones(3)), np.zeros(3), cfg)
        b = spsa_minimize(bowl(np.ones(3)), np.zeros(3), cfg)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_angles_wrapped(self):
        theta = spsa_step(np.array([6.2, 0.01]), bowl(np.array([9.0, -3.0])), 1,
                          SpsaConfig(a=5.0), np.random.default_rng(0))
        assert np.all((0 <= theta) & (theta < 2 * np.pi))

    def test_iteration_index_from_one(self):
        with pytest.raises(ValueError):
            spsa_step(np.zeros(2), bowl(np.zeros(2)), 0, SpsaConfig(), np.random.default_rng(0))

    def test_gain_sequences(self):
        cfg = SpsaConfig(a=0.5, c=0.2, A=10, alpha_decay=0.602, gamma_decay=0.101)
        a_k, c_k = cfg.gains(3)
        assert np.isclose(a_k, 0.5 / 13 ** 0.602) and np.isclose(c_k, 0.2 / 3 ** 0.101)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SpsaConfig(c=0)


class TestTrain:
    def test_zero_iterations(self, corpus):
        r = train(corpus, SpsaConfig(iterations=0))
        assert len(r.loss_history) == 1
        assert np.isclose(r.loss_history[0], r.train_report.total)

    def test_history_length_and_determinism(self, corpus):
        cfg = SpsaConfig(iterations=5, a=2.0, c=0.3)
        a = train(corpus, cfg, init_seed=2)
        b = train(corpus, cfg, init_seed=2)
        assert len(a.loss_history) == 6
        assert a.loss_history == b.loss_history
        assert a.final_params.to_json() == b.final_params.to_json()

    def test_checkpoints(self, corpus, tmp_path):
        r = train(corpus, SpsaConfig(iterations=4), checkpoint_every=2)
        assert [c["iteration"] for c in r.checkpoints] == [2, 4]
        path = tmp_path / "ck.json"
        save_checkpoint(path, 4, r.final_params, r.loss_history[-1])
        k, params, value = load_checkpoint(path)
        assert k == 4 and params.to_json() == r.final_params.to_json()

    def test_shot_mode_runs(self, corpus):
        r = train(corpus, SpsaConfig(iterations=2), evaluator=Evaluator("shots", 256, 0))
        assert len(r.loss_history) == 3


def test_parameter_sharing(corpus, lexicon):
    """Perturbing one word changes exactly the sentences that contain it."""
    params, _ = random_store(corpus, lexicon, 5)
    everything = [(i, s, y) for i, (s, y) in enumerate(zip(corpus.sentences, corpus.labels))]
    cache = CircuitCache(AnsatzConfig())
    before = {sid: p for sid, p, _, _ in loss(params, everything, circuits=cache).per_sentence}
    for word in sorted(params):
        bumped = params.copy()
        bumped[word] = np.asarray(bumped[word]) + 0.7
        after = {sid: p for sid, p, _, _ in loss(bumped, everything, circuits=cache).per_sentence}
        changed = {sid for sid in before if abs(before[sid] - after[sid]) > 1e-12}
        containing = {i for i, s in enumerate(corpus.sentences) if word in s.tokens}
        assert changed == containing, word


class TestQuestions:
    def test_unknown_word(self, corpus, lexicon):
        params, _ = random_store(corpus, lexicon, 0)
        del params["rich"]
        with pytest.raises(UnknownWord):
            answer_question("Bob who is silly loves Alice who is rich".split(), params)

    def test_question_equal_to_train_sentence(self, corpus, lexicon):
        params, _ = random_store(corpus, lexicon, 1)
        rep = loss(params, corpus.subset("train"))
        sid, pred, _, _ = rep.per_sentence[0]
        value, answer = answer_question(corpus.sentences[sid], params)
        assert np.isclose(value, pred) and answer == (pred >= 0.5)

    def test_model_roundtrip(self, corpus, lexicon, tmp_path):
        params, _ = random_store(corpus, lexicon, 2)
        save_model(tmp_path / "m.json", params, AnsatzConfig(), lexicon)
        p2, ansatz, lex2 = load_model(tmp_path / "m.json")
        q = "Bob who is silly loves Alice who is rich".split()
        assert answer_question(q, p2, ansatz, lex2) == answer_question(q, params)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=10)
def test_loss_zero_exactly_at_perfect_labels(seed):
    from qnlp.grammar import default_lexicon
    lex = default_lexicon()
    sents = generate_all(lex)[:4]
    corpus = LabeledCorpus(sents, [0] * 4, [0, 1, 2, 3], [])
    params, _ = random_store(corpus, lex, seed)
    rep = loss(params, corpus.subset("train"))
    relabeled = [(sid, corpus.sentences[sid], pred) for sid, pred, _, _ in rep.per_sentence]
    assert loss(params, relabeled).total == 0
