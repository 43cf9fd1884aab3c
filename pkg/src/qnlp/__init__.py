"""Sentences as parameterised quantum circuits.

Pregroup parsing produces string diagrams, which compile through ZX rewriting
into IQP circuits.  The circuits are simulated exactly or by sampling and
trained with SPSA.  Density matrices cover word meaning and hyponymy.
"""

from qnlp.circuit import AnsatzConfig, ParameterStore, apply_qubit_reduction, compile_sentence, to_qasm
from qnlp.density import DensityMatrix, is_hyponym, mix_meanings
from qnlp.grammar import default_lexicon, generate_all, make_corpus, parse
from qnlp.simulator import evaluate, sample
from qnlp.training import SpsaConfig, answer_question, train

__version__ = "0.1.0"

__all__ = [
    "AnsatzConfig", "DensityMatrix", "ParameterStore", "SpsaConfig", "answer_question",
    "apply_qubit_reduction", "compile_sentence", "default_lexicon", "evaluate",
    "generate_all", "is_hyponym", "make_corpus", "mix_meanings", "parse", "sample",
    "to_qasm", "train",
]
