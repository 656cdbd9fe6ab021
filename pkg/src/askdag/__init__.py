"""Discrete Bayesian network structure learning with a human in the loop.

Tabu search over arc changes scored by BIC, optionally pausing at
doubtful changes to ask an oracle — simulated from a known graph, or a
person answering through the bundled service.
"""

from askdag.graph import Change, ChangeKind, Dag, Pdag, dag_to_cpdag
from askdag.kernels import BACKEND as kernel_backend
from askdag.knowledge import KnowledgeConstraints, SimulatedExpert, Verdict
from askdag.metrics import confusion_dag, f1, shd_dag
from askdag.search import Criterion, SearchConfig, SearchResult, tabu_al

__version__ = "0.1.0"

__all__ = [
    "Change",
    "ChangeKind",
    "Criterion",
    "Dag",
    "KnowledgeConstraints",
    "Pdag",
    "SearchConfig",
    "SearchResult",
    "SimulatedExpert",
    "Verdict",
    "confusion_dag",
    "dag_to_cpdag",
    "f1",
    "kernel_backend",
    "shd_dag",
    "tabu_al",
    "__version__",
]
