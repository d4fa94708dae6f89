"""Causal-discovery toolkit for discrete tabular data.

Candidate causal DAGs come from three generators (LLM elicitation, the PC
algorithm, NOTEARS); graphs are validated against data with BDeu scores via
Bayesian-network fitting, and intervention effects are estimated by exact
inference.
"""

from .graph import Dag, Pdag, VariableScheme

__all__ = ["Dag", "Pdag", "VariableScheme"]
__version__ = "0.1.0"
