"""Ordinal labels as overlapping threshold tasks, trained jointly.

Modules: ``labels`` (task decomposition), ``synthgen`` (synthetic cohorts),
``nn`` (numpy network engine), ``folds`` (grouped CV), ``metrics`` (ROC and
TNR at a TPR floor) and ``harness`` (experiments, reports, CLI).
"""

__version__ = "0.1.0"
