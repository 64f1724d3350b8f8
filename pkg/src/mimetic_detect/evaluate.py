"""Corpus-level scoring: ROC AUC and operating-point rates.

AUC is the Mann-Whitney rank statistic: the probability that a perturbed
image scores above a clean one, ties counted 1/2.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def auc_rank(clean_ts, adv_ts) -> float:
    """Rank-statistic AUC of adversarial over clean scores."""
    clean = np.asarray(list(clean_ts), dtype=float)
    adv = np.asarray(list(adv_ts), dtype=float)
    if clean.size == 0 or adv.size == 0:
        raise ValueError("both score sets must be non-empty")
    ranks = rankdata(np.concatenate([clean, adv]))
    u = ranks[clean.size:].sum() - adv.size * (adv.size + 1) / 2.0
    return float(u / (clean.size * adv.size))


def rates_at_threshold(clean_ts, adv_ts, tau: float) -> tuple[float, float]:
    """(FPR, TPR) under the strict t > tau rule."""
    clean = np.asarray(list(clean_ts), dtype=float)
    adv = np.asarray(list(adv_ts), dtype=float)
    return float(np.mean(clean > tau)), float(np.mean(adv > tau))


@dataclass(frozen=True)
class EvalSummary:
    """Scores of a labeled corpus plus the derived ROC numbers."""

    scores: tuple  # of (label, name, t); labels "clean" / "adversarial"
    auc: float
    tau: float | None = None
    fpr: float | None = None
    tpr: float | None = None

    def to_dict(self) -> dict:
        return {
            "scores": [
                {"label": label, "name": name, "t": t} for label, name, t in self.scores
            ],
            "auc": self.auc,
            "tau": self.tau,
            "fpr": self.fpr,
            "tpr": self.tpr,
        }


def evaluate_corpus(clean_scores, adv_scores, tau: float | None = None) -> EvalSummary:
    """Summarize named scores of a clean and a perturbed corpus.

    Both arguments are sequences of (name, t) pairs; per-image entries are
    kept in the summary for audit.
    """
    clean_scores = list(clean_scores)
    adv_scores = list(adv_scores)
    auc = auc_rank([t for _, t in clean_scores], [t for _, t in adv_scores])
    fpr = tpr = None
    if tau is not None:
        fpr, tpr = rates_at_threshold(
            [t for _, t in clean_scores], [t for _, t in adv_scores], tau
        )
    scores = tuple(
        [("clean", name, float(t)) for name, t in clean_scores]
        + [("adversarial", name, float(t)) for name, t in adv_scores]
    )
    return EvalSummary(scores=scores, auc=auc, tau=tau, fpr=fpr, tpr=tpr)
