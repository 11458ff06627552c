"""Threshold classification of binned difference counts."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dynamics import DOWN, UP, Trajectory
from .errors import DomainError


def _best_threshold(x, y, polarity):
    """Threshold maximizing accuracy of ``polarity * (x - c) > 0 -> UP``."""
    z = polarity * x
    order = np.argsort(z, kind="stable")
    z, y = z[order], y[order]
    n = len(z)
    is_up = (y == UP).astype(np.int64)
    # predicting UP for the samples above the cut at position k
    up_below = np.concatenate(([0], np.cumsum(is_up)))
    down_below = np.arange(n + 1) - up_below
    correct = down_below + (up_below[-1] - up_below)
    # only cut between distinct values
    valid = np.ones(n + 1, dtype=bool)
    valid[1:n] = z[1:] != z[:-1]
    k = int(np.argmax(np.where(valid, correct, -1)))
    if k == 0:
        cut = z[0] - 1.0
    elif k == n:
        cut = z[-1]
    else:
        cut = 0.5 * (z[k - 1] + z[k])
    return polarity * cut


class ThresholdReadout(ClassifierMixin, BaseEstimator):
    """Classify spin from a scalar readout signal by thresholding.

    Parameters
    ----------
    threshold : float or None
        Fixed decision threshold. ``None`` searches for the threshold with
        the highest training accuracy.
    polarity : {+1, -1} or None
        Sign of (signal - threshold) that means spin up. ``None`` infers it
        from the class means.
    """

    def __init__(self, threshold=None, polarity=None):
        self.threshold = threshold
        self.polarity = polarity

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False)
        x = np.asarray(X, dtype=float).reshape(len(y), -1)[:, 0]
        y = np.where(np.asarray(y) > 0, UP, DOWN)
        self.classes_ = np.array([DOWN, UP])
        if self.polarity is None:
            if np.any(y == UP) and np.any(y == DOWN):
                gap = x[y == UP].mean() - x[y == DOWN].mean()
                self.polarity_ = -1 if gap < 0 else 1
            else:
                self.polarity_ = 1
        else:
            self.polarity_ = 1 if self.polarity >= 0 else -1
        if self.threshold is None:
            self.threshold_ = float(_best_threshold(x, y, self.polarity_))
        else:
            self.threshold_ = float(self.threshold)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "threshold_")
        X = check_array(X, ensure_2d=False)
        x = np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0]
        return self.polarity_ * (x - self.threshold_)

    def predict(self, X):
        return np.where(self.decision_function(X) > 0, UP, DOWN)


@dataclass(frozen=True)
class FidelityResult:
    fidelity: float
    threshold: float
    degenerate: bool = False


def estimate_readout_fidelity(traj: Trajectory, threshold=None) -> FidelityResult:
    """Fraction of bins whose thresholded diff count matches the hidden spin.

    The sign convention (which side of the threshold means spin up) comes
    from the trajectory's expected per-state means. ``threshold=None``
    searches for the best threshold.
    """
    if traj.n_bins < 100:
        raise DomainError(f"need at least 100 bins, got {traj.n_bins}")
    hidden = traj.hidden_spin
    if np.all(hidden == hidden[0]):
        warnings.warn("trajectory never leaves one spin state; fidelity is not informative",
                      RuntimeWarning, stacklevel=2)
        return FidelityResult(1.0, float("nan") if threshold is None else float(threshold),
                              degenerate=True)
    polarity = -1 if traj.mean_diff_up < traj.mean_diff_down else 1
    clf = ThresholdReadout(threshold=threshold, polarity=polarity)
    x = traj.diff_count.astype(float)
    clf.fit(x, hidden)
    return FidelityResult(float(clf.score(x, hidden)), clf.threshold_)
