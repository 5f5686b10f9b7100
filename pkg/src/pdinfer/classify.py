"""Predictive supervised classification under partition exchangeability.

Two classifiers share one training summary. The marginal classifier scores
each test item independently with its class-conditional predictive
probability and takes the best class. The simultaneous classifier scores a
whole labeling jointly — a test item's probability also counts the other
test items currently assigned to the same class that share its value — and
climbs that joint score greedily: start from the marginal labeling, sweep
the items, reassign an item only when moving it strictly improves the joint
score, and stop when a sweep changes nothing.

The joint score factorizes over (class, value) groups: every one of the
``q`` co-assigned test items holding the same value sees ``q - 1`` twins, so
a sweep step only needs the group counts, making a full sweep O(items x
classes).
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import SpeciesCounts, partition_of
from .estimation import PsiEstimate, fit_psi
from .sampling import derive_seeds

__all__ = [
    "ClassModel",
    "ClassificationResult",
    "DegenerateClassWarning",
    "Labeling",
    "TrainingModel",
    "classify_marginal",
    "classify_simultaneous",
    "counts_by_class",
    "marginal_log_score",
    "simultaneous_log_score",
    "train",
    "train_from_counts",
]

#: A labeling is a vector of class ids, one per test item.
Labeling = np.ndarray

# Accept a reassignment only past this margin, so equal-score labelings can
# never cycle.
_IMPROVE_EPS = 1e-12


class DegenerateClassWarning(UserWarning):
    """A training class has a boundary dispersal fit; predictions use the clamp."""


@dataclass(frozen=True)
class ClassModel:
    """Training summary of one class: value counts and fitted dispersal."""

    class_id: int
    value_counts: SpeciesCounts
    psi_hat: PsiEstimate

    @property
    def m_c(self) -> int:
        """Number of training items in the class."""
        return self.value_counts.n


@dataclass(frozen=True)
class TrainingModel:
    """Per-class training summaries with contiguous class ids ``0..k-1``."""

    classes: tuple[ClassModel, ...]

    @property
    def k(self) -> int:
        return len(self.classes)


@dataclass(frozen=True, eq=False)
class ClassificationResult:
    """Predicted labeling with its log predictive score.

    ``per_item_log[i]`` is item ``i``'s own log factor under the returned
    labeling; the factors sum to ``log_score`` for both classifiers.
    ``sweeps`` is 0 for the marginal classifier.
    """

    labeling: Labeling
    log_score: float
    per_item_log: np.ndarray
    sweeps: int
    converged: bool


def counts_by_class(labels: np.ndarray, values: np.ndarray) -> list[SpeciesCounts]:
    """Split a labeled dataset into per-class frequency tables."""
    labels = np.asarray(labels, dtype=np.int64)
    values = np.asarray(values, dtype=np.int64)
    if labels.shape != values.shape or labels.ndim != 1:
        raise ValueError("labels and values must be 1-d arrays of equal length")
    if labels.size == 0:
        raise ValueError("empty training data")
    present = np.unique(labels)
    k = int(present[-1]) + 1
    if len(present) != k:
        raise ValueError(
            f"class ids must be contiguous 0..k-1, got {present.tolist()}"
        )
    return [SpeciesCounts.from_values(values[labels == c]) for c in range(k)]


def train_from_counts(per_class_counts: Sequence[SpeciesCounts]) -> TrainingModel:
    """Fit one dispersal parameter per class from prepared frequency tables.

    Degenerate classes (one distinct value, or all values distinct) keep
    their flagged boundary estimate and trigger a
    :class:`DegenerateClassWarning`; classification proceeds with the
    clamped value.
    """
    if len(per_class_counts) < 2:
        raise ValueError(f"need at least 2 training classes, got {len(per_class_counts)}")
    classes = []
    for class_id, value_counts in enumerate(per_class_counts):
        if value_counts.n == 0:
            raise ValueError(f"class {class_id} has no training items")
        estimate = fit_psi(partition_of(value_counts))
        if not estimate.converged:
            warnings.warn(
                f"class {class_id}: dispersal fit is {estimate.status}; "
                f"predictions use boundary value {estimate.psi_hat:g}",
                DegenerateClassWarning,
                stacklevel=2,
            )
        classes.append(ClassModel(class_id, value_counts, estimate))
    return TrainingModel(classes=tuple(classes))


def train(labeled_data: Iterable[tuple[int, int]]) -> TrainingModel:
    """Build a training model from ``(class id, species id)`` pairs."""
    pairs = [(int(c), int(v)) for c, v in labeled_data]
    if not pairs:
        raise ValueError("empty training data")
    labels = np.fromiter((c for c, _ in pairs), dtype=np.int64, count=len(pairs))
    values = np.fromiter((v for _, v in pairs), dtype=np.int64, count=len(pairs))
    return train_from_counts(counts_by_class(labels, values))


def marginal_log_score(model: TrainingModel, item_value: int, class_id: int) -> float:
    """Log predictive probability of one value under one class's training data."""
    class_model = model.classes[class_id]
    m_cl = class_model.value_counts.counts.get(int(item_value), 0)
    psi = class_model.psi_hat.psi_hat
    numerator = m_cl if m_cl > 0 else psi
    return math.log(numerator) - math.log(class_model.m_c + psi)


def _as_test_values(test_values: Sequence[int] | np.ndarray) -> np.ndarray:
    values = np.asarray(test_values, dtype=np.int64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("test values must be a non-empty 1-d sequence")
    return values


def classify_marginal(
    model: TrainingModel, test_values: Sequence[int] | np.ndarray
) -> ClassificationResult:
    """Assign every test item independently to its best-scoring class.

    Ties break toward the lowest class id. Each assignment depends only on
    the item's own value, so item order never matters.
    """
    values = _as_test_values(test_values)
    unique_values, inverse = np.unique(values, return_inverse=True)
    scores = np.empty((unique_values.size, model.k))
    for c, class_model in enumerate(model.classes):
        counts = class_model.value_counts.counts
        psi = class_model.psi_hat.psi_hat
        log_denominator = math.log(class_model.m_c + psi)
        column = np.array(
            [counts.get(int(v), 0) for v in unique_values], dtype=np.float64
        )
        scores[:, c] = (
            np.where(column > 0, np.log(np.maximum(column, 1.0)), math.log(psi))
            - log_denominator
        )
    best = np.argmax(scores, axis=1)  # first max -> lowest class id on ties
    labeling = best[inverse]
    per_item_log = scores[inverse, labeling]
    return ClassificationResult(
        labeling=labeling,
        log_score=float(per_item_log.sum()),
        per_item_log=per_item_log,
        sweeps=0,
        converged=True,
    )


def simultaneous_log_score(
    model: TrainingModel,
    test_values: Sequence[int] | np.ndarray,
    labeling: Labeling,
    item: int,
    class_id: int,
) -> float:
    """Log factor of one item under the joint predictive score.

    Counts the other test items with item ``item``'s value currently labeled
    ``class_id``; with no such co-assigned twins this reduces exactly to
    :func:`marginal_log_score`. Whether the value counts as "seen" depends
    on the training data only.
    """
    values = _as_test_values(test_values)
    labeling = np.asarray(labeling, dtype=np.int64)
    if labeling.shape != values.shape:
        raise ValueError("labeling and test values must have the same length")
    if not 0 <= item < values.size:
        raise ValueError(f"item index {item} out of range")
    if not 0 <= class_id < model.k:
        raise ValueError(f"class id {class_id} out of range")
    twins = (values == values[item]) & (labeling == class_id)
    n_icl = int(twins.sum()) - int(twins[item])
    class_model = model.classes[class_id]
    m_cl = class_model.value_counts.counts.get(int(values[item]), 0)
    psi = class_model.psi_hat.psi_hat
    numerator = m_cl + n_icl if m_cl > 0 else psi
    return math.log(numerator) - math.log(class_model.m_c + n_icl + psi)


class _JointState:
    """Grouped view of the joint score: counts per (unique value, class)."""

    def __init__(self, model: TrainingModel, values: np.ndarray):
        unique_values, inverse = np.unique(values, return_inverse=True)
        self.inverse = inverse.tolist()
        self.k = model.k
        self.m_c = [float(cm.m_c) for cm in model.classes]
        self.psi = [float(cm.psi_hat.psi_hat) for cm in model.classes]
        self.train_counts = [
            [float(cm.value_counts.counts.get(int(v), 0)) for cm in model.classes]
            for v in unique_values
        ]
        self.n_unique = unique_values.size

    def item_log(self, u: int, c: int, q: int) -> float:
        """Log factor of one member of a group of ``q`` co-assigned items."""
        m = self.train_counts[u][c]
        numerator = m + q - 1.0 if m > 0.0 else self.psi[c]
        return math.log(numerator / (self.m_c[c] + q - 1.0 + self.psi[c]))

    def group_term(self, u: int, c: int, q: int) -> float:
        """Joint-score contribution of a whole group of ``q`` items."""
        return q * self.item_log(u, c, q) if q else 0.0

    def total(self, group_counts: list[list[int]]) -> float:
        return sum(
            self.group_term(u, c, row[c])
            for u, row in enumerate(group_counts)
            for c in range(self.k)
            if row[c]
        )


def _greedy_sweeps(
    state: _JointState,
    initial_labels: list[int],
    rng: np.random.Generator | None,
    max_sweeps: int,
) -> tuple[list[int], list[list[int]], float, int, bool]:
    labels = list(initial_labels)
    group_counts = [[0] * state.k for _ in range(state.n_unique)]
    for i, u in enumerate(state.inverse):
        group_counts[u][labels[i]] += 1

    n = len(labels)
    inverse = state.inverse
    term = state.group_term
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        order = rng.permutation(n).tolist() if rng is not None else range(n)
        changed = False
        for i in order:
            u = inverse[i]
            current = labels[i]
            row = group_counts[u]
            leave_gain = term(u, current, row[current] - 1) - term(
                u, current, row[current]
            )
            best_delta = 0.0
            best_class = current
            for c in range(state.k):
                if c == current:
                    continue
                delta = leave_gain + term(u, c, row[c] + 1) - term(u, c, row[c])
                if delta > best_delta:
                    best_delta = delta
                    best_class = c
            if best_class != current and best_delta > _IMPROVE_EPS:
                row[current] -= 1
                row[best_class] += 1
                labels[i] = best_class
                changed = True
        if not changed:
            converged = True
            break
    return labels, group_counts, state.total(group_counts), sweeps, converged


def classify_simultaneous(
    model: TrainingModel,
    test_values: Sequence[int] | np.ndarray,
    *,
    max_sweeps: int = 100,
    sweep_order: str = "input",
    order_seed: int = 0,
    restarts: int = 1,
) -> ClassificationResult:
    """Greedy joint classification of all test items.

    Starts from the marginal labeling, then sweeps the items (in input order
    by default, ``sweep_order="shuffled"`` re-permutes each sweep),
    reassigning an item only when that strictly improves the joint score.
    Stops when a sweep makes no change or ``max_sweeps`` is hit; the greedy
    ascent reaches a local optimum of the joint score. ``restarts > 1`` runs
    additional greedy passes with shuffled sweep orders derived from
    ``order_seed`` and keeps the best-scoring labeling.
    """
    values = _as_test_values(test_values)
    if sweep_order not in ("input", "shuffled"):
        raise ValueError(f"sweep_order must be 'input' or 'shuffled', got {sweep_order!r}")
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be at least 1, got {max_sweeps}")

    initial_labels = classify_marginal(model, values).labeling.tolist()
    state = _JointState(model, values)

    shuffling = sweep_order == "shuffled" or restarts > 1
    run_seeds = derive_seeds(order_seed, restarts) if shuffling else None
    best = None
    for run in range(restarts):
        if sweep_order == "shuffled" or run > 0:
            rng = np.random.default_rng(run_seeds[run])
        else:
            rng = None
        outcome = _greedy_sweeps(state, initial_labels, rng, max_sweeps)
        if best is None or outcome[2] > best[2]:
            best = outcome
    labels, group_counts, total, sweeps, converged = best

    per_item_log = np.array(
        [
            state.item_log(u, labels[i], group_counts[u][labels[i]])
            for i, u in enumerate(state.inverse)
        ]
    )
    return ClassificationResult(
        labeling=np.asarray(labels, dtype=np.int64),
        log_score=total,
        per_item_log=per_item_log,
        sweeps=sweeps,
        converged=converged,
    )
