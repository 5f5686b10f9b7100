"""Core types and densities for the one-parameter Poisson-Dirichlet model.

A sample of discrete observations is summarized by its abundance partition:
``rho_t`` counts how many distinct species were observed exactly ``t`` times.
Everything downstream (the Ewens sampling formula, maximum likelihood, the
predictive probabilities of the urn scheme) depends on the data only through
that partition, so this module owns the two data containers and the two
probability functions that every other module builds on.

Species identifiers are opaque non-negative integers assigned by ingestion
code in order of first appearance; no numeric result may depend on their
values, only on the multiset of frequencies.

All containers are immutable after construction and all operations are pure
functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NEW",
    "Partition",
    "SpeciesCounts",
    "esf_log_pmf",
    "partition_of",
    "predictive_prob",
]

# Above this size the log rising factorial switches from explicit summation
# to a log-gamma difference (the direct sum would allocate O(n) temporaries).
_DIRECT_LOG_SUM_LIMIT = 100_000


class _NewSpecies:
    """Sentinel naming the event "a species not seen before"."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "NEW"


#: Pass as the ``species`` argument of :func:`predictive_prob` to ask for the
#: probability that the next observation is a previously unseen species.
NEW = _NewSpecies()


def _check_psi(psi: float) -> float:
    """Validate a dispersal parameter: positive and finite."""
    psi = float(psi)
    if not math.isfinite(psi) or psi <= 0.0:
        raise ValueError(
            f"dispersal parameter must be a positive finite number, got {psi!r}"
        )
    return psi


@dataclass(frozen=True)
class SpeciesCounts:
    """Frequency table ``species id -> count`` for one sample.

    Species absent from the sample are absent from the map, so every stored
    count is at least 1. ``n`` is the total sample size. The container is
    treated as immutable after construction.
    """

    counts: Mapping[int, int]
    n: int = field(init=False)

    def __post_init__(self) -> None:
        clean: dict[int, int] = {}
        total = 0
        for species, count in self.counts.items():
            species = int(species)
            count = int(count)
            if species < 0:
                raise ValueError(f"species ids must be non-negative, got {species}")
            if count < 1:
                raise ValueError(f"species {species} has non-positive count {count}")
            clean[species] = count
            total += count
        object.__setattr__(self, "counts", clean)
        object.__setattr__(self, "n", total)

    @classmethod
    def from_values(cls, values: Iterable[int] | np.ndarray) -> "SpeciesCounts":
        """Count occurrences of each species id in a sequence of observations."""
        if isinstance(values, np.ndarray):
            if values.size == 0:
                return cls({})
            if values.ndim != 1:
                raise ValueError("expected a 1-d array of species ids")
            binc = np.bincount(values)
            return cls({int(s): int(binc[s]) for s in np.nonzero(binc)[0]})
        return cls(dict(Counter(int(v) for v in values)))

    @property
    def k_obs(self) -> int:
        """Number of distinct species observed."""
        return len(self.counts)


@dataclass(frozen=True)
class Partition:
    """Abundance partition of a sample of size ``n``.

    Stored sparsely as ascending ``(t, rho_t)`` pairs with ``rho_t > 0``,
    where ``rho_t`` is the number of species observed exactly ``t`` times.
    The defining constraint is ``sum(t * rho_t) == n``.
    """

    n: int
    rho: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 1:
            raise ValueError(f"sample size must be at least 1, got {n}")
        pairs = tuple((int(t), int(m)) for t, m in self.rho)
        previous_t = 0
        mass = 0
        for t, m in pairs:
            if t <= previous_t:
                raise ValueError("abundance entries must have unique ascending t")
            if t > n:
                raise ValueError(f"abundance {t} exceeds sample size {n}")
            if m < 1:
                raise ValueError(f"stored multiplicity rho_{t} must be positive")
            previous_t = t
            mass += t * m
        if mass != n:
            raise ValueError(
                f"invalid partition: sum(t * rho_t) = {mass} but n = {n}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rho", pairs)

    @classmethod
    def from_dense(cls, rho: Iterable[int]) -> "Partition":
        """Build from a dense ``(rho_1, rho_2, ...)`` vector; trailing zeros ok."""
        pairs = tuple(
            (t, int(m)) for t, m in enumerate(rho, start=1) if int(m) != 0
        )
        n = sum(t * m for t, m in pairs)
        return cls(n=n, rho=pairs)

    def to_dense(self) -> tuple[int, ...]:
        """Dense ``(rho_1, ..., rho_n)`` vector; intended for small ``n``."""
        dense = [0] * self.n
        for t, m in self.rho:
            dense[t - 1] = m
        return tuple(dense)

    @property
    def k_obs(self) -> int:
        """Number of distinct species, ``sum(rho_t)``."""
        return sum(m for _, m in self.rho)


def partition_of(counts: SpeciesCounts) -> Partition:
    """Reduce a frequency table to its abundance partition.

    Raises:
        ValueError: if the sample is empty.
    """
    if counts.n == 0:
        raise ValueError("empty sample")
    multiplicity = Counter(counts.counts.values())
    return Partition(
        n=counts.n, rho=tuple(sorted((t, m) for t, m in multiplicity.items()))
    )


def _log_rising_factorial(psi: float, n: int) -> float:
    """log of psi * (psi + 1) * ... * (psi + n - 1)."""
    if n <= _DIRECT_LOG_SUM_LIMIT:
        return float(np.log(psi + np.arange(n, dtype=np.float64)).sum())
    return math.lgamma(psi + n) - math.lgamma(psi)


def esf_log_pmf(rho: Partition, psi: float) -> float:
    """Log probability of an abundance partition under the Ewens sampling formula.

    Computes ``log p(rho | psi)`` for

        p = n! / (psi * (psi+1) * ... * (psi+n-1))
            * prod_t (psi / t)^{rho_t} / rho_t!

    entirely in log space so that large samples neither overflow nor
    underflow.

    Raises:
        ValueError: if ``psi`` is not a positive finite number.
    """
    psi = _check_psi(psi)
    log_p = math.lgamma(rho.n + 1) - _log_rising_factorial(psi, rho.n)
    log_psi = math.log(psi)
    for t, m in rho.rho:
        log_p += m * (log_psi - math.log(t)) - math.lgamma(m + 1)
    return log_p


def predictive_prob(
    counts: SpeciesCounts, psi: float, species: int | _NewSpecies = NEW
) -> float:
    """Predictive probability of the next observation given ``counts``.

    An already-observed species ``j`` has probability ``n_j / (n + psi)``;
    :data:`NEW` (or any id absent from ``counts``) has probability
    ``psi / (n + psi)``. Over the observed species plus NEW these sum to one.
    ``counts`` may be empty, in which case NEW has probability 1.
    """
    psi = _check_psi(psi)
    denominator = counts.n + psi
    if isinstance(species, _NewSpecies) or species not in counts.counts:
        return psi / denominator
    return counts.counts[species] / denominator
