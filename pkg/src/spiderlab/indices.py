"""Degree-based topological indices of spider trees.

Most indices here belong to the power-sum family ``sum_v h(deg_v)**alpha``
for a positive degree function h; the named ones are the classical Zagreb
index (alpha = 2), the forgotten index (alpha = 3), the generalized Zagreb
index for arbitrary nonzero alpha, and the Gordon-Scantlebury and Platt
indices, which are affine in Zagreb.  Two inequality-style measures join
them: a degree-based Gini index (normalized pairwise absolute degree
differences) and a degree-based Hoover index (normalized absolute
deviations from the average degree).

Every index can be evaluated two ways: directly from a tree's degree
multiset (``eval_direct``), or through its closed form in the pair
(time n, leaf count L) (``eval_reduced``).  On a spider tree the degree
multiset is {L: 1, 1: L, 2: n + 2 - L}, so the two routes agree on every
reachable tree; the test suite holds them together.

Arithmetic follows the inputs: named indices and integer exponents give
exact ints/Fractions, real exponents give floats.  ``reduced_values`` is
the vectorised float64 path used by the Monte Carlo engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

import numpy as np

from .tree import TreeState, degree_multiset

__all__ = [
    "UnknownIndexError",
    "Identity",
    "Affine",
    "Table",
    "Leaves",
    "Zagreb",
    "GordonScantlebury",
    "Platt",
    "Forgotten",
    "Gini",
    "Hoover",
    "GeneralizedZagreb",
    "Generic",
    "IndexSpec",
    "LEAVES",
    "ZAGREB",
    "GORDON_SCANTLEBURY",
    "PLATT",
    "FORGOTTEN",
    "GINI",
    "HOOVER",
    "NAMED_INDICES",
    "parse_index",
    "index_name",
    "eval_direct",
    "eval_reduced",
    "reduced_values",
]


class UnknownIndexError(ValueError):
    """An index name or spec has no definition (or no catalog entry)."""


# -- degree functions for the generic power-sum family ----------------------

@dataclass(frozen=True)
class Identity:
    """h(d) = d."""

    def __call__(self, d):
        return d


@dataclass(frozen=True)
class Affine:
    """h(d) = a*d + b."""

    a: float
    b: float

    def __call__(self, d):
        return self.a * d + self.b


@dataclass(frozen=True)
class Table:
    """Tabulated h: an explicit value per degree, as (degree, value) pairs."""

    entries: tuple[tuple[int, float], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "Table":
        return cls(tuple(sorted((int(k), v) for k, v in mapping.items())))

    def __call__(self, d):
        for degree, value in self.entries:
            if degree == d:
                return value
        raise UnknownIndexError(f"tabulated degree function has no value for degree {d}")


DegreeFunction = Union[Identity, Affine, Table]


# -- index specs -------------------------------------------------------------

@dataclass(frozen=True)
class Leaves:
    """The leaf count itself (number of degree-1 nodes)."""

    name = "leaves"


@dataclass(frozen=True)
class Zagreb:
    """Sum of squared degrees."""

    name = "zagreb"


@dataclass(frozen=True)
class GordonScantlebury:
    """Number of paths of length two: sum of C(deg, 2) over nodes."""

    name = "gordon_scantlebury"


@dataclass(frozen=True)
class Platt:
    """Sum of deg*(deg - 1) over nodes (twice Gordon-Scantlebury)."""

    name = "platt"


@dataclass(frozen=True)
class Forgotten:
    """Sum of cubed degrees."""

    name = "forgotten"


@dataclass(frozen=True)
class Gini:
    """Pairwise absolute degree differences over unordered node pairs,
    normalized by (node count)^2 times the average degree."""

    name = "gini"


@dataclass(frozen=True)
class Hoover:
    """Sum of |node_count*deg - degree_sum| over nodes, normalized by
    2 * node_count * degree_sum."""

    name = "hoover"


@dataclass(frozen=True)
class GeneralizedZagreb:
    """Sum of deg**alpha over nodes, alpha real and nonzero."""

    alpha: float

    def __post_init__(self):
        if self.alpha == 0:
            raise UnknownIndexError("generalized Zagreb exponent must be nonzero")

    @property
    def name(self) -> str:
        return f"generalized_zagreb:{_format_alpha(self.alpha)}"


@dataclass(frozen=True)
class Generic:
    """Sum of h(deg)**alpha for a user-supplied positive degree function."""

    h: DegreeFunction
    alpha: float

    @property
    def name(self) -> str:
        if isinstance(self.h, Identity):
            tag = "identity"
        elif isinstance(self.h, Affine):
            tag = f"affine:{self.h.a}:{self.h.b}"
        else:
            tag = "table"
        return f"generic:{tag}:{_format_alpha(self.alpha)}"


IndexSpec = Union[
    Leaves, Zagreb, GordonScantlebury, Platt, Forgotten, Gini, Hoover,
    GeneralizedZagreb, Generic,
]

LEAVES = Leaves()
ZAGREB = Zagreb()
GORDON_SCANTLEBURY = GordonScantlebury()
PLATT = Platt()
FORGOTTEN = Forgotten()
GINI = Gini()
HOOVER = Hoover()

NAMED_INDICES: tuple[IndexSpec, ...] = (
    LEAVES, ZAGREB, GORDON_SCANTLEBURY, PLATT, FORGOTTEN, GINI, HOOVER,
)

_BY_NAME = {spec.name: spec for spec in NAMED_INDICES}


def _format_alpha(alpha) -> str:
    if isinstance(alpha, float) and alpha.is_integer():
        return str(int(alpha))
    return str(alpha)


def index_name(spec: IndexSpec) -> str:
    return spec.name


def parse_index(text: str) -> IndexSpec:
    """Parse a CLI/config index name.

    Accepted: leaves, zagreb, gordon_scantlebury, platt, forgotten, gini,
    hoover, and generalized_zagreb:<alpha>.
    """
    key = text.strip().lower()
    if key in _BY_NAME:
        return _BY_NAME[key]
    if key.startswith("generalized_zagreb:"):
        raw = key.split(":", 1)[1]
        try:
            alpha = int(raw)
        except ValueError:
            try:
                alpha = float(raw)
            except ValueError:
                raise UnknownIndexError(f"bad generalized_zagreb exponent: {raw!r}") from None
        return GeneralizedZagreb(alpha)
    raise UnknownIndexError(
        f"unknown index {text!r}; expected one of "
        f"{', '.join(sorted(_BY_NAME))} or generalized_zagreb:<alpha>"
    )


# -- evaluation --------------------------------------------------------------

def _power(base, alpha):
    """base**alpha, exact for integer alpha when base is exact."""
    if isinstance(alpha, int) or (isinstance(alpha, float) and alpha.is_integer()):
        a = int(alpha)
        if a >= 0:
            return base ** a
        if isinstance(base, (int, Fraction)):
            return Fraction(base) ** a
        return base ** a
    return float(base) ** float(alpha)


def _check_positive(h: DegreeFunction, degrees) -> None:
    for d in degrees:
        value = h(d)
        if not value > 0:
            raise UnknownIndexError(
                f"degree function must be positive on occurring degrees; h({d}) = {value!r}"
            )


def eval_direct(state: TreeState, index: IndexSpec):
    """Evaluate ``index`` on a concrete tree from its degree multiset."""
    counts = degree_multiset(state)
    n = state.time
    if isinstance(index, Leaves):
        return counts.get(1, 0)
    if isinstance(index, Zagreb):
        return sum(c * d * d for d, c in counts.items())
    if isinstance(index, Forgotten):
        return sum(c * d ** 3 for d, c in counts.items())
    if isinstance(index, GordonScantlebury):
        return sum(c * d * (d - 1) for d, c in counts.items()) // 2
    if isinstance(index, Platt):
        return sum(c * d * (d - 1) for d, c in counts.items())
    if isinstance(index, Gini):
        degrees = sorted(counts)
        total = 0
        for i, a in enumerate(degrees):
            for b in degrees[i + 1 :]:
                total += counts[a] * counts[b] * (b - a)
        return Fraction(total, 2 * (n + 2) * (n + 3))
    if isinstance(index, Hoover):
        total = sum(c * abs((n + 3) * d - 2 * (n + 2)) for d, c in counts.items())
        return Fraction(total, 4 * (n + 2) * (n + 3))
    if isinstance(index, GeneralizedZagreb):
        return sum(c * _power(d, index.alpha) for d, c in counts.items())
    if isinstance(index, Generic):
        _check_positive(index.h, counts)
        return sum(c * _power(index.h(d), index.alpha) for d, c in counts.items())
    raise UnknownIndexError(f"cannot evaluate index spec {index!r}")


def _check_reduced_args(n: int, leaf_count: int) -> None:
    if n < 1:
        raise ValueError(f"time must be >= 1, got {n}")
    if not 3 <= leaf_count <= n + 2:
        raise ValueError(
            f"leaf count {leaf_count} outside the reachable range [3, {n + 2}] at time {n}"
        )


def _power_sum_reduced(n: int, leaf_count: int, alpha):
    # Degree multiset {L: 1, 1: L, 2: n + 2 - L} collapses the power sum to
    # L**alpha + (1 - 2**alpha) * L + 2**alpha * (n + 2).
    return (
        _power(leaf_count, alpha)
        + (1 - _power(2, alpha)) * leaf_count
        + _power(2, alpha) * (n + 2)
    )


def eval_reduced(n: int, leaf_count: int, index: IndexSpec):
    """Closed-form value in (time, leaf count).

    Equals ``eval_direct`` on any tree with that time and leaf count.
    """
    _check_reduced_args(n, leaf_count)
    L = leaf_count
    if isinstance(index, Leaves):
        return L
    if isinstance(index, Zagreb):
        return L * L - 3 * L + 4 * (n + 2)
    if isinstance(index, GordonScantlebury):
        return (L * L - 3 * L + 4 * (n + 2) - 2 * (n + 2)) // 2
    if isinstance(index, Platt):
        return L * L - 3 * L + 4 * (n + 2) - 2 * (n + 2)
    if isinstance(index, Forgotten):
        return L ** 3 - 7 * L + 8 * (n + 2)
    if isinstance(index, Gini):
        return Fraction(-L * L + (2 * n + 5) * L - 2 * n - 4, 2 * (n + 3) * (n + 2))
    if isinstance(index, Hoover):
        return Fraction((n + 1) * L, 2 * (n + 3) * (n + 2))
    if isinstance(index, GeneralizedZagreb):
        return _power_sum_reduced(n, L, index.alpha)
    if isinstance(index, Generic):
        h = index.h
        _check_positive(h, {1, 2, L})
        a = index.alpha
        return (
            _power(h(L), a)
            + (_power(h(1), a) - _power(h(2), a)) * L
            + _power(h(2), a) * (n + 2)
        )
    raise UnknownIndexError(f"cannot evaluate index spec {index!r}")


def reduced_values(index: IndexSpec, n: int, leaf_counts) -> np.ndarray:
    """Vectorised float64 closed-form evaluation over an array of leaf counts."""
    L = np.asarray(leaf_counts, dtype=np.float64)
    if isinstance(index, Leaves):
        return L.copy()
    if isinstance(index, Zagreb):
        return L * L - 3.0 * L + 4.0 * (n + 2)
    if isinstance(index, GordonScantlebury):
        return 0.5 * (L * L - 3.0 * L) + (n + 2)
    if isinstance(index, Platt):
        return L * L - 3.0 * L + 2.0 * (n + 2)
    if isinstance(index, Forgotten):
        return L ** 3 - 7.0 * L + 8.0 * (n + 2)
    if isinstance(index, Gini):
        return (-L * L + (2 * n + 5) * L - (2 * n + 4)) / (2.0 * (n + 3) * (n + 2))
    if isinstance(index, Hoover):
        return (n + 1) * L / (2.0 * (n + 3) * (n + 2))
    if isinstance(index, GeneralizedZagreb):
        a = index.alpha
        return L ** a + (1.0 - 2.0 ** a) * L + 2.0 ** a * (n + 2)
    if isinstance(index, Generic):
        h, a = index.h, index.alpha
        if isinstance(h, Identity):
            hL = L
        elif isinstance(h, Affine):
            hL = h.a * L + h.b
        else:
            hL = np.array([float(h(int(x))) for x in L])
        if np.any(hL <= 0) or h(1) <= 0 or h(2) <= 0:
            raise UnknownIndexError("degree function must be positive on occurring degrees")
        h1, h2 = float(h(1)) ** a, float(h(2)) ** a
        return hL ** a + (h1 - h2) * L + h2 * (n + 2)
    raise UnknownIndexError(f"cannot evaluate index spec {index!r}")
