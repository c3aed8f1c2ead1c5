"""One-shot verification suites.

Four suites cross-check the package against routes that do not share code
with what they test:

* catalog formulas against the brute-force summation oracle, in exact
  rational arithmetic (a mismatch is reported as a formula flag with its
  (index, n, p) witness, never silently patched);
* direct degree-multiset evaluation against the reduced closed forms on
  randomly grown trees;
* the coefficient triangle against Stirling numbers of the second kind
  computed by inclusion-exclusion;
* degeneracy at time 1, where the tree is deterministic, so every catalog
  variance must vanish and every mean must equal the seed value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .analytics import LeafLaw, coefficient_triangle, moment_catalog, support_pmf
from .indices import (
    NAMED_INDICES,
    Affine,
    GeneralizedZagreb,
    Generic,
    IndexSpec,
    eval_direct,
    eval_reduced,
    index_name,
)
from .tree import RngStream, TreeState, UniformLeaf, grow_legs, new_seed

__all__ = [
    "Failure",
    "stirling2",
    "catalog_oracle_suite",
    "direct_reduced_suite",
    "triangle_suite",
    "seed_degeneracy_suite",
    "run_level",
    "FULL_P_VALUES",
    "FULL_N_VALUES",
]

FULL_P_VALUES = tuple(Fraction(i, 10) for i in range(1, 10))
FULL_N_VALUES = tuple(range(1, 51))
QUICK_P_VALUES = (Fraction(1, 10), Fraction(1, 2), Fraction(9, 10))
QUICK_N_VALUES = tuple(range(1, 16))


@dataclass
class Failure:
    suite: str
    index: str
    witness: dict
    detail: str

    def __str__(self) -> str:
        parts = ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return f"[{self.suite}] {self.index} ({parts}): {self.detail}"


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind, by inclusion-exclusion.

    Independent of the triangle recurrence on purpose: it is the oracle the
    triangle is checked against.
    """
    if k < 0 or k > n:
        return 0
    total = sum((-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1))
    return total // math.factorial(k)


def _default_catalog() -> dict:
    return {index_name(spec): moment_catalog(spec) for spec in NAMED_INDICES}


def catalog_oracle_suite(p_values=FULL_P_VALUES, n_values=FULL_N_VALUES,
                         catalog=None) -> list[Failure]:
    """Exact equality of every cataloged mean/variance with the summation
    oracle over the given (p, n) grid."""
    if catalog is None:
        catalog = _default_catalog()
    specs = {index_name(spec): spec for spec in NAMED_INDICES}
    failures = []
    for n in n_values:
        reduced = {
            key: [eval_reduced(n, k, spec) for k in range(3, n + 3)]
            for key, spec in specs.items()
        }
        for p in p_values:
            weights = support_pmf(LeafLaw(n, p))
            for key, entry in catalog.items():
                values = reduced[key]
                m1 = sum(w * v for w, v in zip(weights, values))
                m2 = sum(w * v * v for w, v in zip(weights, values))
                oracle_var = m2 - m1 * m1
                mean_formula = entry.mean(n, p)
                var_formula = entry.variance(n, p)
                if mean_formula != m1:
                    failures.append(Failure(
                        "catalog-oracle", key, {"n": n, "p": p},
                        f"mean formula {mean_formula} != oracle {m1}"))
                if var_formula != oracle_var:
                    failures.append(Failure(
                        "catalog-oracle", key, {"n": n, "p": p},
                        f"variance formula {var_formula} != oracle {oracle_var}"))
    return failures


def _trial_specs() -> tuple[IndexSpec, ...]:
    return NAMED_INDICES + (
        GeneralizedZagreb(2),
        GeneralizedZagreb(3),
        GeneralizedZagreb(4),
        GeneralizedZagreb(2.5),
        Generic(Affine(2, 1), 2),
    )


def direct_reduced_suite(trials: int, max_n: int, master_seed: int,
                         rtol: float = 1e-12) -> list[Failure]:
    """Direct vs reduced evaluation on randomly grown trees, mixed models."""
    specs = _trial_specs()
    failures = []
    meta = RngStream(master_seed, 0)
    for trial in range(trials):
        u = meta.doubles(2)
        n = 1 + int(u[0] * max_n)
        p = 0.05 + 0.9 * float(u[1])
        legs = grow_legs(UniformLeaf(p), n, RngStream(master_seed, trial + 1))
        state = TreeState(time=n, legs=tuple(legs.tolist()))
        for spec in specs:
            direct = float(eval_direct(state, spec))
            reduced = float(eval_reduced(n, state.leaf_count, spec))
            if abs(direct - reduced) > rtol * max(1.0, abs(reduced)):
                failures.append(Failure(
                    "direct-reduced", index_name(spec),
                    {"n": n, "L": state.leaf_count, "p": round(p, 6)},
                    f"direct={direct!r} reduced={reduced!r}"))
    return failures


def triangle_suite(max_order: int = 20) -> list[Failure]:
    """Coefficient triangle against inclusion-exclusion Stirling numbers."""
    failures = []
    rows = coefficient_triangle(max_order)
    for a in range(1, max_order + 1):
        row = rows[a - 1]
        for i in range(1, a + 1):
            expected = stirling2(a, i)
            if row[i - 1] != expected:
                failures.append(Failure(
                    "triangle-stirling", "coefficient_triangle",
                    {"order": a, "i": i},
                    f"triangle {row[i - 1]} != stirling {expected}"))
    return failures


def seed_degeneracy_suite(p_values=FULL_P_VALUES, catalog=None) -> list[Failure]:
    """At time 1 the tree is the deterministic seed: every catalog variance
    must be exactly zero and every mean must equal the seed's index value."""
    if catalog is None:
        catalog = _default_catalog()
    seed = new_seed()
    specs = {index_name(spec): spec for spec in NAMED_INDICES}
    failures = []
    for key, entry in catalog.items():
        seed_value = eval_direct(seed, specs[key])
        for p in p_values:
            mean = entry.mean(1, p)
            var = entry.variance(1, p)
            if mean != seed_value:
                failures.append(Failure(
                    "seed-degeneracy", key, {"n": 1, "p": p},
                    f"mean formula {mean} != seed value {seed_value}"))
            if var != 0:
                failures.append(Failure(
                    "seed-degeneracy", key, {"n": 1, "p": p},
                    f"variance formula {var} != 0"))
    return failures


def run_level(level: str, master_seed: int = 20240917) -> tuple[list[Failure], dict]:
    """Run every suite at the requested depth; returns (failures, counts)."""
    if level == "quick":
        p_values, n_values = QUICK_P_VALUES, QUICK_N_VALUES
        trials, max_n, max_order = 500, 120, 12
    elif level == "full":
        p_values, n_values = FULL_P_VALUES, FULL_N_VALUES
        trials, max_n, max_order = 10_000, 500, 20
    else:
        raise ValueError(f"unknown verification level {level!r}")
    failures = []
    failures += catalog_oracle_suite(p_values, n_values)
    failures += seed_degeneracy_suite(p_values)
    failures += triangle_suite(max_order)
    failures += direct_reduced_suite(trials, max_n, master_seed)
    counts = {
        "level": level,
        "catalog_grid": f"{len(p_values)} p-values x {len(n_values)} horizons",
        "random_trees": trials,
        "triangle_order": max_order,
    }
    return failures, counts
