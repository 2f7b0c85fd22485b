"""Data model for generalized product codes (GPCs).

A GPC is described asymptotically by a partition of its check nodes (CNs,
one per component codeword) into ``I`` positions together with a set of
sparse *connection tensors*: for each variable-node (VN) degree ``r``, the
entry keyed by ``(i, (i_2, ..., i_r))`` with ``i_2 <= ... <= i_r`` counts
how many degree-``r`` VNs connect every CN at position ``i`` to CNs at the
tail positions.  Tensors are stored sparsely because realistic spatially
coupled codes have many positions but band-limited coupling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

__all__ = [
    "PositionPartition",
    "ConnectionTensor",
    "GpcSpec",
    "validate_spec",
    "hyperedge_types",
    "edge_count",
    "degree_profile",
    "vn_type_counts",
]

#: Tensor entry key: (head position, ascending tail positions).
EntryKey = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class PositionPartition:
    """CN position partition: ``sizes[i-1]`` is the CN count of position i."""

    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if not self.sizes:
            raise ValueError("partition needs at least one position")
        bad = [n for n in self.sizes if n < 1]
        if bad:
            raise ValueError(f"position sizes must be >= 1, got {bad}")

    @property
    def num_positions(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @cached_property
    def gamma(self) -> tuple[Fraction, ...]:
        """Exact position fractions N_i / N."""
        n = self.total
        return tuple(Fraction(s, n) for s in self.sizes)

    def size(self, i: int) -> int:
        """CN count of 1-based position ``i``."""
        if not 1 <= i <= self.num_positions:
            raise ValueError(f"position {i} out of range 1..{self.num_positions}")
        return self.sizes[i - 1]


@dataclass(frozen=True, eq=True)
class ConnectionTensor:
    """Sparse degree-``r`` connection counts keyed by (head, sorted tail).

    Only positive counts with ascending tails are stored; anything absent
    is zero by convention.
    """

    degree: int
    entries: dict[EntryKey, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.degree < 2:
            raise ValueError(f"tensor degree must be >= 2, got {self.degree}")
        clean: dict[EntryKey, int] = {}
        for (head, tail), count in dict(self.entries).items():
            tail = tuple(int(j) for j in tail)
            head = int(head)
            if len(tail) != self.degree - 1:
                raise ValueError(
                    f"entry ({head}, {tail}) has tail length {len(tail)}, "
                    f"expected {self.degree - 1}"
                )
            if any(a > b for a, b in zip(tail, tail[1:])):
                raise ValueError(f"tail of entry ({head}, {tail}) is not ascending")
            count = int(count)
            if count < 0:
                raise ValueError(f"negative count {count} for entry ({head}, {tail})")
            if count:
                clean[(head, tail)] = count
        object.__setattr__(self, "entries", clean)

    def get(self, head: int, tail: tuple[int, ...]) -> int:
        return self.entries.get((head, tuple(tail)), 0)


@dataclass(frozen=True, eq=True)
class GpcSpec:
    """Asymptotic GPC description: partition, tensors, and decoder radius t."""

    partition: PositionPartition
    tensors: tuple[ConnectionTensor, ...]
    t: int
    component_length: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tensors", tuple(self.tensors))
        if self.t < 1:
            raise ValueError(f"correction radius t must be >= 1, got {self.t}")
        degrees = [a.degree for a in self.tensors]
        if len(set(degrees)) != len(degrees):
            raise ValueError(f"duplicate tensor degrees: {degrees}")

    @property
    def num_positions(self) -> int:
        return self.partition.num_positions

    def tensor(self, degree: int) -> ConnectionTensor | None:
        for a in self.tensors:
            if a.degree == degree:
                return a
        return None

    def entry(self, degree: int, head: int, tail: tuple[int, ...]) -> int:
        a = self.tensor(degree)
        return a.get(head, tail) if a is not None else 0

    def distinct_vn_types(self) -> list[tuple[int, ...]]:
        """All fully sorted VN types with at least one stored entry."""
        seen: set[tuple[int, ...]] = set()
        for a in self.tensors:
            for (head, tail) in a.entries:
                seen.add(tuple(sorted((head,) + tail)))
        return sorted(seen, key=lambda typ: (len(typ), typ))


def _remove_once(typ: tuple[int, ...], value: int) -> tuple[int, ...]:
    out = list(typ)
    out.remove(value)
    return tuple(out)


def edge_count(spec: GpcSpec, vn_type: Iterable[int]) -> int:
    """Number of degree-r VNs of the given sorted type.

    The count equals ``N_i * A[i, type \\ i]`` for any representative
    position ``i`` in the type; a mismatch between representatives means
    the tensors are inconsistent and raises with both products named.
    """
    typ = tuple(sorted(int(i) for i in vn_type))
    if len(typ) < 2:
        raise ValueError(f"VN type must have degree >= 2, got {typ}")
    products: dict[int, int] = {}
    for head in sorted(set(typ)):
        a = spec.entry(len(typ), head, _remove_once(typ, head))
        products[head] = spec.partition.size(head) * a
    values = sorted(set(products.values()))
    if len(values) > 1:
        detail = ", ".join(
            f"N_{i} * A[{i},{_remove_once(typ, i)}] = {m}" for i, m in products.items()
        )
        raise ValueError(f"inconsistent VN count for type {typ}: {detail}")
    return values[0]


def vn_type_counts(spec: GpcSpec) -> dict[tuple[int, ...], int]:
    """Map each distinct sorted VN type to its VN count m(type)."""
    return {typ: edge_count(spec, typ) for typ in spec.distinct_vn_types()}


def hyperedge_types(spec: GpcSpec, i: int) -> dict[int, set[tuple[int, ...]]]:
    """Sorted VN types containing position ``i``, grouped by degree.

    Each type is reported once even when ``i`` occurs in it with
    multiplicity.
    """
    if not 1 <= i <= spec.num_positions:
        raise ValueError(f"position {i} out of range 1..{spec.num_positions}")
    out: dict[int, set[tuple[int, ...]]] = {}
    for typ in spec.distinct_vn_types():
        if i in typ:
            out.setdefault(len(typ), set()).add(typ)
    return out


def degree_profile(spec: GpcSpec) -> dict[int, float]:
    """Fraction of VNs per degree, weighted by VN counts; sums to 1."""
    counts = vn_type_counts(spec)
    per_degree: dict[int, int] = {}
    for typ, m in counts.items():
        per_degree[len(typ)] = per_degree.get(len(typ), 0) + m
    total = sum(per_degree.values())
    if total == 0:
        raise ValueError("spec has zero VNs; degree profile undefined")
    return {r: per_degree[r] / total for r in sorted(per_degree)}


def validate_spec(spec: GpcSpec) -> list[str]:
    """Check every structural invariant; returns violations (empty if valid).

    Violations are reported as data rather than raised, so invalid specs
    can be inspected.
    """
    violations: list[str] = []
    part = spec.partition

    total = part.total
    if sum(part.gamma) != 1:
        violations.append(f"gamma fractions sum to {sum(part.gamma)}, expected 1")
    if total != sum(part.sizes):
        violations.append("position sizes do not sum to N")

    for a in spec.tensors:
        for (head, tail), count in a.entries.items():
            indices = (head,) + tail
            out_of_range = [j for j in indices if not 1 <= j <= part.num_positions]
            if out_of_range:
                violations.append(
                    f"A^({a.degree}) entry ({head}, {tail}) references positions "
                    f"{out_of_range} outside 1..{part.num_positions}"
                )
            if count < 0:
                violations.append(f"A^({a.degree}) entry ({head}, {tail}) is negative")

    # Eq.-style count consistency: every representative of a type must see
    # the same total VN count.
    for typ in spec.distinct_vn_types():
        if any(not 1 <= j <= part.num_positions for j in typ):
            continue
        try:
            edge_count(spec, typ)
        except ValueError as exc:
            violations.append(str(exc))
    return violations
