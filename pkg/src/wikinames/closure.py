"""Subclass-of closure over the stored type hierarchy, and type classification.

An entity belongs to a named-entity type when one of its P31 classes is the
type's root class or any transitive P279 subclass of it.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .dump import CompactEntity
from .errors import ConfigError


class EntityType(str, enum.Enum):
    PER = "PER"
    LOC = "LOC"
    ORG = "ORG"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RootConfig:
    per: str = "Q5"  # human
    loc: str = "Q82794"  # geographic region
    org: str = "Q43229"  # organization

    def __post_init__(self) -> None:
        if len({self.per, self.loc, self.org}) != 3:
            raise ConfigError(f"root classes must be distinct: {self}")

    def root_for(self, entity_type: EntityType) -> str:
        return {EntityType.PER: self.per, EntityType.LOC: self.loc, EntityType.ORG: self.org}[entity_type]

    def items(self) -> list[tuple[EntityType, str]]:
        return [(t, self.root_for(t)) for t in EntityType]

    @property
    def roots(self) -> list[str]:
        return [root for _, root in self.items()]

    @classmethod
    def parse(cls, text: str) -> RootConfig:
        """Parse ``"Q5,Q82794,Q43229"`` (PER, LOC, ORG order)."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) != 3:
            raise ConfigError(f"expected three comma-separated roots (PER,LOC,ORG), got {text!r}")
        return cls(*parts)

    def to_dict(self) -> dict[str, str]:
        return {t.value: root for t, root in self.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> RootConfig:
        return cls(per=data["PER"], loc=data["LOC"], org=data["ORG"])


class SubclassGraph:
    """Directed graph with an edge child -> parent per P279 statement.

    Node names are interned to integers; traversal works on the integer
    adjacency lists.
    """

    def __init__(self) -> None:
        self._index: dict[str, int] = {}
        self._names: list[str] = []
        self._parents: list[set[int]] = []
        self._children: list[set[int]] = []

    def _intern(self, qid: str) -> int:
        idx = self._index.get(qid)
        if idx is None:
            idx = self._index[qid] = len(self._names)
            self._names.append(qid)
            self._parents.append(set())
            self._children.append(set())
        return idx

    def add_edge(self, child: str, parent: str) -> None:
        c, p = self._intern(child), self._intern(parent)
        self._parents[c].add(p)
        self._children[p].add(c)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> SubclassGraph:
        graph = cls()
        for child, parent in edges:
            graph.add_edge(child, parent)
        return graph

    def __contains__(self, qid: str) -> bool:
        return qid in self._index

    def __len__(self) -> int:
        return len(self._names)

    @property
    def nodes(self) -> set[str]:
        return set(self._names)

    def edges(self) -> Iterator[tuple[str, str]]:
        for c, parents in enumerate(self._parents):
            for p in parents:
                yield self._names[c], self._names[p]

    def edge_count(self) -> int:
        return sum(len(p) for p in self._parents)

    def descendants(self, root: str) -> set[str]:
        """All nodes whose subclass-of chain reaches ``root``, plus ``root``."""
        start = self._index.get(root)
        if start is None:
            return {root}
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for child in self._children[node]:
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        return {self._names[i] for i in seen}


def build_subclass_graph(store) -> SubclassGraph:
    return SubclassGraph.from_edges(store.subclass_edges())


@dataclass(frozen=True)
class ClosureTable:
    roots: tuple[str, ...]
    closure: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __getitem__(self, root: str) -> frozenset[str]:
        return self.closure[root]

    def sizes(self) -> dict[str, int]:
        return {root: len(self.closure[root]) for root in self.roots}

    @classmethod
    def roots_only(cls, roots: Iterable[str]) -> ClosureTable:
        """Table with no hierarchy expansion: each root matches only itself."""
        roots = tuple(roots)
        return cls(roots, {r: frozenset([r]) for r in roots})

    def save(self, store) -> None:
        store.write_closure(dict(self.closure))

    @classmethod
    def load(cls, store) -> ClosureTable | None:
        closure = store.read_closure()
        if closure is None:
            return None
        return cls(tuple(sorted(closure)), closure)


def compute_closure(graph: SubclassGraph, roots: RootConfig | Iterable[str]) -> ClosureTable:
    root_list = tuple(roots.roots if isinstance(roots, RootConfig) else roots)
    return ClosureTable(root_list, {r: frozenset(graph.descendants(r)) for r in root_list})


def classify(entity: CompactEntity, table: ClosureTable, roots: RootConfig) -> set[EntityType]:
    if not entity.instance_of:
        return set()
    classes = set(entity.instance_of)
    return {t for t, root in roots.items() if not classes.isdisjoint(table[root])}
