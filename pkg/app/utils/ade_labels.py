"""ADE recognition of Dynkin graphs and helpers for singularity label multisets."""

import re
from collections import Counter
from typing import Dict, Iterable, List, Tuple

import networkx as nx

LABEL_PATTERN = re.compile(r"^(\d*)([ADE])(\d+)$")


def _arm_lengths(graph: nx.Graph, center) -> List[int]:
    """Lengths of the paths hanging off a branch node."""
    lengths = []
    for neighbor in graph.neighbors(center):
        length, previous, current = 1, center, neighbor
        while True:
            onward = [n for n in graph.neighbors(current) if n != previous]
            if not onward:
                break
            previous, current = current, onward[0]
            length += 1
        lengths.append(length)
    return sorted(lengths)


def classify_component(graph: nx.Graph) -> str:
    """
    ADE label of a connected Dynkin diagram.

    Args:
        graph: Connected simple graph

    Returns:
        str: Label such as "A3", "D5" or "E6"

    Raises:
        ValueError: If the graph is not a tree of ADE shape
    """
    n = graph.number_of_nodes()
    if n == 0:
        raise ValueError("empty Dynkin diagram")
    if not nx.is_tree(graph):
        raise ValueError(f"Dynkin diagram with {n} nodes is not a tree")
    degrees = dict(graph.degree())
    branch = [v for v, deg in degrees.items() if deg >= 3]
    if not branch:
        return f"A{n}"
    if len(branch) > 1 or degrees[branch[0]] > 3:
        raise ValueError(f"Graph with degrees {sorted(degrees.values())} is not of ADE type")
    arms = _arm_lengths(graph, branch[0])
    if arms[0] == 1 and arms[1] == 1:
        return f"D{n}"
    if arms == [1, 2, 2]:
        return "E6"
    if arms == [1, 2, 3]:
        return "E7"
    if arms == [1, 2, 4]:
        return "E8"
    raise ValueError(f"Branch arms {arms} do not form an ADE diagram")


def classify_graph(graph: nx.Graph) -> List[str]:
    """ADE labels of all connected components, sorted by rank descending."""
    labels = [classify_component(graph.subgraph(c).copy()) for c in nx.connected_components(graph)]
    return sort_labels(labels)


def label_rank(label: str) -> int:
    match = LABEL_PATTERN.match(label)
    if match is None:
        raise ValueError(f"Invalid ADE label: {label}")
    return int(match.group(3))


def sort_labels(labels: Iterable[str]) -> List[str]:
    """Rank descending, then type letter."""
    return sorted(labels, key=lambda s: (-label_rank(s), s))


def total_rank(labels: Iterable[str]) -> int:
    return sum(label_rank(s) for s in labels)


def parse_labels(text: str) -> List[str]:
    """
    Expand a table cell like "2A2+A1" or "A5,A2" into a label list.

    Raises:
        ValueError: If a term is not a (multiplied) ADE label
    """
    labels = []
    for term in re.split(r"[+,\s]+", text.strip()):
        if not term:
            continue
        match = LABEL_PATTERN.match(term)
        if match is None:
            raise ValueError(f"Invalid singularity term: {term}")
        count = int(match.group(1)) if match.group(1) else 1
        labels.extend([f"{match.group(2)}{match.group(3)}"] * count)
    return sort_labels(labels)


def format_labels(labels: Iterable[str]) -> str:
    """Inverse of ``parse_labels``: "3A2+A1"."""
    counts = Counter(labels)
    parts = []
    for label in sort_labels(counts):
        k = counts[label]
        parts.append(f"{k}{label}" if k > 1 else label)
    return "+".join(parts)


def label_counts(labels: Iterable[str]) -> Dict[str, int]:
    return dict(Counter(labels))


def a_label(multiplicity: int) -> str:
    """Transversal type of a 2-cone of multiplicity m: A_{m-1}."""
    if multiplicity < 2:
        raise ValueError(f"Multiplicity {multiplicity} gives no singularity")
    return f"A{multiplicity - 1}"


def ambient_pairs(labels: Iterable[str]) -> List[Tuple[str, int]]:
    """[["A2", 3], ...] pairs for report JSON."""
    counts = Counter(labels)
    return [(label, counts[label]) for label in sort_labels(counts)]
