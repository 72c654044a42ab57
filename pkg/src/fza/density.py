"""Single Density approximations: commodities are grouped by budget-to-length
ratio, one cheap candidate family is built per group, and the best candidate by
full revenue wins.

Variants: the randomized tree algorithm (modular offset candidates thinned by
coin flips), a deterministic path variant (every 2^j-th edge), a deterministic
variant for pricing with base revenue (unthinned offsets), and a simplified
variant that samples each edge independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Instance,
    InvalidInstanceError,
    SolveResult,
    make_result,
)
from .rng import substream


def ceil_log2(n: int) -> int:
    if n < 1:
        raise InvalidInstanceError("n must be positive")
    return (n - 1).bit_length()


def density_class(budget: int, path_len: int) -> int:
    """Class index j >= 1 with u/|P| in (2^-j, 2^(1-j)]; requires u >= 1."""
    if budget < 1:
        raise InvalidInstanceError("density class needs budget >= 1")
    t = 0
    while (budget << (t + 1)) <= path_len:
        t += 1
    return t + 1


@dataclass(frozen=True)
class DensityClassification:
    """Per-commodity density and class index; classes[j] lists the members of
    M_j. Class 0 holds the zero-budget commodities."""

    densities: tuple[Fraction, ...]
    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]


def classify_by_density(instance: Instance) -> DensityClassification:
    n = instance.tree.num_vertices
    num_classes = ceil_log2(n) + 1
    densities = []
    class_of = []
    classes: list[list[int]] = [[] for _ in range(num_classes)]
    for i, c in enumerate(instance.commodities):
        size = instance.path_size(i)
        densities.append(Fraction(c.budget, size))
        j = 0 if c.budget == 0 else density_class(c.budget, size)
        class_of.append(j)
        classes[j].append(i)
    return DensityClassification(
        tuple(densities), tuple(class_of), tuple(tuple(m) for m in classes)
    )


def offset_candidate(instance: Instance, root: int, j: int, theta: int) -> frozenset[int]:
    """Edges whose depth below `root` is congruent to theta mod 2^(j+1).

    The depth of an edge is the number of edges strictly between it and the
    root, i.e. the depth of its upper endpoint.
    """
    if j < 1:
        raise InvalidInstanceError("offset candidates need class index j >= 1")
    modulus = 1 << (j + 1)
    if not (0 <= theta < modulus):
        raise InvalidInstanceError(f"offset {theta} out of range for modulus {modulus}")
    _, parent_edge, depth, order = instance.tree.rooted(root)
    picked = []
    for v in order[1:]:
        if (depth[v] - 1) % modulus == theta:
            picked.append(parent_edge[v])
    return frozenset(picked)


def _revenue_evaluator(instance):
    """Closure computing full revenue of an edge mask with per-commodity
    contribution tables (cheaper than re-deriving w*f every call)."""
    zero = Fraction(0)
    f = instance.pricing
    data = []
    for i, c in enumerate(instance.commodities):
        pm = instance.paths[i]
        size = pm.bit_count()
        table = [c.weight * f(x) for x in range(size + 1)]
        data.append((pm, c.budget, table))

    def rev(mask: int) -> Fraction:
        total = zero
        for pm, budget, table in data:
            count = (pm & mask).bit_count()
            if count <= budget:
                total += table[count]
        return total

    return rev


def _argmax_candidates(instance, candidates, algorithm, seed=None):
    """Pick the candidate with maximum full-instance revenue.

    Ties break on the (j, theta) generation order and then on the sorted cut
    tuple, so the outcome is independent of evaluation order.
    """
    rev_of = _revenue_evaluator(instance)
    best = None
    for rank, cuts in candidates:
        mask = 0
        for eid in cuts:
            mask |= 1 << eid
        key = (rev_of(mask), tuple(-p for p in rank))  # revenue, then earlier rank
        if best is None or key > best[0]:
            best = (key, cuts)
    assert best is not None
    return make_result(
        instance,
        best[1],
        algorithm=algorithm,
        seed=seed,
        diagnostics={"candidates": len(candidates)},
    )


def _edge_depths(instance: Instance, root: int) -> list[tuple[int, int]]:
    """(depth, edge id) pairs sorted by edge id; depth of an edge is the
    depth of its endpoint closer to the root."""
    _, parent_edge, depth, order = instance.tree.rooted(root)
    pairs = [(depth[v] - 1, parent_edge[v]) for v in order[1:]]
    pairs.sort(key=lambda de: de[1])
    return pairs


def thinned_offset_candidate(
    instance: Instance, root: int, j: int, theta: int, seed: int
) -> frozenset[int]:
    """Offset candidate after dropping each edge independently with chance 1/2.

    Edges are processed in increasing edge-id order within the substream
    keyed by (j, theta), so the draw is reproducible per candidate.
    """
    rng = substream(seed, "single-density", j, theta)
    return frozenset(e for e in sorted(offset_candidate(instance, root, j, theta)) if rng.random() >= 0.5)


def single_density(instance: Instance, seed: int) -> SolveResult:
    """Randomized logarithmic approximation on trees.

    One candidate per (class j, offset theta) pair: the modular edge
    selection below root 0, thinned edge-wise with probability 1/2. The empty
    set covers the zero-budget class.
    """
    root = 0
    n = instance.tree.num_vertices
    depths = _edge_depths(instance, root)
    candidates: list[tuple[tuple[int, ...], frozenset[int]]] = [((0, 0), frozenset())]
    for j in range(1, ceil_log2(n) + 1):
        modulus = 1 << (j + 1)
        buckets: list[list[int]] = [[] for _ in range(modulus)]
        for d, eid in depths:
            buckets[d % modulus].append(eid)
        for theta in range(modulus):
            rng = substream(seed, "single-density", j, theta)
            kept = frozenset(e for e in buckets[theta] if rng.random() >= 0.5)
            candidates.append(((j, theta), kept))
    return _argmax_candidates(instance, candidates, "single-density", seed=seed)


def single_density_path(instance: Instance) -> SolveResult:
    """Deterministic variant for paths: per class j the candidates take every
    2^j-th edge along the path; no thinning is needed because every candidate
    serves the whole class."""
    if not instance.tree.is_path:
        raise InvalidInstanceError("single_density_path requires a path instance")
    _, edge_positions = instance.tree.path_order()
    n = instance.tree.num_vertices
    candidates: list[tuple[tuple[int, ...], frozenset[int]]] = [((0, 0), frozenset())]
    for j in range(1, ceil_log2(n) + 1):
        step = 1 << j
        for theta in range(1, step + 1):
            cuts = frozenset(
                edge_positions[p - 1] for p in range(theta, len(edge_positions) + 1, step)
            )
            candidates.append(((j, theta), cuts))
    return _argmax_candidates(instance, candidates, "single-density-path")


def single_density_base(instance: Instance) -> SolveResult:
    """Deterministic variant when f(0) > 0: the empty set already earns base
    revenue from every commodity with budget 0 or 1, and classes with budget
    at least 2 are safe for every unthinned offset candidate."""
    if not instance.pricing.base_revenue:
        raise InvalidInstanceError(
            "single_density_base requires f(0) > 0; use single_density instead"
        )
    root = 0
    n = instance.tree.num_vertices
    depths = _edge_depths(instance, root)
    candidates: list[tuple[tuple[int, ...], frozenset[int]]] = [((0, 0), frozenset())]
    for j in range(1, ceil_log2(n) + 1):
        modulus = 1 << (j + 1)
        buckets: list[list[int]] = [[] for _ in range(modulus)]
        for d, eid in depths:
            buckets[d % modulus].append(eid)
        for theta in range(modulus):
            candidates.append(((j, theta), frozenset(buckets[theta])))
    return _argmax_candidates(instance, candidates, "single-density-base")


def bernoulli_candidate(instance: Instance, seed: int, j: int) -> frozenset[int]:
    """Every edge independently with probability 2^-(j+1), ascending edge ids."""
    if j < 1:
        raise InvalidInstanceError("class index j must be >= 1")
    rng = substream(seed, "simplified", j)
    p = 1.0 / (1 << (j + 1))
    return frozenset(e for e in range(instance.tree.num_edges) if rng.random() < p)


def simplified_single_density(instance: Instance, seed: int) -> SolveResult:
    """Heavily randomized variant: one Bernoulli(2^-(j+1)) candidate per class."""
    n = instance.tree.num_vertices
    candidates: list[tuple[tuple[int, ...], frozenset[int]]] = [((0,), frozenset())]
    for j in range(1, ceil_log2(n) + 1):
        candidates.append(((j,), bernoulli_candidate(instance, seed, j)))
    return _argmax_candidates(instance, candidates, "simplified", seed=seed)
