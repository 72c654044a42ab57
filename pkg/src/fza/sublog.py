"""Sublogarithmic approximation via recursive almost-balanced decomposition.

The tree is recursively partitioned into edge-disjoint fragments of shrinking
size; each commodity lands in the deepest level whose fragments still contain
its whole path. Per fragment, two subroutines compete: one cuts only outside
the fragment's skeleton (contract the skeleton, deactivate hanging subtrees by
coin flip, solve each survivor as a rooted instance), the other cuts only
skeleton edges (guess an approximate cut count per skeleton segment, then
place exactly that many cuts per active segment with a path DP). Commodities
whose path is a single edge are never separated by the decomposition and get
an exact per-edge treatment instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    GeneralizedCommodity,
    GeneralizedPathInstance,
    generalized_rooted_path_dp,
    rooted_dp,
)
from .model import (
    CapacityError,
    Commodity,
    FzaError,
    Instance,
    InvalidInstanceError,
    SolveResult,
    Tree,
    edge_mask,
    make_result,
    mask_to_edges,
    revenue_for,
    total_revenue_mask,
)
from .rng import substream


def branching_parameter(n: int) -> int:
    """Smallest d with 2^(d*d) >= n, floored at 2."""
    d = 1
    while (1 << (d * d)) < n:
        d += 1
    return max(2, d)


def almost_balanced_decomposition(
    tree, fragment_edges: Iterable[int], d: int
) -> list[frozenset[int]]:
    """Split a connected fragment with at least d edges into edge-disjoint
    connected subtrees, each holding between m/(3d) and 3m/d of its m edges.

    Greedy bottom-up carving: accumulate subtree edges and detach a piece as
    soon as it reaches ceil(m/d) edges; a final remainder below the lower
    bound is merged into the smallest adjacent piece. The bounds are verified
    afterwards and a violation raises (it would indicate a bug, not bad
    input).
    """
    fragment = frozenset(fragment_edges)
    m = len(fragment)
    if d < 2:
        raise InvalidInstanceError("branching parameter d must be at least 2")
    if m < d:
        raise InvalidInstanceError(f"fragment with {m} edges cannot be split {d} ways")
    target = -(-m // d)

    adj: dict[int, list[tuple[int, int]]] = {}
    for eid in fragment:
        u, v = tree.edges[eid]
        adj.setdefault(u, []).append((v, eid))
        adj.setdefault(v, []).append((u, eid))
    for v in adj:
        adj[v].sort()
    root = min(adj)
    parent = {root: -1}
    order = [root]
    stack = [root]
    while stack:
        v = stack.pop()
        for w, _ in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
                stack.append(w)
    children: dict[int, list[tuple[int, int]]] = {v: [] for v in adj}
    for v in order[1:]:
        eid = next(e for w, e in adj[v] if w == parent[v])
        children[parent[v]].append((v, eid))

    pieces: list[set[int]] = []
    acc: dict[int, list[int]] = {}
    for v in reversed(order):
        bucket: list[int] = []
        for child, eid in children[v]:
            bucket.extend(acc[child])
            bucket.append(eid)
            if len(bucket) >= target:
                pieces.append(set(bucket))
                bucket = []
        acc[v] = bucket
    remainder = acc[root]

    if remainder:
        if 3 * d * len(remainder) >= m:
            pieces.append(set(remainder))
        else:
            rem_verts = set()
            for eid in remainder:
                rem_verts.update(tree.edges[eid])
            touching = [
                (len(p), idx)
                for idx, p in enumerate(pieces)
                if any(u in rem_verts or v in rem_verts for u, v in (tree.edges[e] for e in p))
            ]
            if not touching:
                raise FzaError("remainder not adjacent to any piece")
            _, idx = min(touching)
            pieces[idx].update(remainder)

    if len(pieces) == 1:
        # only possible for d = 2: a lone oversized piece swallowed the
        # remainder; fall back to a centroid split into two branch bundles
        pieces = _bipartition(tree, fragment, adj, parent, order, children, d)

    if m >= 2 and not 2 <= len(pieces) <= d:
        raise FzaError(f"carving produced {len(pieces)} pieces for d={d}")
    for p in pieces:
        if not (3 * d * len(p) >= m and d * len(p) <= 3 * m):
            raise FzaError(
                f"piece of {len(p)} edges violates bounds [{m}/(3*{d}), 3*{m}/{d}]"
            )
    return [frozenset(p) for p in pieces]


def _bipartition(tree, fragment, adj, parent, order, children, d: int):
    """Split a fragment in two at a centroid vertex: bundle its branches
    greedily until the first side clears the lower size bound."""
    m = len(fragment)
    sub_edges = {v: 0 for v in adj}
    for v in reversed(order):
        for child, _ in children[v]:
            sub_edges[v] += sub_edges[child] + 1

    def branch_sizes(v):
        sizes = [sub_edges[c] + 1 for c, _ in children[v]]
        if parent[v] != -1:
            sizes.append(m - sub_edges[v])
        return sizes

    centroid = min(adj, key=lambda v: (max(branch_sizes(v)), v))

    def branch_edges(v, child, eid):
        out = {eid}
        stack = [child]
        while stack:
            w = stack.pop()
            for c, e in children[w]:
                out.add(e)
                stack.append(c)
        return out

    branches = [branch_edges(centroid, c, e) for c, e in children[centroid]]
    if parent[centroid] != -1:
        up = set(fragment)
        for b in branches:
            up -= b
        branches.append(up)
    branches.sort(key=len, reverse=True)
    lower = -(-m // (3 * d))
    side = set()
    i = 0
    while len(side) < lower:
        side |= branches[i]
        i += 1
    return [side, set(fragment) - side]


@dataclass(frozen=True)
class Decomposition:
    """Levels of edge-set fragments; level 1 is the whole edge set and the
    last level consists of single edges. parents[j][i] indexes level j-1."""

    d: int
    levels: tuple[tuple[frozenset[int], ...], ...]
    parents: tuple[tuple[int, ...], ...]

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def children_of(self, level: int, idx: int) -> list[int]:
        """Indices within 1-based `level`+1 of the fragments refining (level, idx)."""
        if level >= self.num_levels:
            return []
        return [i for i, p in enumerate(self.parents[level]) if p == idx]


def build_decomposition(tree, d: int | None = None) -> Decomposition:
    """Recursively refine the edge set until only single edges remain.

    Fragments of at least d edges get an almost-balanced split; smaller ones
    fall apart into individual edges. The override `d` exists for tests; by
    default d = max(2, ceil(sqrt(log2 n))).
    """
    if tree.num_vertices < 2:
        raise InvalidInstanceError("decomposition needs at least one edge")
    if d is None:
        d = branching_parameter(tree.num_vertices)
    if d < 2:
        raise InvalidInstanceError("branching parameter d must be at least 2")
    level: list[frozenset[int]] = [frozenset(range(tree.num_edges))]
    levels = [tuple(level)]
    parents: list[tuple[int, ...]] = [(-1,)]
    while any(len(f) > 1 for f in level):
        next_level: list[frozenset[int]] = []
        next_parents: list[int] = []
        for idx, frag in enumerate(level):
            if len(frag) == 1:
                kids = [frag]
            elif len(frag) < d:
                kids = [frozenset({e}) for e in sorted(frag)]
            else:
                kids = almost_balanced_decomposition(tree, frag, d)
            for kid in kids:
                next_level.append(kid)
                next_parents.append(idx)
        levels.append(tuple(next_level))
        parents.append(tuple(next_parents))
        level = next_level
    return Decomposition(d=d, levels=tuple(levels), parents=tuple(parents))


@dataclass(frozen=True)
class CommodityAssignment:
    """Commodity -> (level, fragment) assignment.

    level_of uses 1-based levels; a value equal to the level count marks the
    extra class of single-edge paths, which no level ever separates.
    """

    level_of: tuple[int, ...]
    fragment_of: tuple[int, ...]
    by_fragment: dict = field(compare=False)
    extra: tuple[int, ...] = ()


def classify_commodities(decomp: Decomposition, instance: Instance) -> CommodityAssignment:
    masks = [
        [edge_mask(f) for f in level_frags] for level_frags in decomp.levels
    ]
    level_of = []
    fragment_of = []
    by_fragment: dict[tuple[int, int], list[int]] = {}
    extra = []
    for i in range(instance.num_commodities):
        pm = instance.paths[i]
        if pm.bit_count() == 1:
            level_of.append(decomp.num_levels)
            fragment_of.append(-1)
            extra.append(i)
            continue
        level, idx = 1, 0
        while level < decomp.num_levels:
            child = next(
                (
                    c
                    for c in decomp.children_of(level, idx)
                    if pm & ~masks[level][c] == 0
                ),
                None,
            )
            if child is None:
                break
            level, idx = level + 1, child
        level_of.append(level)
        fragment_of.append(idx)
        by_fragment.setdefault((level, idx), []).append(i)
    return CommodityAssignment(
        tuple(level_of), tuple(fragment_of), by_fragment, tuple(extra)
    )


@dataclass(frozen=True)
class Segment:
    """A maximal skeleton subpath with no border or junction inner vertices."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def terminals(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SkeletonInfo:
    border: frozenset[int]
    edges: frozenset[int]
    vertices: frozenset[int]
    junctions: frozenset[int]
    segments: tuple[Segment, ...]


def compute_skeleton(tree, fragment_edges: Iterable[int], child_fragments: Sequence[Iterable[int]]) -> SkeletonInfo:
    """Border vertices (shared by >= 2 child fragments), the subtree spanning
    them, junction vertices, and the segment partition of that subtree."""
    fragment = frozenset(fragment_edges)
    vertex_sets = []
    for child in child_fragments:
        vs = set()
        for eid in child:
            vs.update(tree.edges[eid])
        vertex_sets.append(vs)
    counts: dict[int, int] = {}
    for vs in vertex_sets:
        for v in vs:
            counts[v] = counts.get(v, 0) + 1
    border = frozenset(v for v, c in counts.items() if c >= 2)
    if len(border) <= 1:
        return SkeletonInfo(border, frozenset(), border, frozenset(), ())

    # prune non-border leaves until only the spanning subtree remains
    skel = set(fragment)
    adj: dict[int, set[int]] = {}
    for eid in fragment:
        u, v = tree.edges[eid]
        adj.setdefault(u, set()).add(eid)
        adj.setdefault(v, set()).add(eid)
    queue = [v for v in adj if len(adj[v]) == 1 and v not in border]
    while queue:
        v = queue.pop()
        if v in border or len(adj[v]) != 1:
            continue
        eid = next(iter(adj[v]))
        skel.discard(eid)
        adj[v].clear()
        u, w = tree.edges[eid]
        other = w if u == v else u
        adj[other].discard(eid)
        if len(adj[other]) == 1 and other not in border:
            queue.append(other)

    sverts = set()
    sdeg: dict[int, int] = {}
    incident: dict[int, list[int]] = {}
    for eid in skel:
        for v in tree.edges[eid]:
            sverts.add(v)
            sdeg[v] = sdeg.get(v, 0) + 1
            incident.setdefault(v, []).append(eid)
    junctions = frozenset(v for v in sverts if sdeg[v] >= 3 and v not in border)
    breakpoints = set(border) | set(junctions)

    segments = []
    used: set[int] = set()
    for b in sorted(breakpoints):
        for eid in sorted(incident.get(b, ())):
            if eid in used:
                continue
            verts = [b]
            edges = []
            cur, e = b, eid
            while True:
                used.add(e)
                edges.append(e)
                u, v = tree.edges[e]
                cur = v if u == cur else u
                verts.append(cur)
                if cur in breakpoints:
                    break
                e = next(x for x in incident[cur] if x != e)
            segments.append(Segment(tuple(verts), tuple(edges)))
    return SkeletonInfo(border, frozenset(skel), frozenset(sverts), junctions, tuple(segments))


def _hanging_subtrees(tree, fragment: frozenset[int], skeleton: SkeletonInfo):
    """Connected components of the fragment minus skeleton edges, each with
    its unique attachment vertex on the skeleton."""
    skel_verts = skeleton.vertices if skeleton.vertices else skeleton.border
    rest = sorted(fragment - skeleton.edges)
    adj: dict[int, list[tuple[int, int]]] = {}
    for eid in rest:
        u, v = tree.edges[eid]
        adj.setdefault(u, []).append((v, eid))
        adj.setdefault(v, []).append((u, eid))
    seen_edges: set[int] = set()
    comps = []
    for start in rest:
        if start in seen_edges:
            continue
        comp_edges = {start}
        seen_edges.add(start)
        u0, v0 = tree.edges[start]
        comp_verts = {u0, v0}
        stack = [u0, v0]
        while stack:
            v = stack.pop()
            if v in skel_verts:
                continue  # do not cross the skeleton
            for w, eid in adj.get(v, ()):
                if eid not in seen_edges:
                    seen_edges.add(eid)
                    comp_edges.add(eid)
                    if w not in comp_verts:
                        comp_verts.add(w)
                        stack.append(w)
        attach = comp_verts & skel_verts
        if len(attach) != 1:
            raise FzaError(f"hanging subtree touches skeleton at {sorted(attach)}")
        comps.append((min(comp_edges), frozenset(comp_edges), frozenset(comp_verts), next(iter(attach))))
    comps.sort()
    return [(edges, verts, attach) for _, edges, verts, attach in comps]


def non_skeleton_solve(
    instance: Instance,
    fragment_edges: Iterable[int],
    skeleton: SkeletonInfo,
    commodity_ids: Sequence[int],
    rng,
) -> frozenset[int]:
    """Candidate cutting only non-skeleton edges of the fragment.

    Each hanging subtree is deactivated with probability 1/2; an active
    subtree is solved exactly as an instance rooted at its attachment vertex,
    restricted to commodities with exactly one endpoint inside it and the
    other endpoint on the skeleton or in a deactivated subtree.
    """
    fragment = frozenset(fragment_edges)
    skel_verts = skeleton.vertices if skeleton.vertices else skeleton.border
    comps = _hanging_subtrees(instance.tree, fragment, skeleton)
    active = [rng.random() >= 0.5 for _ in comps]

    inside: list[frozenset[int]] = [verts - {attach} for _, verts, attach in comps]

    def locate(v: int) -> int | None:
        for idx, vs in enumerate(inside):
            if v in vs:
                return idx
        return None

    cuts: set[int] = set()
    for idx, (comp_edges, comp_verts, attach) in enumerate(comps):
        if not active[idx]:
            continue
        members = []
        for i in commodity_ids:
            c = instance.commodities[i]
            loc_s, loc_t = locate(c.source), locate(c.target)
            if (loc_s == idx) == (loc_t == idx):
                continue
            inner_end = c.source if loc_s == idx else c.target
            other_end = c.target if loc_s == idx else c.source
            other_loc = loc_t if loc_s == idx else loc_s
            if other_end in skel_verts or (other_loc is not None and not active[other_loc]):
                members.append((inner_end, instance.commodities[i]))
        sub_verts = sorted(comp_verts)
        vmap = {v: p for p, v in enumerate(sub_verts)}
        sub_edge_ids = sorted(comp_edges)
        sub_tree = Tree(
            num_vertices=len(sub_verts),
            edges=tuple((vmap[instance.tree.edges[e][0]], vmap[instance.tree.edges[e][1]]) for e in sub_edge_ids),
        )
        sub_commodities = [
            Commodity(vmap[attach], vmap[inner_end], c.budget, c.weight)
            for inner_end, c in members
        ]
        sub = Instance.create(sub_tree, instance.pricing, sub_commodities)
        result = rooted_dp(sub, root=vmap[attach])
        cuts.update(sub_edge_ids[e] for e in result.cuts)
    assert not cuts & skeleton.edges
    return frozenset(cuts)


def segment_guesses(length: int) -> tuple[int, ...]:
    """Allowed cut-count guesses for a segment: 0 and the powers of two up to
    the segment length."""
    out = [0]
    p = 1
    while p <= length:
        out.append(p)
        p <<= 1
    return tuple(out)


def build_aux_instance(
    instance: Instance,
    skeleton: SkeletonInfo,
    seg_index: int,
    guesses: Sequence[int],
    root: int,
    active: Sequence[bool],
    commodity_ids: Sequence[int],
) -> tuple[GeneralizedPathInstance, list[int]]:
    """Reduced instance on one active segment, rooted at one of its terminals.

    A commodity joins if the root is an inner vertex of its path, the segment
    is not fully inside the path, and its far outer segment (the one missing
    the root, if any) is inactive. Its path shrinks to the prefix of the
    segment, its budget drops by the cuts already committed to active inner
    segments, and its pricing table shifts by the same amount. Commodities
    whose shifted budget would be negative are omitted.

    Returns the path instance plus the position -> original edge id map.
    """
    segments = skeleton.segments
    seg = segments[seg_index]
    if root == seg.vertices[0]:
        verts, eids = seg.vertices, list(seg.edges)
    elif root == seg.vertices[-1]:
        verts, eids = seg.vertices[::-1], list(seg.edges[::-1])
    else:
        raise InvalidInstanceError(f"root {root} is not a terminal of segment {seg_index}")
    seg_masks = [edge_mask(s.edges) for s in segments]
    seg_mask = seg_masks[seg_index]
    seg_vertex_sets = [set(s.vertices) for s in segments]
    inner_seg_of: dict[int, int] = {}
    for si, s in enumerate(segments):
        for v in s.vertices[1:-1]:
            inner_seg_of[v] = si
    incident = instance.tree.incident_masks

    commodities = []
    for i in commodity_ids:
        c = instance.commodities[i]
        pm = instance.paths[i]
        if (pm & incident[root]).bit_count() != 2:
            continue  # root must be an inner vertex of the path
        if pm & seg_mask == seg_mask:
            continue  # the segment lies fully inside the path
        reduced = pm & seg_mask
        if reduced == 0:
            continue
        blocked = False
        for endpoint in (c.source, c.target):
            osi = inner_seg_of.get(endpoint)
            if osi is None or osi == seg_index:
                continue
            if root not in seg_vertex_sets[osi] and active[osi]:
                blocked = True
        if blocked:
            continue
        shift = sum(
            guesses[si]
            for si in range(len(segments))
            if si != seg_index and active[si] and seg_masks[si] & pm == seg_masks[si]
        )
        budget = c.budget - shift
        if budget < 0:
            continue
        length = reduced.bit_count()
        if any(eids[p] not in mask_to_edges(reduced) for p in range(length)):
            raise FzaError("reduced path is not a prefix of the segment")
        table = tuple(instance.pricing.values[x + shift] for x in range(length + 1))
        commodities.append(GeneralizedCommodity(verts[length], budget, c.weight, table))
    return GeneralizedPathInstance(tuple(verts), tuple(commodities)), eids


def skeleton_solve(
    instance: Instance,
    skeleton: SkeletonInfo,
    commodity_ids: Sequence[int],
    rng_labels: tuple,
    guess_budget: int = 10**6,
) -> frozenset[int]:
    """Candidate cutting only skeleton edges.

    For every combination of per-segment cut-count guesses: deactivate each
    segment with probability 1/2, pick a random terminal as root for the
    survivors, place exactly the guessed number of cuts per active segment
    with the generalized path DP, and keep the combination with the best
    revenue over the fragment's commodities.
    """
    segments = skeleton.segments
    if not segments:
        return frozenset()
    options = [segment_guesses(len(s)) for s in segments]
    total = 1
    for opt in options:
        total *= len(opt)
        if total > guess_budget:
            raise CapacityError(
                f"guess space exceeds budget {guess_budget} for {len(segments)} segments"
            )
    best_rev: Fraction | None = None
    best: frozenset[int] = frozenset()
    for gi, guess in enumerate(itertools.product(*options)):
        rng = substream(*rng_labels, gi)
        active = []
        roots = []
        for seg in segments:
            deactivated = rng.random() < 0.5
            active.append(not deactivated)
            if deactivated:
                roots.append(None)
            else:
                t1, t2 = seg.terminals
                roots.append(t1 if rng.random() < 0.5 else t2)
        cuts: set[int] = set()
        for si, seg in enumerate(segments):
            if not active[si]:
                continue
            aux, eids = build_aux_instance(
                instance, skeleton, si, guess, roots[si], active, commodity_ids
            )
            sub = generalized_rooted_path_dp(aux, guess[si])
            cuts.update(eids[p] for p in sub.cuts)
            assert len(set(sub.cuts)) == guess[si]
        rev = revenue_for(instance, commodity_ids, cuts)
        if best_rev is None or rev > best_rev:
            best_rev = rev
            best = frozenset(cuts)
    assert best <= skeleton.edges
    return best


def _single_edge_candidate(instance: Instance, extra_ids: Sequence[int]) -> frozenset[int]:
    """Exact per-edge choice for commodities whose path is a single edge."""
    f = instance.pricing
    by_edge: dict[int, list[Commodity]] = {}
    for i in extra_ids:
        eid = instance.paths[i].bit_length() - 1
        by_edge.setdefault(eid, []).append(instance.commodities[i])
    cuts = []
    for eid, members in by_edge.items():
        keep = sum(c.weight * f(0) for c in members)
        cut = sum(c.weight * f(1) for c in members if c.budget >= 1)
        if cut > keep:
            cuts.append(eid)
    return frozenset(cuts)


def sublog(
    instance: Instance,
    seed: int,
    diagnostics: bool = False,
    guess_budget: int = 10**6,
) -> SolveResult:
    """Divide-and-select over the decomposition levels.

    Per level, each fragment with assigned commodities runs both the
    non-skeleton and the skeleton subroutine and keeps the better one by the
    revenue of its own commodities; fragment cut sets merge into one level
    candidate. The single-edge class gets an exact candidate. The best
    candidate by full revenue wins, with the empty set always in the running.
    """
    tree = instance.tree
    if tree.num_edges == 0:
        return make_result(instance, (), algorithm="sublog", seed=seed)
    decomp = build_decomposition(tree)
    assignment = classify_commodities(decomp, instance)
    candidates: list[frozenset[int]] = [frozenset()]
    detail: dict = {"d": decomp.d, "levels": [len(lv) for lv in decomp.levels]}
    fragments_info = []
    for level in range(1, decomp.num_levels):
        level_cuts: set[int] = set()
        touched = False
        for idx in range(len(decomp.levels[level - 1])):
            ids = assignment.by_fragment.get((level, idx))
            if not ids:
                continue
            touched = True
            frag = decomp.levels[level - 1][idx]
            kids = [decomp.levels[level][c] for c in decomp.children_of(level, idx)]
            skel = compute_skeleton(tree, frag, kids)
            rng_ns = substream(seed, "sublog", "nonskel", level, idx)
            f_ns = non_skeleton_solve(instance, frag, skel, ids, rng_ns)
            f_s = skeleton_solve(
                instance, skel, ids, (seed, "sublog", "skel", level, idx), guess_budget
            )
            rev_ns = revenue_for(instance, ids, f_ns)
            rev_s = revenue_for(instance, ids, f_s)
            chosen = f_ns if rev_ns >= rev_s else f_s
            level_cuts |= chosen
            if diagnostics:
                fragments_info.append(
                    {
                        "level": level,
                        "fragment": idx,
                        "edges": sorted(frag),
                        "border": sorted(skel.border),
                        "skeleton": sorted(skel.edges),
                        "segments": [list(s.edges) for s in skel.segments],
                        "commodities": list(ids),
                        "picked": "non-skeleton" if rev_ns >= rev_s else "skeleton",
                    }
                )
        if touched:
            candidates.append(frozenset(level_cuts))
    if assignment.extra:
        candidates.append(_single_edge_candidate(instance, assignment.extra))

    best_rev: Fraction | None = None
    best: frozenset[int] = frozenset()
    for cand in candidates:
        rev = total_revenue_mask(instance, edge_mask(cand))
        if best_rev is None or rev > best_rev:
            best_rev = rev
            best = cand
    diag = {"candidates": len(candidates), "num_levels": decomp.num_levels}
    if diagnostics:
        diag.update(detail)
        diag["fragments"] = fragments_info
    return make_result(instance, best, algorithm="sublog", seed=seed, diagnostics=diag)
