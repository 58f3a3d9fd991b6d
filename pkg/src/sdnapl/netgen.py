"""Random two-layer network realizations.

Graphs are plain edge lists over ``0..n-1`` with ``u < v``.  A
:class:`TwoLayerNetwork` bundles ``m`` weighted intra-domain graphs, the
domain-wise graph and the gateway links between domains, plus lookup
tables that the routers use.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import dist
from .dist import DiscretePmf

log = logging.getLogger(__name__)

MAX_REJECT_ATTEMPTS = 100


class InfeasibleSequence(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


@dataclass
class Graph:
    n: int
    edges: list[tuple[int, int]]
    repairs: int = 0

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_connected(self) -> bool:
        return len(components(self.n, self.edges)) == 1


def components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return [groups[r] for r in sorted(groups)]


def _non_bridges(adj: dict[int, set[int]], root: int) -> list[tuple[int, int]]:
    """Edges of root's component that lie on a cycle (iterative lowlink)."""
    disc: dict[int, int] = {root: 0}
    low: dict[int, int] = {root: 0}
    bridges: set[tuple[int, int]] = set()
    stack = [(root, -1, iter(sorted(adj[root])))]
    while stack:
        u, parent, it = stack[-1]
        for v in it:
            if v == parent:
                continue
            if v in disc:
                low[u] = min(low[u], disc[v])
            else:
                disc[v] = low[v] = len(disc)
                stack.append((v, u, iter(sorted(adj[v]))))
                break
        else:
            stack.pop()
            if parent >= 0:
                low[parent] = min(low[parent], low[u])
                if low[u] > disc[parent]:
                    bridges.add((min(u, parent), max(u, parent)))
    edges = {(min(u, v), max(u, v)) for u in disc for v in adj[u]}
    return sorted(edges - bridges)


def repair_connectivity(n: int, edges: list[tuple[int, int]], rng: np.random.Generator) -> int:
    """Merge all components into the first one; returns the number of repairs.

    A component is attached by a degree-preserving swap when possible: a
    cycle edge (a, b) of the joined part and an edge (c, d) of the component
    become (a, c) and (b, d).  Components without edges, or joins that find
    no cycle edge, fall back to adding one random edge.
    """
    comps = components(n, edges)
    if len(comps) == 1:
        return 0
    edge_set = set(edges)
    adj: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)

    def drop(u, v):
        edge_set.discard((min(u, v), max(u, v)))
        adj[u].discard(v)
        adj[v].discard(u)

    def add(u, v):
        edge_set.add((min(u, v), max(u, v)))
        adj[u].add(v)
        adj[v].add(u)

    joined = list(comps[0])
    root = comps[0][0]
    for comp in comps[1:]:
        inner = sorted((u, v) for u, v in edge_set if u in set(comp))
        cycle = _non_bridges(adj, root) if inner else []
        if cycle:
            a, b = cycle[rng.integers(len(cycle))]
            c, d = inner[rng.integers(len(inner))]
            if rng.random() < 0.5:
                c, d = d, c
            drop(a, b)
            drop(c, d)
            add(a, c)
            add(b, d)
        else:
            a = joined[rng.integers(len(joined))]
            b = comp[rng.integers(len(comp))]
            add(a, b)
        joined.extend(comp)
    edges[:] = sorted(edge_set)
    return len(comps) - 1


def _finish(n: int, edge_set: set, rng, repair: bool) -> Graph | None:
    edges = sorted(edge_set)
    if repair:
        added = repair_connectivity(n, edges, rng)
        edges.sort()
        return Graph(n, edges, added)
    if len(components(n, edges)) != 1:
        return None
    return Graph(n, edges, 0)


def _retry(build, what: str) -> Graph:
    for _ in range(MAX_REJECT_ATTEMPTS):
        g = build()
        if g is not None:
            return g
    raise GenerationFailed(f"{what}: no connected realization in {MAX_REJECT_ATTEMPTS} attempts")


def graph_from_degree_pmf(n: int, degree: DiscretePmf, rng: np.random.Generator, repair: bool = True) -> Graph:
    """Pair random stubs towards sampled degree targets.

    Self-loops and duplicate edges are skipped.  Generation stops when no
    two unfinished vertices can still be joined; leftover stubs are dropped.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if degree.mean() < 1:
        raise ValueError("degree distribution must have mean >= 1")

    def build():
        # Systematic sampling: the target histogram is within 1/n of the pmf
        # for every value, with a random shift and a random vertex order.
        u = (rng.permutation(n) + rng.random()) / n
        targets = np.minimum(np.searchsorted(degree.cdf(), u * degree.cdf()[-1], side="right"), n - 1)
        if targets.sum() < n - 1:
            raise InfeasibleSequence(f"{int(targets.sum())} stubs cannot connect {n} vertices")
        remaining = targets.copy()
        stubs = np.repeat(np.arange(n), targets)
        rng.shuffle(stubs)
        stubs = list(stubs)
        edge_set: set[tuple[int, int]] = set()
        fails = 0
        while len(stubs) >= 2:
            i, j = rng.integers(len(stubs), size=2)
            u, v = stubs[i], stubs[j]
            pair = (min(u, v), max(u, v))
            if i == j or u == v or pair in edge_set:
                fails += 1
                if fails < 4 * len(stubs) + 16:
                    continue
                # Random probing keeps failing; check for a legal pair explicitly.
                active = sorted(set(stubs))
                legal = [
                    (a, b) for x, a in enumerate(active) for b in active[x + 1 :] if (a, b) not in edge_set
                ]
                if not legal:
                    break
                pair = legal[rng.integers(len(legal))]
                u, v = pair
                i, j = stubs.index(u), stubs.index(v)
            fails = 0
            edge_set.add(pair)
            remaining[u] -= 1
            remaining[v] -= 1
            for x in sorted((i, j), reverse=True):
                stubs[x] = stubs[-1]
                stubs.pop()
        return _finish(n, edge_set, rng, repair)

    return build() if repair else _retry(build, "degree-sequence graph")


def graph_ba(n: int, rho: int, rng: np.random.Generator) -> Graph:
    """Preferential attachment from a two-node seed graph."""
    if not n > rho >= 1:
        raise ValueError(f"need n > rho >= 1, got n={n}, rho={rho}")
    edges = [(0, 1)]
    # Each node appears once per incident edge, so uniform picks are degree-proportional.
    ends = [0, 1]
    for v in range(2, n):
        if v <= rho:
            chosen = list(range(v))
        else:
            picked: set[int] = set()
            while len(picked) < rho:
                picked.add(ends[rng.integers(len(ends))])
            chosen = sorted(picked)
        for w in chosen:
            edges.append((w, v))
            ends.extend((w, v))
    edges.sort()
    return Graph(n, edges, 0)


def graph_er(n: int, p: float, rng: np.random.Generator, repair: bool = True) -> Graph:
    if not 0 < p <= 1:
        raise ValueError(f"p must be in (0, 1], got {p}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    iu, ju = np.triu_indices(n, k=1)

    def build():
        keep = rng.random(iu.size) < p
        edge_set = set(zip(iu[keep].tolist(), ju[keep].tolist()))
        return _finish(n, edge_set, rng, repair)

    return build() if repair else _retry(build, "Erdos-Renyi graph")


@dataclass(frozen=True)
class TopologySource:
    """How to generate one layer: ``pmf:<path>``, ``ba:<rho>`` or ``er:<p>``."""

    kind: str
    pmf: DiscretePmf | None = None
    rho: int | None = None
    p: float | None = None
    label: str = ""

    @classmethod
    def parse(cls, text: str) -> "TopologySource":
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if not arg:
            raise ValueError(f"topology source {text!r} needs an argument, e.g. ba:1, er:0.015, pmf:degrees.txt")
        if kind == "ba":
            return cls.ba(int(arg))
        if kind == "er":
            return cls.er(float(arg))
        if kind == "pmf":
            return cls(kind="pmf", pmf=dist.load_pmf(arg), label=text)
        raise ValueError(f"unknown topology source kind {kind!r}")

    @classmethod
    def ba(cls, rho: int) -> "TopologySource":
        return cls(kind="ba", rho=rho, label=f"ba:{rho}")

    @classmethod
    def er(cls, p: float) -> "TopologySource":
        return cls(kind="er", p=p, label=f"er:{p!r}")

    @classmethod
    def degree(cls, pmf: DiscretePmf, label: str = "pmf") -> "TopologySource":
        return cls(kind="pmf", pmf=pmf, label=label)

    def generate(self, n: int, rng: np.random.Generator, repair: bool = True) -> Graph:
        if self.kind == "ba":
            return graph_ba(n, self.rho, rng)
        if self.kind == "er":
            return graph_er(n, self.p, rng, repair)
        if self.kind == "pmf":
            return graph_from_degree_pmf(n, self.pmf, rng, repair)
        raise ValueError(f"unknown topology source kind {self.kind!r}")


@dataclass(frozen=True)
class InterDomainLink:
    domain_a: int
    node_a: int
    domain_b: int
    node_b: int


@dataclass(eq=False)
class TwoLayerNetwork:
    m: int
    n: int
    beta: int
    seed: int
    domain_edges: list[tuple[int, int]]
    intra_edges: list[list[tuple[int, int, int]]]  # per domain: (u, v, w)
    inter_links: list[InterDomainLink]
    repairs: int = 0
    meta: dict = field(default_factory=dict)

    def node_id(self, domain: int, node: int) -> int:
        return domain * self.n + node

    def split(self, gid: int) -> tuple[int, int]:
        return divmod(gid, self.n)

    @cached_property
    def domain_adj(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.m)]
        for a, b in self.domain_edges:
            adj[a].append(b)
            adj[b].append(a)
        for row in adj:
            row.sort()
        return adj

    @cached_property
    def adj(self) -> list[list[tuple[int, int]]]:
        """Global adjacency over ``domain * n + node`` ids: (neighbour, weight)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.m * self.n)]
        for d, edges in enumerate(self.intra_edges):
            base = d * self.n
            for u, v, w in edges:
                adj[base + u].append((base + v, w))
                adj[base + v].append((base + u, w))
        for link in self.inter_links:
            a = self.node_id(link.domain_a, link.node_a)
            b = self.node_id(link.domain_b, link.node_b)
            adj[a].append((b, 1))
            adj[b].append((a, 1))
        for row in adj:
            row.sort()
        return adj

    @cached_property
    def gateways(self) -> dict[tuple[int, int], list[int]]:
        """(from_domain, to_domain) -> sorted gateway nodes in from_domain."""
        out: dict[tuple[int, int], set[int]] = {}
        for link in self.inter_links:
            out.setdefault((link.domain_a, link.domain_b), set()).add(link.node_a)
            out.setdefault((link.domain_b, link.domain_a), set()).add(link.node_b)
        return {k: sorted(v) for k, v in out.items()}

    @cached_property
    def link_peers(self) -> dict[tuple[int, int, int], list[int]]:
        """(domain, node, other_domain) -> nodes of other_domain linked to it."""
        out: dict[tuple[int, int, int], list[int]] = {}
        for link in self.inter_links:
            out.setdefault((link.domain_a, link.node_a, link.domain_b), []).append(link.node_b)
            out.setdefault((link.domain_b, link.node_b, link.domain_a), []).append(link.node_a)
        for v in out.values():
            v.sort()
        return out

    def link_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for link in self.inter_links:
            key = (link.domain_a, link.domain_b)
            counts[key] = counts.get(key, 0) + 1
        return counts

    def intra_weights(self) -> np.ndarray:
        return np.array([w for edges in self.intra_edges for _, _, w in edges], dtype=np.int64)

    def dumps(self) -> str:
        lines = [f"{self.m} {self.n} {self.beta} {self.seed}"]
        for d, edges in enumerate(self.intra_edges):
            lines.extend(f"{d} {u} {v} {w}" for u, v, w in edges)
        lines.extend(f"X {k.domain_a} {k.node_a} {k.domain_b} {k.node_b}" for k in self.inter_links)
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "TwoLayerNetwork":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 4:
            raise ValueError("network dump must start with 'm n beta seed'")
        m, n, beta, seed = (int(x) for x in rows[0])
        intra: list[list[tuple[int, int, int]]] = [[] for _ in range(m)]
        links = []
        for lineno, row in enumerate(rows[1:], 2):
            if row[0] == "X":
                if len(row) != 5:
                    raise ValueError(f"line {lineno}: inter edge needs 'X da ua db ub'")
                da, ua, db, ub = (int(x) for x in row[1:])
                if not (0 <= da < m and 0 <= db < m and 0 <= ua < n and 0 <= ub < n) or da == db:
                    raise ValueError(f"line {lineno}: bad inter-domain link {row}")
                links.append(InterDomainLink(da, ua, db, ub))
            else:
                if len(row) != 4:
                    raise ValueError(f"line {lineno}: intra edge needs 'd u v w'")
                d, u, v, w = (int(x) for x in row)
                if not (0 <= d < m and 0 <= u < n and 0 <= v < n) or u == v or w < 0:
                    raise ValueError(f"line {lineno}: bad intra-domain edge {row}")
                intra[d].append((u, v, w))
        domain_edges = sorted({(min(k.domain_a, k.domain_b), max(k.domain_a, k.domain_b)) for k in links})
        return cls(m, n, beta, seed, domain_edges, intra, links)

    @classmethod
    def load(cls, path: str | Path) -> "TwoLayerNetwork":
        return cls.loads(Path(path).read_text())


def assemble(
    m: int,
    n: int,
    beta: int,
    intra_source: TopologySource,
    inter_source: TopologySource,
    weight: DiscretePmf,
    rng: np.random.Generator | int,
    repair: bool = True,
) -> TwoLayerNetwork:
    """Build one realization: domain graph, m domains, beta link rounds, weights."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    if m < 2 or n < 2:
        raise ValueError(f"need m >= 2 and n >= 2, got m={m}, n={n}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else 0
    if isinstance(rng, np.random.Generator):
        topo_rng = link_rng = weight_rng = rng
    else:
        # Separate streams: topology and weights do not depend on beta, so
        # runs that differ only in beta share them.
        topo_rng, link_rng, weight_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))

    top = inter_source.generate(m, topo_rng, repair)
    domains = [intra_source.generate(n, topo_rng, repair) for _ in range(m)]

    links: list[InterDomainLink] = []
    for a, b in top.edges:
        seen: set[tuple[int, int]] = set()
        picks = link_rng.integers(n, size=(beta, 2))
        for ua, ub in picks.tolist():
            if (ua, ub) not in seen:
                seen.add((ua, ub))
                links.append(InterDomainLink(a, ua, b, ub))

    intra_edges = []
    for g in domains:
        w = dist.sample(weight, weight_rng, len(g.edges)).tolist()
        intra_edges.append([(u, v, wi) for (u, v), wi in zip(g.edges, w)])

    repairs = top.repairs + sum(g.repairs for g in domains)
    if repairs:
        log.debug("connectivity repair added %d edges", repairs)
    return TwoLayerNetwork(
        m=m,
        n=n,
        beta=beta,
        seed=seed,
        domain_edges=list(top.edges),
        intra_edges=intra_edges,
        inter_links=links,
        repairs=repairs,
    )


def expected_link_count(n: int, beta: int) -> float:
    return n * n * (1.0 - (1.0 - 1.0 / (n * n)) ** beta)


def empirical_degree_pmf(graphs) -> DiscretePmf:
    """Pooled degree histogram of the given graphs."""
    counts = np.bincount(np.concatenate([g.degrees() for g in graphs]))
    return DiscretePmf(counts / counts.sum())
