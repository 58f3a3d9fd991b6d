"""Path construction under the four synchronization scenarios.

MS and SS route domain by domain along a shortest domain-wise path, MS by
hop count and SS by accumulated weight.  PS routes jointly inside clusters
of ``tau`` consecutive domains.  CS is a global shortest path.

Random ties are resolved in two steps: a uniform pick among the targets at
minimal distance, then a uniform pick among tight predecessors while
walking back to the source.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .netgen import TwoLayerNetwork


class RoutingError(RuntimeError):
    pass


class Unreachable(RoutingError):
    pass


class NoGateway(RoutingError):
    pass


@dataclass(frozen=True)
class FlowRequest:
    src: tuple[int, int]
    dst: tuple[int, int]

    def __post_init__(self):
        if self.src[0] == self.dst[0]:
            raise ValueError(f"source and destination share domain {self.src[0]}; only cross-domain requests are routed")


@dataclass
class RoutePath:
    nodes: list[tuple[int, int]]
    hop_weights: list[int]
    domain_sequence: list[int]
    scenario: str

    @property
    def total_weight(self) -> int:
        return sum(self.hop_weights)

    @property
    def hop_count(self) -> int:
        return len(self.hop_weights)

    def format(self) -> str:
        parts = [f"{self.nodes[0][0]}:{self.nodes[0][1]}"]
        for (d, v), w in zip(self.nodes[1:], self.hop_weights):
            parts.append(f"-({w})-> {d}:{v}")
        return " ".join(parts)


def _collapse(domains) -> list[int]:
    out: list[int] = []
    for d in domains:
        if not out or out[-1] != d:
            out.append(d)
    return out


def domain_wise_shortest_path(net: TwoLayerNetwork, src_domain: int, dst_domain: int, rng: np.random.Generator) -> list[int]:
    for d in (src_domain, dst_domain):
        if not 0 <= d < net.m:
            raise ValueError(f"domain {d} out of range 0..{net.m - 1}")
    depth = {src_domain: 0}
    queue = deque([src_domain])
    while queue:
        a = queue.popleft()
        if a == dst_domain:
            break
        for b in net.domain_adj[a]:
            if b not in depth:
                depth[b] = depth[a] + 1
                queue.append(b)
    if dst_domain not in depth:
        raise Unreachable(f"domain {dst_domain} unreachable from {src_domain}")
    path = [dst_domain]
    while path[-1] != src_domain:
        here = path[-1]
        preds = [b for b in net.domain_adj[here] if depth.get(b) == depth[here] - 1]
        path.append(preds[rng.integers(len(preds))])
    return path[::-1]


def _search(net, source, allowed, targets, use_weights):
    """Dijkstra (or BFS-equivalent with unit costs) from ``source``.

    ``allowed`` limits the node set by domain.  Returns
    (dist, settle_order, best_target_distance).
    """
    n = net.n
    adj = net.adj
    dist = {source: 0}
    order = {}
    heap = [(0, source)]
    best = None
    while heap:
        d, u = heapq.heappop(heap)
        if u in order:
            continue
        if best is not None and d > best:
            break
        order[u] = len(order)
        if u in targets and best is None:
            best = d
        for v, w in adj[u]:
            if allowed is not None and v // n not in allowed:
                continue
            nd = d + (w if use_weights else 1)
            if v not in order and nd < dist.get(v, nd + 1):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist, order, best


def _segment(net, source, allowed, targets, use_weights, rng):
    dist, order, best = _search(net, source, allowed, targets, use_weights)
    if best is None:
        raise NoGateway(f"no target reachable from node {net.split(source)}")
    hits = sorted(t for t in targets if t in order and dist[t] == best)
    node = hits[rng.integers(len(hits))] if rng is not None else hits[0]
    path = [node]
    while node != source:
        preds = []
        for p, w in net.adj[node]:
            # Settle order rules out cycles through zero-weight edges.
            if p not in order or order[p] >= order[node]:
                continue
            if dist[p] + (w if use_weights else 1) == dist[node]:
                preds.append(p)
        if rng is None:
            node = min(preds)
        else:
            node = preds[rng.integers(len(preds))]
        path.append(node)
    return path[::-1]


def _weight(net, a, b) -> int:
    best = None
    for v, w in net.adj[a]:
        if v == b and (best is None or w < best):
            best = w
    if best is None:
        raise RoutingError(f"{net.split(a)} and {net.split(b)} are not adjacent")
    return best


def _finish(net, gids, scenario) -> RoutePath:
    nodes = [net.split(g) for g in gids]
    weights = [_weight(net, a, b) for a, b in zip(gids, gids[1:])]
    return RoutePath(nodes, weights, _collapse(d for d, _ in nodes), scenario)


def _route_clusters(net, req, clusters, use_weights, rng, scenario) -> RoutePath:
    n = net.n
    current = net.node_id(*req.src)
    gids = [current]
    for idx, cluster in enumerate(clusters):
        # Every link with both ends inside the cluster is usable.
        allowed = set(cluster)
        last = cluster[-1]
        if idx == len(clusters) - 1:
            targets = {net.node_id(*req.dst)}
        else:
            nxt = clusters[idx + 1][0]
            gws = net.gateways.get((last, nxt))
            if not gws:
                raise NoGateway(f"domain {last} has no link to domain {nxt}")
            targets = {last * n + g for g in gws}
        seg = _segment(net, current, allowed, targets, use_weights, rng)
        gids.extend(seg[1:])
        if idx < len(clusters) - 1:
            exit_node = seg[-1] - last * n
            peers = net.link_peers[(last, exit_node, nxt)]
            current = nxt * n + peers[rng.integers(len(peers))]
            gids.append(current)
    return _finish(net, gids, scenario)


def route_ms(net: TwoLayerNetwork, req: FlowRequest, rng: np.random.Generator, domains: list[int] | None = None) -> RoutePath:
    domains = domains or domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
    return _route_clusters(net, req, [[d] for d in domains], False, rng, "MS")


def route_ss(net: TwoLayerNetwork, req: FlowRequest, rng: np.random.Generator, domains: list[int] | None = None) -> RoutePath:
    domains = domains or domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
    return _route_clusters(net, req, [[d] for d in domains], True, rng, "SS")


def route_ps(
    net: TwoLayerNetwork, req: FlowRequest, tau: int, rng: np.random.Generator, domains: list[int] | None = None
) -> RoutePath:
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    domains = domains or domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
    clusters = [domains[i : i + tau] for i in range(0, len(domains), tau)]
    return _route_clusters(net, req, clusters, True, rng, f"PS{tau}")


def route_cs(net: TwoLayerNetwork, req: FlowRequest) -> RoutePath:
    src = net.node_id(*req.src)
    dst = net.node_id(*req.dst)
    try:
        seg = _segment(net, src, None, {dst}, True, None)
    except NoGateway:
        raise Unreachable(f"{req.dst} unreachable from {req.src}") from None
    return _finish(net, seg, "CS")


def route(net: TwoLayerNetwork, req: FlowRequest, scenario: str, rng: np.random.Generator, tau: int = 2) -> RoutePath:
    s = scenario.upper()
    if s == "MS":
        return route_ms(net, req, rng)
    if s == "SS":
        return route_ss(net, req, rng)
    if s.startswith("PS"):
        return route_ps(net, req, int(s[2:]) if len(s) > 2 else tau, rng)
    if s == "CS":
        return route_cs(net, req)
    raise ValueError(f"unknown scenario {scenario!r}")
