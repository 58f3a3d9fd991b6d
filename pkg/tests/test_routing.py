import itertools
from collections import Counter

import numpy as np
import pytest

from sdnapl import dist, netgen, routing
from sdnapl.netgen import TopologySource
from sdnapl.routing import FlowRequest

from conftest import line_network


def random_net(seed, m=4, n=5, beta=2, weight=None):
    weight = weight or dist.uniform([1, 2, 3, 4])
    return netgen.assemble(m, n, beta, TopologySource.er(0.6), TopologySource.er(0.6), weight, seed)


def simple_path_weights(net, src, dst, allowed=None):
    """All simple-path weights between two global ids (exhaustive DFS)."""
    out = []

    def walk(u, seen, w):
        if u == dst:
            out.append(w)
            return
        for v, c in net.adj[u]:
            if v in seen or (allowed is not None and v // net.n not in allowed):
                continue
            seen.add(v)
            walk(v, seen, w + c)
            seen.discard(v)

    walk(src, {src}, 0)
    return out


def all_pairs(net, domain, use_weights):
    """Floyd-Warshall on one domain's graph."""
    n = net.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v, w in net.intra_edges[domain]:
        c = w if use_weights else 1
        d[u, v] = d[v, u] = min(d[u, v], c)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def check_valid(net, req, path):
    assert path.nodes[0] == req.src and path.nodes[-1] == req.dst
    gids = [net.node_id(*x) for x in path.nodes]
    for (a, b), w in zip(zip(gids, gids[1:]), path.hop_weights):
        assert (b, w) in net.adj[a] or any(v == b for v, _ in net.adj[a])
    assert len(set(gids)) == len(gids)


def requests(net, rng, count):
    out = []
    while len(out) < count:
        a, b = rng.integers(net.m, size=2)
        if a != b:
            out.append(FlowRequest((int(a), int(rng.integers(net.n))), (int(b), int(rng.integers(net.n)))))
    return out


@pytest.mark.parametrize("seed", range(6))
def test_cs_matches_exhaustive_enumeration(seed):
    net = random_net(seed, m=3, n=4)
    rng = np.random.default_rng(seed)
    for req in requests(net, rng, 6):
        path = routing.route_cs(net, req)
        check_valid(net, req, path)
        best = min(simple_path_weights(net, net.node_id(*req.src), net.node_id(*req.dst)))
        assert path.total_weight == best


@pytest.mark.parametrize("seed", range(6))
def test_segments_are_optimal_per_domain(seed):
    net = random_net(seed, m=2, n=6, beta=3)
    rng = np.random.default_rng(seed)
    hops, wts = all_pairs(net, 0, False), all_pairs(net, 0, True)
    gws = net.gateways[(0, 1)]
    for u in range(net.n):
        req = FlowRequest((0, u), (1, 0))
        ms = routing.route_ms(net, req, rng)
        ss = routing.route_ss(net, req, rng)
        first_ms = next(i for i, x in enumerate(ms.nodes) if x[0] == 1)
        first_ss = next(i for i, x in enumerate(ss.nodes) if x[0] == 1)
        assert first_ms - 1 == min(hops[u, g] for g in gws)
        assert sum(ss.hop_weights[: first_ss - 1]) == min(wts[u, g] for g in gws)


def heavy_light_net():
    # Domain 0: 0 -(10)- 3 direct, or 0 -1- 1 -1- 2 -1- 3.  Node 3 links to 1:0.
    d0 = [(0, 3, 10), (0, 1, 1), (1, 2, 1), (2, 3, 1)]
    d1 = [(0, 1, 1), (1, 2, 1), (2, 3, 1)]
    return line_network([d0, d1], [(0, 3, 1, 0)])


def test_ss_prefers_light_ms_prefers_short():
    net = heavy_light_net()
    req = FlowRequest((0, 0), (1, 0))
    rng = np.random.default_rng(0)
    ms = routing.route_ms(net, req, rng)
    ss = routing.route_ss(net, req, rng)
    assert [x for x in ms.nodes] == [(0, 0), (0, 3), (1, 0)]
    assert ms.total_weight == 11
    assert ss.total_weight == 4 and ss.hop_count == 4


def test_single_link_cs_equals_ss():
    net = heavy_light_net()
    req = FlowRequest((0, 0), (1, 3))
    rng = np.random.default_rng(0)
    assert routing.route_cs(net, req).total_weight == routing.route_ss(net, req, rng).total_weight


def test_cs_takes_detour_domain():
    # Domains 0 and 2 are adjacent, but the direct gateway is far; domain 1 offers a shortcut.
    d0 = [(0, 1, 9), (0, 2, 1)]
    d1 = [(0, 1, 1)]
    d2 = [(0, 1, 1)]
    net = line_network([d0, d1, d2], [(0, 1, 2, 0), (0, 2, 1, 0), (1, 1, 2, 1)], n=3)
    req = FlowRequest((0, 0), (2, 0))
    rng = np.random.default_rng(0)
    ss = routing.route_ss(net, req, rng)
    cs = routing.route_cs(net, req)
    assert ss.domain_sequence == [0, 2] and ss.total_weight == 10
    assert cs.domain_sequence == [0, 1, 2] and cs.total_weight == 5


def test_degenerate_first_segment():
    net = heavy_light_net()
    path = routing.route_ms(net, FlowRequest((0, 3), (1, 0)), np.random.default_rng(0))
    assert path.nodes == [(0, 3), (1, 0)] and path.total_weight == 1


def test_random_ties_among_targets_and_predecessors():
    # 5-cycle: from node 0, gateways 2 and 3 are both two hops away.
    ring = [(i, (i + 1) % 5, 1) for i in range(5)]
    other = [(0, 1, 1)]
    net = line_network([ring, other], [(0, 2, 1, 0), (0, 3, 1, 0)], n=5)
    rng = np.random.default_rng(7)
    exits = Counter(routing.route_ms(net, FlowRequest((0, 0), (1, 0)), rng).nodes[2] for _ in range(400))
    assert set(exits) == {(0, 2), (0, 3)}
    assert 150 < exits[(0, 2)] < 250
    # 4-cycle: two tight predecessors towards node 2.
    sq = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]
    net = line_network([sq, other], [(0, 2, 1, 0)], n=4)
    mids = Counter(routing.route_ss(net, FlowRequest((0, 0), (1, 0)), rng).nodes[1] for _ in range(400))
    assert set(mids) == {(0, 1), (0, 3)}


def test_zero_weight_ties_do_not_loop():
    d0 = [(0, 1, 0), (1, 2, 0), (0, 2, 0), (2, 3, 1)]
    net = line_network([d0, [(0, 1, 1)]], [(0, 3, 1, 0)], n=4)
    rng = np.random.default_rng(1)
    for _ in range(50):
        req = FlowRequest((0, 0), (1, 1))
        path = routing.route_ss(net, req, rng)
        check_valid(net, req, path)
        assert path.total_weight == 3


@pytest.mark.parametrize("seed", range(4))
def test_equal_weights_make_ss_segment_match_ms(seed):
    net = random_net(seed, m=5, n=8, weight=dist.point_mass(2))
    rng = np.random.default_rng(seed)
    for req in requests(net, rng, 10):
        domains = routing.domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
        ms = routing.route_ms(net, req, rng, domains)
        ss = routing.route_ss(net, req, rng, domains)
        # Ingress picks downstream are random, so compare the first segment.
        cut_ms = next(i for i, x in enumerate(ms.nodes) if x[0] != req.src[0])
        cut_ss = next(i for i, x in enumerate(ss.nodes) if x[0] != req.src[0])
        assert sum(ms.hop_weights[: cut_ms - 1]) == sum(ss.hop_weights[: cut_ss - 1])


@pytest.mark.parametrize("seed", range(4))
def test_tau_one_is_ss(seed):
    net = random_net(seed, m=6, n=6)
    for req in requests(net, np.random.default_rng(seed), 5):
        a = routing.route_ps(net, req, 1, np.random.default_rng(seed))
        b = routing.route_ss(net, req, np.random.default_rng(seed))
        assert a.nodes == b.nodes


@pytest.mark.parametrize("seed", range(5))
def test_cs_never_worse_and_paths_valid(seed):
    net = random_net(seed, m=8, n=10, beta=3)
    rng = np.random.default_rng(seed)
    for req in requests(net, rng, 10):
        domains = routing.domain_wise_shortest_path(net, req.src[0], req.dst[0], rng)
        cs = routing.route_cs(net, req)
        for path in (routing.route_ms(net, req, rng, domains), routing.route_ss(net, req, rng, domains)):
            check_valid(net, req, path)
            assert path.domain_sequence == domains
            assert cs.total_weight <= path.total_weight
        for tau in (2, 3):
            path = routing.route_ps(net, req, tau, rng, domains)
            check_valid(net, req, path)
            # Inside a cluster the path may step back and forth between its domains.
            assert set(path.domain_sequence) <= set(domains)
            assert cs.total_weight <= path.total_weight


def test_ps_cluster_may_revisit_a_domain():
    # Inside domain 1 the ingress is far from the destination; a detour
    # 1 -> 0 -> 1 through the cluster is much lighter.
    d0 = [(0, 1, 20)]
    d1 = [(0, 3, 1), (3, 2, 20), (2, 1, 1), (0, 1, 20)]
    links = [(0, 0, 1, 0), (0, 1, 1, 3), (0, 1, 1, 2)]
    net = line_network([d0, d1], links, n=4)
    req = FlowRequest((0, 0), (1, 1))
    rng = np.random.default_rng(0)
    ps = routing.route_ps(net, req, 2, rng)
    assert ps.domain_sequence == [0, 1, 0, 1] and ps.total_weight == 5
    assert routing.route_ss(net, req, rng).total_weight == 21
    assert routing.route_cs(net, req).total_weight == 5


def test_ps_clusters_follow_domain_path():
    # Four domains in a line, each a 3-node path; tau = 2 gives clusters {0,1} and {2,3}.
    dom = [(0, 1, 1), (1, 2, 1)]
    links = [(0, 2, 1, 0), (0, 0, 1, 2), (1, 2, 2, 0), (1, 0, 2, 2), (2, 2, 3, 0)]
    net = line_network([dom] * 4, links, n=3)
    req = FlowRequest((0, 1), (3, 2))
    rng = np.random.default_rng(0)
    path = routing.route_ps(net, req, 2, rng)
    assert path.domain_sequence == [0, 1, 2, 3]
    assert routing.route_cs(net, req).total_weight <= path.total_weight


def test_domain_path_examples():
    net = heavy_light_net()
    assert routing.domain_wise_shortest_path(net, 0, 1, np.random.default_rng(0)) == [0, 1]
    with pytest.raises(ValueError):
        routing.domain_wise_shortest_path(net, 0, 5, np.random.default_rng(0))


def test_same_domain_request_rejected():
    with pytest.raises(ValueError, match="cross-domain"):
        FlowRequest((1, 0), (1, 2))


def test_dispatch_and_format():
    net = heavy_light_net()
    req = FlowRequest((0, 0), (1, 3))
    rng = np.random.default_rng(0)
    for s in ("ms", "SS", "ps2", "cs"):
        assert routing.route(net, req, s, rng).nodes[-1] == (1, 3)
    assert routing.route_cs(net, req).format().startswith("0:0 -(1)-> 0:1")
    with pytest.raises(ValueError):
        routing.route(net, req, "xs", rng)
