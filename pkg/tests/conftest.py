import itertools

import numpy as np
import pytest
from hypothesis import settings

from sdnapl import dist, netgen

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def enumerate_sum(pmfs):
    """Brute-force pmf of the sum of independent draws."""
    out = {}
    for combo in itertools.product(*[p.as_dict().items() for p in pmfs]):
        v = sum(x for x, _ in combo)
        out[v] = out.get(v, 0.0) + float(np.prod([q for _, q in combo]))
    return out


def enumerate_min(pmf, count):
    out = {}
    for combo in itertools.product(pmf.as_dict().items(), repeat=count):
        v = min(x for x, _ in combo)
        out[v] = out.get(v, 0.0) + float(np.prod([q for _, q in combo]))
    return out


def assert_pmf_equals(d, table, atol=1e-12):
    expected = dist.DiscretePmf(np.array([table.get(i, 0.0) for i in range(max(table) + 1)]))
    assert d.allclose(expected, atol), (d.as_dict(), table)


@pytest.fixture(scope="session")
def weights():
    return dist.load_pmf(dist.sample_weights_path())


def line_network(edges_by_domain, links, m=None, n=None):
    """Hand-built network: edges_by_domain[d] = [(u, v, w)], links = [(da, ua, db, ub)]."""
    m = m or len(edges_by_domain)
    n = n or 1 + max(max(u, v) for es in edges_by_domain for u, v, _ in es)
    inter = [netgen.InterDomainLink(*k) for k in links]
    domain_edges = sorted({(min(k[0], k[2]), max(k[0], k[2])) for k in links})
    return netgen.TwoLayerNetwork(m, n, 1, 0, domain_edges, [list(es) for es in edges_by_domain], inter)
