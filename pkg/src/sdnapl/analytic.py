"""Closed-form and recursive APL predictions for the four sync scenarios.

All quantities are expectations over random two-layer networks with the
given degree and weight distributions; nothing here looks at a concrete
network realization.  Inter-domain links have weight 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from . import dist
from .dist import DiscretePmf

# Overflow guard for beta ** (k - 1); min_of_iid itself is exact for any count.
DEFAULT_IID_CAP = 1e300
SHELL_COMPLETIONS = ("remainder", "renormalize", "none")


class DegenerateBranching(ValueError):
    """Second-neighbour count does not exceed first-neighbour count."""

    def __init__(self, z1: float, z2: float, what: str = "degree distribution"):
        self.z1 = z1
        self.z2 = z2
        super().__init__(
            f"branching ratio z2/z1 <= 1 for {what} (z1={z1:.6g}, z2={z2:.6g}); "
            "shortest-path length formulas need z2 > z1"
        )


@dataclass(frozen=True)
class ModelParams:
    n: int
    m: int
    beta: int
    intra_degree: DiscretePmf
    inter_degree: DiscretePmf
    weight: DiscretePmf
    max_value: int = dist.DEFAULT_MAX_VALUE
    iid_cap: float = DEFAULT_IID_CAP
    shell_completion: str = "remainder"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        for name in ("intra_degree", "inter_degree"):
            if getattr(self, name).mean() < 1:
                raise ValueError(f"{name} must have mean >= 1")
        if self.shell_completion not in SHELL_COMPLETIONS:
            raise ValueError(f"shell_completion must be one of {SHELL_COMPLETIONS}")

    def with_beta(self, beta: int) -> "ModelParams":
        return ModelParams(
            n=self.n,
            m=self.m,
            beta=beta,
            intra_degree=self.intra_degree,
            inter_degree=self.inter_degree,
            weight=self.weight,
            max_value=self.max_value,
            iid_cap=self.iid_cap,
            shell_completion=self.shell_completion,
        )


@dataclass(frozen=True)
class NeighborhoodMoments:
    z1: float
    z2: float
    h_max: int
    shell_sizes: tuple[float, ...]  # z_1..z_h_max
    population: int

    @property
    def ratio(self) -> float:
        return self.z2 / self.z1

    def shell_weights(self, completion: str, include_root: bool) -> list[tuple[int, float]]:
        """Probability that a random other vertex sits ``i`` hops away.

        The geometric shells stop at ``h_max``.  ``remainder`` puts the
        population they miss into shell ``h_max + 1``; ``renormalize``
        rescales the kept shells; ``none`` leaves the weights defective.
        """
        shells = [(i, z) for i, z in enumerate(self.shell_sizes, start=1)]
        total = self.population
        if include_root:
            shells.insert(0, (0, 1.0))
        else:
            total -= 1
        kept = math.fsum(z for _, z in shells)
        if completion == "remainder":
            rest = total - kept
            if rest > 1e-12:
                shells.append((self.h_max + 1, rest))
        elif completion == "renormalize":
            total = kept
        return [(i, z / total) for i, z in shells]

    def shell(self, i: int) -> float:
        """Expected number of vertices exactly ``i`` hops away (z_0 = 1)."""
        if i == 0:
            return 1.0
        return self.ratio ** (i - 1) * self.z1


@dataclass
class AplPrediction:
    scenario: str
    value: float
    intermediates: dict = field(default_factory=dict)


def neighborhood_moments(degree: DiscretePmf, population: int, what: str = "degree distribution") -> NeighborhoodMoments:
    k1 = degree.mean()
    if k1 <= 0:
        raise ValueError("degree distribution must have positive mean")
    z1 = k1
    z2 = dist.moment(degree, 2) - k1
    if z2 <= z1:
        raise DegenerateBranching(z1, z2, what)
    ratio = z2 / z1
    shells = []
    reached = 1.0
    while True:
        zi = ratio ** len(shells) * z1
        if reached + zi > population:
            break
        shells.append(zi)
        reached += zi
    if not shells:
        # Even the first shell overflows the population; keep it so that the
        # distance mixtures are never empty.
        shells.append(z1)
    return NeighborhoodMoments(z1=z1, z2=z2, h_max=len(shells), shell_sizes=tuple(shells), population=population)


def _log_ratio(moments: NeighborhoodMoments) -> float:
    if moments.z2 <= moments.z1:
        raise DegenerateBranching(moments.z1, moments.z2)
    return math.log(moments.z2 / moments.z1)


def domain_wise_apl(m: int, inter_moments: NeighborhoodMoments) -> float:
    """Mean hop length of the shortest domain-wise path (Delta)."""
    return math.log(m / inter_moments.z1) / _log_ratio(inter_moments) + 1.0


def intra_apl_hops(n: int, moments: NeighborhoodMoments) -> float:
    """Mean hop distance between two nodes of one domain."""
    return math.log(n / moments.z1) / _log_ratio(moments) + 1.0


def expected_gateways(n: int, beta: int) -> float:
    """Expected number of distinct gateways towards one neighbour domain."""
    if n < 1 or beta < 1:
        raise ValueError("n and beta must be >= 1")
    if beta == 1:
        return 1.0  # exact; the closed form rounds
    return -n * math.expm1(beta * math.log1p(-1.0 / n)) if n > 1 else 1.0


def gateway_threshold(n: int, moments: NeighborhoodMoments) -> float:
    return (n + 1) / (moments.z1 + 1)


def hops_to_nearest_gateway(n: int, gamma: float, moments: NeighborhoodMoments) -> float:
    """Mean hop count from a non-gateway to the nearest of ``gamma`` gateways."""
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    log_ratio = _log_ratio(moments)
    if gamma <= gateway_threshold(n, moments):
        return math.log((n + 1 - gamma) / (moments.z1 * gamma)) / log_ratio + 1.0
    return 1.0


class AnalyticModel:
    """Caches the moments and distributions shared by all predictions."""

    def __init__(self, params: ModelParams):
        self.params = params
        self._bus_exact: dict[int, tuple[DiscretePmf, DiscretePmf]] = {}
        self._bus_approx: dict[int, tuple[DiscretePmf, DiscretePmf]] = {}

    @cached_property
    def intra(self) -> NeighborhoodMoments:
        return neighborhood_moments(self.params.intra_degree, self.params.n, "intra-domain degree distribution")

    @cached_property
    def inter(self) -> NeighborhoodMoments:
        return neighborhood_moments(self.params.inter_degree, self.params.m, "inter-domain degree distribution")

    @cached_property
    def delta(self) -> float:
        return domain_wise_apl(self.params.m, self.inter)

    @cached_property
    def gamma(self) -> float:
        return expected_gateways(self.params.n, self.params.beta)

    @cached_property
    def l(self) -> float:
        return hops_to_nearest_gateway(self.params.n, self.gamma, self.intra)

    @cached_property
    def last_domain_hops(self) -> float:
        return intra_apl_hops(self.params.n, self.intra)

    @cached_property
    def D(self) -> DiscretePmf:
        p = self.params
        weights = self.intra.shell_weights(p.shell_completion, include_root=True)
        # A defective "none" weighting still has to yield a proper pmf here.
        total = math.fsum(w for _, w in weights)
        comps = [(w / total, dist.convolve_power(p.weight, i, p.max_value)) for i, w in weights]
        return dist.mixture(comps)

    @cached_property
    def M(self) -> DiscretePmf:
        return dist.min_of_iid(self.D, self.params.beta)

    def domain_hop_weights(self) -> list[tuple[int, float]]:
        """(q, probability) pairs: the shortest domain-wise path has q domains."""
        shells = self.inter.shell_weights(self.params.shell_completion, include_root=False)
        return [(i + 1, w) for i, w in shells]

    def bus(self, k: int, exact: bool = True) -> tuple[DiscretePmf, DiscretePmf]:
        if k < 1:
            raise ValueError(f"bus length must be >= 1, got {k}")
        return self._bus_exact_pmfs(k) if exact else self._bus_approx_pmfs(k)

    def _bus_exact_pmfs(self, k: int) -> tuple[DiscretePmf, DiscretePmf]:
        if k in self._bus_exact:
            return self._bus_exact[k]
        p = self.params
        if k == 1:
            out = (self.D, self.M)
        else:
            prev_d, _ = self._bus_exact_pmfs(k - 1)
            x = dist.shift(dist.convolve(prev_d, self.D, p.max_value), 1, p.max_value)
            y = dist.shift(dist.convolve(prev_d, self.M, p.max_value), 1, p.max_value)
            out = (dist.min_of_iid(x, p.beta), dist.min_of_iid(y, p.beta))
        self._bus_exact[k] = out
        return out

    def _bus_approx_pmfs(self, k: int) -> tuple[DiscretePmf, DiscretePmf]:
        if k in self._bus_approx:
            return self._bus_approx[k]
        p = self.params
        if k == 1:
            out = (self.D, self.M)
        else:
            count = min(math.exp(min((k - 1) * math.log(p.beta), 690.0)), p.iid_cap)
            head = dist.convolve_power(self.D, k - 1, p.max_value)
            z = dist.shift(dist.convolve(head, self.D, p.max_value), k - 1, p.max_value)
            y = dist.shift(dist.convolve(head, self.M, p.max_value), k - 1, p.max_value)
            out = (dist.min_of_iid(z, count), dist.min_of_iid(y, count))
        self._bus_approx[k] = out
        return out

    def ms(self) -> AplPrediction:
        p = self.params
        ew = p.weight.mean()
        n = p.n
        first = (n - self.gamma) * self.l / n
        value = (first * self.delta + self.last_domain_hops) * ew + self.delta
        return AplPrediction(
            "MS",
            value,
            {
                "delta": self.delta,
                "gamma": self.gamma,
                "gamma0": gateway_threshold(n, self.intra),
                "l": self.l,
                "E[W]": ew,
                "hops": first * self.delta + self.last_domain_hops + self.delta,
            },
        )

    def ss(self) -> AplPrediction:
        ed = self.D.mean()
        em = self.M.mean()
        value = self.delta * (em + 1.0) + ed
        return AplPrediction("SS", value, {"delta": self.delta, "gamma": self.gamma, "E[D]": ed, "E[M]": em})

    def ps_q(self, q: int, tau: int, exact: bool = False) -> float:
        """Expected weight when the domain-wise path visits ``q`` domains."""
        d_tau, m_tau = self.bus(tau, exact)
        theta = q % tau
        blocks = q // tau
        if theta == 0:
            return (blocks - 1) * (m_tau.mean() + 1.0) + d_tau.mean()
        d_theta, _ = self.bus(theta, exact)
        return blocks * (m_tau.mean() + 1.0) + d_theta.mean()

    def ps(self, tau: int, exact: bool = False) -> AplPrediction:
        if tau < 1:
            raise ValueError(f"tau must be >= 1, got {tau}")
        if tau == 1:
            # Single-domain clusters are exactly self-domain routing.
            ss = self.ss()
            return AplPrediction("PS1", ss.value, {**ss.intermediates, "tau": 1, "exact": exact})
        value = 0.0
        per_q = {}
        for q, w in self.domain_hop_weights():
            lq = self.ps_q(q, tau, exact)
            per_q[q] = lq
            value += lq * w
        d_tau, m_tau = self.bus(tau, exact)
        return AplPrediction(
            f"PS{tau}",
            value,
            {"tau": tau, "E[D_tau]": d_tau.mean(), "E[M_tau]": m_tau.mean(), "L_q": per_q, "exact": exact},
        )

    def cs(self, exact: bool = False) -> AplPrediction:
        value = 0.0
        per_k = {}
        for k, w in self.domain_hop_weights():
            lk = self.bus(k, exact)[0].mean()
            per_k[k] = lk
            value += lk * w
        return AplPrediction("CS", value, {"L_k": per_k, "exact": exact})


def intra_distance_pmf(params: ModelParams) -> DiscretePmf:
    return AnalyticModel(params).D


def bus_network_pmfs(params: ModelParams, k: int, exact: bool = True) -> tuple[DiscretePmf, DiscretePmf]:
    return AnalyticModel(params).bus(k, exact)


def apl_ms(params: ModelParams) -> AplPrediction:
    return AnalyticModel(params).ms()


def apl_ss(params: ModelParams) -> AplPrediction:
    return AnalyticModel(params).ss()


def apl_ps(params: ModelParams, tau: int, exact: bool = False) -> AplPrediction:
    return AnalyticModel(params).ps(tau, exact)


def apl_cs(params: ModelParams, exact: bool = False) -> AplPrediction:
    return AnalyticModel(params).cs(exact)
