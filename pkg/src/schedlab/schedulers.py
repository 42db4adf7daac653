"""Classic per-slot baseline schedulers behind one interface.

All five operate at (UE, application) flow granularity, are work-conserving
(never give a flow more PRBs than its buffer can use), and never allocate to
inactive flows.  Allocations are integer (U, K) matrices summing to at most
the PRB budget.
"""

from dataclasses import dataclass

import numpy as np

PF_EWMA_ALPHA = 0.01   # ~100-slot throughput averaging horizon
PF_EPSILON = 1e-6

SCHEDULER_NAMES = ("rr", "mt", "pf", "edf", "lwdf")


@dataclass
class SchedulerContext:
    """Per-slot snapshot handed to every policy before transmission.

    Built by the environment from end-of-previous-slot state, so all
    schedulers (learned ones included, via ``observation``) act on the same
    information.
    """
    num_prbs: int
    sigma: np.ndarray          # (U, K) bool, flow has queued data
    demand_prbs: np.ndarray    # (U, K) int, PRBs needed to drain the buffer
    buffered_bits: np.ndarray  # (U, K) float
    hol_age: np.ndarray        # (U, K) int, slots since head-of-line arrival
    delay_budget: np.ndarray   # (U, K) int, slots until discard
    plr: np.ndarray            # (U, K) float, windowed loss rate
    plr_req: np.ndarray        # (U, K) float
    cqi: np.ndarray            # (U,) int
    prb_bits: np.ndarray       # (U,) float, useful bits per PRB this slot
    observation: np.ndarray    # (U, K, 4) state tensor for learned policies

    @property
    def shape(self):
        return self.sigma.shape


def _greedy_fill(ctx, order):
    """Give each flow in ``order`` its remaining demand until PRBs run out."""
    alloc = np.zeros(ctx.shape, dtype=np.int64)
    left = ctx.num_prbs
    for u, k in order:
        if left == 0:
            break
        n = min(int(ctx.demand_prbs[u, k]), left)
        alloc[u, k] = n
        left -= n
    return alloc


def _eligible_flows(ctx):
    us, ks = np.nonzero(ctx.sigma & (ctx.demand_prbs > 0))
    return list(zip(us.tolist(), ks.tolist()))


class RoundRobin:
    """One PRB at a time, cycling over active flows in fixed (u, k) order.

    The cursor persists across slots so long-run shares even out.
    """

    def __init__(self):
        self.cursor = 0

    def schedule(self, ctx):
        u_dim, k_dim = ctx.shape
        n_flows = u_dim * k_dim
        alloc = np.zeros(ctx.shape, dtype=np.int64)
        demand = ctx.demand_prbs * ctx.sigma
        flat_demand = demand.ravel()
        flat_alloc = alloc.ravel()
        pos = self.cursor % n_flows
        for _ in range(ctx.num_prbs):
            granted = False
            for off in range(n_flows):
                c = (pos + off) % n_flows
                if flat_alloc[c] < flat_demand[c]:
                    flat_alloc[c] += 1
                    pos = (c + 1) % n_flows
                    granted = True
                    break
            if not granted:
                break
        self.cursor = pos
        return alloc


class MaxThroughput:
    """All PRBs to the best-channel flows first (demand-capped)."""

    def schedule(self, ctx):
        flows = _eligible_flows(ctx)
        flows.sort(key=lambda f: (-ctx.prb_bits[f[0]], f[0], f[1]))
        return _greedy_fill(ctx, flows)


class ProportionalFair:
    """Rate-over-average-throughput metric with a per-flow EWMA history."""

    def __init__(self, alpha=PF_EWMA_ALPHA, epsilon=PF_EPSILON):
        self.alpha = alpha
        self.epsilon = epsilon
        self.ewma = None  # (U, K) Mbps, lazily sized on first slot

    def schedule(self, ctx):
        if self.ewma is None:
            self.ewma = np.zeros(ctx.shape)
        flows = _eligible_flows(ctx)
        rate = ctx.prb_bits / 1000.0  # Mbps per PRB
        flows.sort(key=lambda f: (-rate[f[0]] / max(self.ewma[f], self.epsilon),
                                  f[0], f[1]))
        alloc = _greedy_fill(ctx, flows)
        served = alloc * ctx.prb_bits[:, None] / 1000.0
        self.ewma = (1.0 - self.alpha) * self.ewma + self.alpha * served
        return alloc


class EarliestDeadlineFirst:
    """Least slack (delay budget minus head-of-line age) served first."""

    def schedule(self, ctx):
        flows = _eligible_flows(ctx)
        slack = ctx.delay_budget - ctx.hol_age
        flows.sort(key=lambda f: (slack[f], f[0], f[1]))
        return _greedy_fill(ctx, flows)


class LargestWeightedDelayFirst:
    """Head-of-line delay weighted by -ln(loss requirement) / delay budget."""

    def schedule(self, ctx):
        flows = _eligible_flows(ctx)
        weight = -np.log(ctx.plr_req) / ctx.delay_budget
        flows.sort(key=lambda f: (-weight[f] * ctx.hol_age[f], f[0], f[1]))
        return _greedy_fill(ctx, flows)


def make_scheduler(name):
    """Fresh baseline instance (per-episode state like cursors is owned by it)."""
    table = {
        "rr": RoundRobin,
        "mt": MaxThroughput,
        "pf": ProportionalFair,
        "edf": EarliestDeadlineFirst,
        "lwdf": LargestWeightedDelayFirst,
    }
    if name not in table:
        raise ValueError(f"unknown scheduler: {name!r}")
    return table[name]()
