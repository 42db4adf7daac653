"""Discrete-time single-cell downlink environment.

One step is one TTI: packet arrivals, transmission under the given PRB
allocation, deadline discards, sliding-window loss accounting, per-flow QoS
metrics, the fairness reward, and the channel-quality random walk.

Bit bookkeeping runs on integers in units of 1e-4 bit: per-PRB capacities
(efficiency x 12 x 14) have at most four decimal places, so arrivals,
transmissions, discards and buffer deltas balance exactly, with no float
drift across an episode.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import qoe
from .rng import STREAM_ARRIVALS, STREAM_CQI, STREAM_TRAFFIC, stream
from .schedulers import SchedulerContext

BIT_UNITS = 10_000

# CQI -> (modulation, code rate x1024, useful bits per symbol); index = CQI.
CQI_MCS_TABLE = (
    ("none", 0, 0.0),
    ("qpsk", 78, 0.1523),
    ("qpsk", 193, 0.3770),
    ("qpsk", 449, 0.8770),
    ("16qam", 378, 1.4766),
    ("16qam", 490, 1.9141),
    ("16qam", 616, 2.4063),
    ("64qam", 466, 2.7305),
    ("64qam", 567, 3.3223),
    ("64qam", 666, 3.9023),
    ("64qam", 772, 4.5234),
    ("64qam", 873, 5.1152),
    ("256qam", 711, 5.5547),
    ("256qam", 797, 6.2266),
    ("256qam", 885, 6.9141),
    ("256qam", 948, 7.4063),
)

SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_PRB = 14

# initial CQI distribution: 1% each for 0-3, 2% each for 4-6, 10% each for 7-15
CQI_INIT_PROBS = np.array([0.01] * 4 + [0.02] * 3 + [0.10] * 9)

MAX_CQI = 15

# buffer-length saturation for the observation feature
OBS_BUFFER_CAP = 1000


def prb_capacity_bits(cqi):
    """Useful bits one PRB carries in one TTI at the given CQI (0 for CQI 0)."""
    if not 0 <= cqi <= MAX_CQI:
        raise ValueError(f"CQI out of range: {cqi}")
    return CQI_MCS_TABLE[cqi][2] * SUBCARRIERS_PER_PRB * SYMBOLS_PER_PRB


# integer capacities for exact buffer accounting
CAP_UNITS = tuple(round(prb_capacity_bits(i) * BIT_UNITS) for i in range(16))


@dataclass(frozen=True)
class AppProfile:
    """Traffic and QoS profile of one application class."""
    kind: str                 # one of qoe.APP_KINDS
    rate_req_mbps: float
    latency_req_ms: float
    plr_req: float
    packet_bits: int
    arrivals_per_tti: float   # Poisson mean per slot
    delay_budget_slots: int   # age beyond which a packet is discarded
    priority: float

    def __post_init__(self):
        if self.kind not in qoe.APP_KINDS:
            raise ValueError(f"unknown application kind: {self.kind!r}")
        if self.rate_req_mbps < 0:
            raise ValueError("rate requirement must be >= 0")
        for name in ("latency_req_ms", "plr_req", "packet_bits",
                     "arrivals_per_tti", "delay_budget_slots", "priority"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


# kind -> (rate req Mbps, latency req ms, loss req, packet bytes,
#          packets per second, delay budget ms, priority)
_APP_DEFAULTS = {
    "ftp": (0.0, 300.0, 0.005, 1500, 500, 300, 1.0),
    "uhd": (3.0, 300.0, 0.01, 1500, 300, 300, 2.0),
    "web": (0.0, 300.0, 0.01, 150, 1000, 300, 1.0),
    "gaming": (5.0, 50.0, 0.01, 150, 5000, 50, 3.0),
    "voip": (0.06, 100.0, 0.01, 20, 500, 100, 4.0),
}

# applications of which a UE runs at most one per episode
EXCLUSIVE_KINDS = frozenset({"uhd", "web", "gaming"})


def default_profiles(kinds=qoe.APP_KINDS, tti_ms=1.0):
    """Standard profiles for the named application kinds at the given TTI."""
    out = []
    for kind in kinds:
        rate, lat, plr, pkt_bytes, pps, budget_ms, prio = _APP_DEFAULTS[kind]
        out.append(AppProfile(
            kind=kind,
            rate_req_mbps=rate,
            latency_req_ms=lat,
            plr_req=plr,
            packet_bits=pkt_bytes * 8,
            arrivals_per_tti=pps * tti_ms / 1000.0,
            delay_budget_slots=int(round(budget_ms / tti_ms)),
            priority=prio,
        ))
    return tuple(out)


@dataclass(frozen=True)
class SimConfig:
    """Environment dimensions, windows, and channel-walk parameters."""
    num_ues: int = 10
    num_apps: int = 5
    num_prbs: int = 100
    tti_ms: float = 1.0
    episode_slots: int = 60000
    plr_window: int = 500
    burst_window: int = 500
    server_latency_ms: float = 22.0
    cqi_change_period: int = 40
    cqi_stay_prob: float = 0.8
    cqi_up_prob: float = 0.1
    cqi_down_prob: float = 0.1
    master_seed: int = 0

    def __post_init__(self):
        if min(self.num_ues, self.num_apps, self.num_prbs) < 1:
            raise ValueError("num_ues, num_apps and num_prbs must be >= 1")
        if self.tti_ms <= 0 or self.plr_window <= 0 or self.burst_window <= 0:
            raise ValueError("tti_ms and window lengths must be positive")
        if self.episode_slots < 1 or self.cqi_change_period < 1:
            raise ValueError("episode_slots and cqi_change_period must be >= 1")
        psum = self.cqi_stay_prob + self.cqi_up_prob + self.cqi_down_prob
        if abs(psum - 1.0) > 1e-12:
            raise ValueError("CQI transition probabilities must sum to 1")


@dataclass
class Packet:
    arrival_slot: int
    size_units: int
    remaining_units: int


class FlowState:
    """FIFO packet buffer of one (UE, application) flow with loss accounting.

    Keeps full per-slot arrival and discard logs for the episode plus O(1)
    sliding-window sums for the loss rate, and tracks runs of consecutively
    discarded packets for the burst ratio.
    """

    def __init__(self, profile, episode_slots, has_traffic):
        self.profile = profile
        self.has_traffic = bool(has_traffic)
        self.queue = deque()
        self.buffered_units = 0
        n = episode_slots + 2
        self.arrival_log = np.zeros(n, dtype=np.int64)
        self.discard_log = np.zeros(n, dtype=np.int64)
        self._loss_num = 0   # discards inside the loss window
        self._loss_den = 0   # arrivals inside the budget-shifted window
        self._open_run = 0   # consecutive discards not yet broken by a delivery
        self._last_discard_slot = 0
        self._closed_runs = deque()  # (slot of last discard, run length)

    # -- per-slot lifecycle, driven by Env.step ---------------------------

    def add_arrivals(self, slot, count):
        self.arrival_log[slot] = count
        size = self.profile.packet_bits * BIT_UNITS
        for _ in range(count):
            self.queue.append(Packet(slot, size, size))
        self.buffered_units += count * size

    def transmit(self, slot, budget_units):
        """Drain the FIFO with the slot's capacity; partial packets carry over.

        Returns (packets delivered, units served).
        """
        served = 0
        delivered = 0
        while budget_units > 0 and self.queue:
            head = self.queue[0]
            take = min(budget_units, head.remaining_units)
            head.remaining_units -= take
            budget_units -= take
            served += take
            if head.remaining_units == 0:
                self.queue.popleft()
                delivered += 1
        self.buffered_units -= served
        if delivered and self._open_run:
            self._closed_runs.append((self._last_discard_slot, self._open_run))
            self._open_run = 0
        return delivered, served

    def discard_expired(self, slot):
        """Drop packets older than the delay budget.

        Returns (packets discarded, units discarded).
        """
        budget = self.profile.delay_budget_slots
        dropped = 0
        units = 0
        while self.queue and slot - self.queue[0].arrival_slot > budget:
            pkt = self.queue.popleft()
            dropped += 1
            units += pkt.remaining_units
        if dropped:
            self.discard_log[slot] = dropped
            self.buffered_units -= units
            self._open_run += dropped
            self._last_discard_slot = slot
        return dropped, units

    def update_windows(self, slot, plr_window, burst_window):
        """Advance the sliding loss-rate sums and retire stale loss runs."""
        self._loss_num += self.discard_log[slot]
        drop = slot - plr_window - 1
        if drop >= 0:
            self._loss_num -= self.discard_log[drop]
        budget = self.profile.delay_budget_slots
        if slot - budget >= 0:
            self._loss_den += self.arrival_log[slot - budget]
        if drop >= 0 and drop - budget >= 0:
            self._loss_den -= self.arrival_log[drop - budget]
        while self._closed_runs and self._closed_runs[0][0] < slot - burst_window:
            self._closed_runs.popleft()

    # -- metrics -----------------------------------------------------------

    def packet_loss_rate(self):
        """Windowed discards over budget-shifted windowed arrivals, in [0, 1]."""
        if self._loss_den == 0:
            return 0.0
        return min(self._loss_num / self._loss_den, 1.0)

    def mean_loss_run_length(self):
        """Mean length of loss runs in the burst window.

        A run still open (no delivery since its last discard) counts at its
        current length.
        """
        total = 0
        count = 0
        for _, length in self._closed_runs:
            total += length
            count += 1
        if self._open_run:
            total += self._open_run
            count += 1
        if count == 0:
            return 0.0
        return total / count

    def burst_ratio(self, plr):
        return self.mean_loss_run_length() * (1.0 - plr)

    def queuing_latency_slots(self, slot):
        """Slots the head-of-line arrival cohort has waited; 0 when empty."""
        if not self.queue:
            return 0
        return slot - self.queue[0].arrival_slot

    def hol_age(self, slot):
        return self.queuing_latency_slots(slot)

    @property
    def active(self):
        return bool(self.queue)

    def buffered_bits(self):
        return self.buffered_units / BIT_UNITS


@dataclass
class UeState:
    cqi: int
    flows: list

    @property
    def active(self):
        return any(f.active for f in self.flows)


def sample_traffic_plan(profiles, rng):
    """Per-UE has-traffic flags for one episode (one UE row).

    Of the mutually exclusive kinds at most one carries traffic (chosen
    uniformly among "none of them" and each candidate); every other
    application tosses a fair coin.
    """
    flags = [False] * len(profiles)
    exclusive = [i for i, p in enumerate(profiles) if p.kind in EXCLUSIVE_KINDS]
    if exclusive:
        pick = int(rng.integers(0, len(exclusive) + 1))
        if pick > 0:
            flags[exclusive[pick - 1]] = True
    for i, p in enumerate(profiles):
        if p.kind not in EXCLUSIVE_KINDS:
            flags[i] = bool(rng.random() < 0.5)
    return tuple(flags)


@dataclass(frozen=True)
class EpisodeManifest:
    """Everything needed to replay an episode's exogenous randomness."""
    episode_id: int
    episode_seed: int
    traffic: tuple          # U x K nested tuple of bool
    initial_cqi: tuple      # U ints

    def to_line(self):
        cqi = ",".join(str(c) for c in self.initial_cqi)
        traffic = ";".join("".join("1" if f else "0" for f in row)
                           for row in self.traffic)
        return f"{self.episode_id} seed={self.episode_seed} cqi={cqi} traffic={traffic}"

    @classmethod
    def from_line(cls, line):
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"bad manifest line: {line!r}")
        fields = {}
        for part in parts[1:]:
            key, _, value = part.partition("=")
            fields[key] = value
        return cls(
            episode_id=int(parts[0]),
            episode_seed=int(fields["seed"]),
            traffic=tuple(tuple(ch == "1" for ch in row)
                          for row in fields["traffic"].split(";")),
            initial_cqi=tuple(int(c) for c in fields["cqi"].split(",")),
        )


@dataclass
class SlotMetrics:
    """Per-flow QoS measurements and the slot reward.

    The count/unit arrays beyond the CSV schema exist so tests can rebuild
    the full event history from the metrics stream alone.
    """
    slot: int
    reward: float
    sigma: np.ndarray            # (U, K) activity during the slot
    cqi: np.ndarray              # (U,)
    alloc: np.ndarray            # (U, K)
    rate_mbps: np.ndarray
    queuing_ms: np.ndarray
    transmission_ms: np.ndarray
    total_ms: np.ndarray
    plr: np.ndarray
    burst_ratio: np.ndarray
    qoe: np.ndarray
    beta: np.ndarray
    arrivals: np.ndarray         # packets in
    delivered: np.ndarray        # packets fully transmitted
    discarded: np.ndarray        # packets dropped at the deadline
    served_units: np.ndarray
    discarded_units: np.ndarray
    buffered_units: np.ndarray   # end-of-slot backlog


SLOT_CSV_COLUMNS = ("slot", "u", "k", "sigma", "cqi", "N", "rate_mbps",
                    "queuing_ms", "transmission_ms", "total_ms", "plr",
                    "burst_ratio", "qoe", "beta", "reward")


def write_slot_metrics_csv(path, metrics_seq):
    """Flatten a metrics stream to CSV, one row per (slot, u, k)."""
    with open(path, "w") as fh:
        fh.write(",".join(SLOT_CSV_COLUMNS) + "\n")
        for m in metrics_seq:
            u_dim, k_dim = m.sigma.shape
            for u in range(u_dim):
                for k in range(k_dim):
                    row = (m.slot, u, k, int(m.sigma[u, k]), int(m.cqi[u]),
                           int(m.alloc[u, k]), repr(float(m.rate_mbps[u, k])),
                           repr(float(m.queuing_ms[u, k])),
                           repr(float(m.transmission_ms[u, k])),
                           repr(float(m.total_ms[u, k])),
                           repr(float(m.plr[u, k])),
                           repr(float(m.burst_ratio[u, k])),
                           repr(float(m.qoe[u, k])), int(m.beta[u, k]),
                           repr(float(m.reward)))
                    fh.write(",".join(str(x) for x in row) + "\n")


def evolve_cqi(cqi, slot, config, rng):
    """Random-walk step: only fires when the slot ends a change period.

    Stays with the configured probability, otherwise moves one step up or
    down; at the 0/15 boundary the excess mass collapses onto staying.
    """
    if slot % config.cqi_change_period != 0:
        return cqi
    u = rng.random()
    if u < config.cqi_stay_prob:
        return cqi
    if u < config.cqi_stay_prob + config.cqi_up_prob:
        return min(cqi + 1, MAX_CQI)
    return max(cqi - 1, 0)


def validate_allocation(alloc, num_ues, num_apps, num_prbs):
    """Integer (U, K) matrix, entries >= 0, total <= budget; raises ValueError."""
    alloc = np.asarray(alloc)
    if alloc.shape != (num_ues, num_apps):
        raise ValueError(f"allocation shape {alloc.shape} != ({num_ues}, {num_apps})")
    if not np.issubdtype(alloc.dtype, np.integer):
        rounded = np.rint(alloc)
        if not np.array_equal(alloc, rounded):
            raise ValueError("allocation entries must be integers")
        alloc = rounded.astype(np.int64)
    if (alloc < 0).any():
        raise ValueError("allocation entries must be non-negative")
    total = int(alloc.sum())
    if total > num_prbs:
        raise ValueError(f"allocation uses {total} PRBs, budget is {num_prbs}")
    return alloc.astype(np.int64)


class Env:
    """One episode's simulation state; strictly sequential within an episode."""

    def __init__(self, config: SimConfig, profiles=None):
        self.config = config
        if profiles is None:
            profiles = default_profiles(tti_ms=config.tti_ms)
        profiles = tuple(profiles)
        if len(profiles) != config.num_apps:
            raise ValueError("profile count must match num_apps")
        self.profiles = profiles
        self.ues = None
        self.slot = 0
        self.manifest = None
        self._arrival_rngs = None
        self._cqi_rngs = None

    # -- episode setup ------------------------------------------------------

    def init_episode(self, seed, episode_id=0):
        """Sample traffic plan and initial CQIs, reset buffers, slot = 1."""
        cfg = self.config
        traffic_rng = stream(seed, STREAM_TRAFFIC)
        traffic = tuple(sample_traffic_plan(self.profiles, traffic_rng)
                        for _ in range(cfg.num_ues))
        self._cqi_rngs = [stream(seed, STREAM_CQI, u) for u in range(cfg.num_ues)]
        initial_cqi = tuple(int(r.choice(MAX_CQI + 1, p=CQI_INIT_PROBS))
                            for r in self._cqi_rngs)
        self._arrival_rngs = [[stream(seed, STREAM_ARRIVALS, u, k)
                               for k in range(cfg.num_apps)]
                              for u in range(cfg.num_ues)]
        self.ues = [
            UeState(cqi=initial_cqi[u],
                    flows=[FlowState(self.profiles[k], cfg.episode_slots,
                                     traffic[u][k])
                           for k in range(cfg.num_apps)])
            for u in range(cfg.num_ues)
        ]
        self.slot = 1
        self.manifest = EpisodeManifest(episode_id=episode_id,
                                        episode_seed=int(seed),
                                        traffic=traffic,
                                        initial_cqi=initial_cqi)
        return self.manifest

    def init_from_manifest(self, manifest: EpisodeManifest):
        """Replay an episode; verifies the manifest matches what the seed yields."""
        regenerated = self.init_episode(manifest.episode_seed,
                                        manifest.episode_id)
        if (regenerated.traffic != manifest.traffic
                or regenerated.initial_cqi != manifest.initial_cqi):
            raise ValueError(
                f"manifest {manifest.episode_id} does not match its seed; "
                "was it generated with a different configuration?")
        return regenerated

    # -- views ---------------------------------------------------------------

    def observe(self):
        """(U, K, 4) tensor: buffer fill, head-of-line age, activity, channel.

        All features are normalized to [0, 1]; ages and buffer lengths are
        measured at the start of the slot about to be scheduled.
        """
        cfg = self.config
        obs = np.zeros((cfg.num_ues, cfg.num_apps, 4))
        t = self.slot
        for u, ue in enumerate(self.ues):
            cqi_feat = ue.cqi / MAX_CQI
            for k, flow in enumerate(ue.flows):
                if flow.active:
                    obs[u, k, 0] = min(len(flow.queue), OBS_BUFFER_CAP) / OBS_BUFFER_CAP
                    obs[u, k, 1] = min(flow.hol_age(t) / flow.profile.delay_budget_slots, 1.0)
                    obs[u, k, 2] = 1.0
                obs[u, k, 3] = cqi_feat
        return obs

    def scheduler_context(self):
        cfg = self.config
        u_dim, k_dim = cfg.num_ues, cfg.num_apps
        sigma = np.zeros((u_dim, k_dim), dtype=bool)
        demand = np.zeros((u_dim, k_dim), dtype=np.int64)
        buffered = np.zeros((u_dim, k_dim))
        hol = np.zeros((u_dim, k_dim), dtype=np.int64)
        budget = np.zeros((u_dim, k_dim), dtype=np.int64)
        plr = np.zeros((u_dim, k_dim))
        plr_req = np.zeros((u_dim, k_dim))
        cqi = np.zeros(u_dim, dtype=np.int64)
        prb_bits = np.zeros(u_dim)
        t = self.slot
        for u, ue in enumerate(self.ues):
            cqi[u] = ue.cqi
            prb_bits[u] = prb_capacity_bits(ue.cqi)
            cap_units = CAP_UNITS[ue.cqi]
            for k, flow in enumerate(ue.flows):
                sigma[u, k] = flow.active
                if flow.active and cap_units > 0:
                    demand[u, k] = -(-flow.buffered_units // cap_units)
                buffered[u, k] = flow.buffered_bits()
                hol[u, k] = flow.hol_age(t)
                budget[u, k] = flow.profile.delay_budget_slots
                plr[u, k] = flow.packet_loss_rate()
                plr_req[u, k] = flow.profile.plr_req
        return SchedulerContext(num_prbs=cfg.num_prbs, sigma=sigma,
                                demand_prbs=demand, buffered_bits=buffered,
                                hol_age=hol, delay_budget=budget, plr=plr,
                                plr_req=plr_req, cqi=cqi, prb_bits=prb_bits,
                                observation=self.observe())

    # -- dynamics --------------------------------------------------------------

    def step(self, alloc):
        """Advance one TTI under the given allocation and return its metrics.

        Slot order: arrivals, transmission (FIFO with partial-packet
        carryover), deadline discards, window updates, metrics and reward,
        then the channel walk for the next slot.  An infeasible allocation
        raises before any state changes.
        """
        cfg = self.config
        if self.ues is None:
            raise RuntimeError("init_episode() must be called before step()")
        if self.slot > cfg.episode_slots:
            raise RuntimeError("episode is over")
        alloc = validate_allocation(alloc, cfg.num_ues, cfg.num_apps, cfg.num_prbs)
        t = self.slot
        u_dim, k_dim = cfg.num_ues, cfg.num_apps

        arrivals = np.zeros((u_dim, k_dim), dtype=np.int64)
        delivered = np.zeros((u_dim, k_dim), dtype=np.int64)
        discarded = np.zeros((u_dim, k_dim), dtype=np.int64)
        served_units = np.zeros((u_dim, k_dim), dtype=np.int64)
        discarded_units = np.zeros((u_dim, k_dim), dtype=np.int64)
        sigma = np.zeros((u_dim, k_dim), dtype=np.int64)

        for u, ue in enumerate(self.ues):
            for k, flow in enumerate(ue.flows):
                if flow.has_traffic:
                    n = int(self._arrival_rngs[u][k].poisson(
                        flow.profile.arrivals_per_tti))
                    if n:
                        flow.add_arrivals(t, n)
                    arrivals[u, k] = n
                sigma[u, k] = 1 if flow.active else 0

        for u, ue in enumerate(self.ues):
            cap_units = CAP_UNITS[ue.cqi]
            for k, flow in enumerate(ue.flows):
                if alloc[u, k] and cap_units and flow.active:
                    d, s = flow.transmit(t, int(alloc[u, k]) * cap_units)
                    delivered[u, k] = d
                    served_units[u, k] = s

        for u, ue in enumerate(self.ues):
            for k, flow in enumerate(ue.flows):
                d, units = flow.discard_expired(t)
                discarded[u, k] = d
                discarded_units[u, k] = units
                flow.update_windows(t, cfg.plr_window, cfg.burst_window)

        metrics = self._slot_metrics(t, alloc, sigma, arrivals, delivered,
                                     discarded, served_units, discarded_units)

        for u, ue in enumerate(self.ues):
            ue.cqi = evolve_cqi(ue.cqi, t, cfg, self._cqi_rngs[u])
        self.slot = t + 1
        return metrics

    def _slot_metrics(self, t, alloc, sigma, arrivals, delivered, discarded,
                      served_units, discarded_units):
        cfg = self.config
        u_dim, k_dim = cfg.num_ues, cfg.num_apps
        rate = np.zeros((u_dim, k_dim))
        queuing = np.zeros((u_dim, k_dim))
        transmission = np.zeros((u_dim, k_dim))
        total = np.zeros((u_dim, k_dim))
        plr = np.zeros((u_dim, k_dim))
        burst = np.zeros((u_dim, k_dim))
        qvals = np.zeros((u_dim, k_dim))
        beta = np.zeros((u_dim, k_dim), dtype=np.int64)
        buffered = np.zeros((u_dim, k_dim), dtype=np.int64)
        cqi = np.array([ue.cqi for ue in self.ues], dtype=np.int64)

        fairness = []
        for u, ue in enumerate(self.ues):
            prb_bits = prb_capacity_bits(ue.cqi)
            entries = []
            for k, flow in enumerate(ue.flows):
                prof = flow.profile
                bits_per_slot = alloc[u, k] * prb_bits
                rate[u, k] = bits_per_slot / 1000.0
                queuing[u, k] = flow.queuing_latency_slots(t) * cfg.tti_ms
                if bits_per_slot > 0:
                    transmission[u, k] = prof.packet_bits / bits_per_slot * cfg.tti_ms
                total[u, k] = cfg.server_latency_ms + queuing[u, k] + transmission[u, k]
                plr[u, k] = flow.packet_loss_rate()
                burst[u, k] = flow.burst_ratio(plr[u, k])
                buffered[u, k] = flow.buffered_units
                if sigma[u, k]:
                    inputs = qoe.QoeInputs(rate_mbps=rate[u, k],
                                           total_latency_ms=total[u, k],
                                           plr=plr[u, k],
                                           burst_ratio=burst[u, k])
                    qvals[u, k] = qoe.estimate_qoe(prof.kind, inputs)
                    beta[u, k] = qoe.qos_satisfied(inputs, prof.rate_req_mbps,
                                                   prof.latency_req_ms,
                                                   prof.plr_req)
                    entries.append((beta[u, k], prof.priority, qvals[u, k]))
            if entries:
                fairness.append(qoe.intra_ue_fairness(entries))
        reward = qoe.inter_ue_fairness(fairness)

        return SlotMetrics(slot=t, reward=reward, sigma=sigma, cqi=cqi,
                           alloc=alloc, rate_mbps=rate, queuing_ms=queuing,
                           transmission_ms=transmission, total_ms=total,
                           plr=plr, burst_ratio=burst, qoe=qvals, beta=beta,
                           arrivals=arrivals, delivered=delivered,
                           discarded=discarded, served_units=served_units,
                           discarded_units=discarded_units,
                           buffered_units=buffered)
