"""Parametric QoE models for the five applications, plus the fairness reward.

Each model maps measured QoS (rate / latency / loss) onto the 1-5 MOS scale.
Outputs are clamped to [1, 5] (voice to [1, 4.5]); the raw fits can stray
outside the scale at extreme inputs.
"""

import math
from dataclasses import dataclass

MOS_MIN = 1.0
MOS_MAX = 5.0
VOIP_MOS_MAX = 4.5

UHD_MAX_RATE_MBPS = 15.0   # bandwidth at which UHD streaming quality saturates
WEB_PAGE_SIZE_MBIT = 24.0  # reference page of 3 MB

APP_KINDS = ("ftp", "uhd", "web", "gaming", "voip")


@dataclass(frozen=True)
class QoeInputs:
    """Per-flow QoS measurements for one slot."""
    rate_mbps: float
    total_latency_ms: float
    plr: float
    burst_ratio: float


def _clamp(x, lo=MOS_MIN, hi=MOS_MAX):
    return lo if x < lo else hi if x > hi else x


def qoe_ftp(rate_mbps):
    """File-transfer MOS: logarithmic in throughput between 8 and 315 kbps."""
    kbps = rate_mbps * 1000.0
    if kbps < 8.0:
        return 1.0
    if kbps >= 315.0:
        return 5.0
    return _clamp(2.5037 * math.log10(0.3136 * kbps))


def qoe_uhd(rate_mbps):
    """UHD streaming MOS; floor value 1 for a starved stream."""
    if rate_mbps <= 0.0:
        return MOS_MIN
    return _clamp(-0.891 + 5.082 / math.sqrt(UHD_MAX_RATE_MBPS / rate_mbps))


def qoe_web(rate_mbps):
    """Web-browsing MOS from throughput relative to the reference page size."""
    term = 11.77 + 22.61 * rate_mbps / WEB_PAGE_SIZE_MBIT
    return _clamp(5.0 - 578.0 / (1.0 + term * term))


def qoe_gaming(latency_ms, plr):
    """Online-gaming MOS, linear in end-to-end latency and loss rate."""
    return _clamp(4.7059 - 0.00094 * latency_ms - 5.83444 * plr)


def voip_r_factor(plr, burst_ratio):
    """Voice transmission rating factor.

    Loss-free flows (and the burst_ratio -> 0 limit) collapse to the no-loss
    rating 93.355.
    """
    if plr <= 0.0 or burst_ratio <= 0.0:
        return 93.355
    return 93.355 - 95.0 * plr / (plr / burst_ratio + 4.3)


def qoe_voip(rf):
    """Rating factor to MOS; saturates at 4.5."""
    if rf < 0.0:
        return 1.0
    if rf > 100.0:
        return 4.5
    mos = 1.0 + 0.035 * rf + rf * (rf - 60.0) * (100.0 - rf) * 7e-6
    return _clamp(mos, MOS_MIN, VOIP_MOS_MAX)


def estimate_qoe(kind, inputs: QoeInputs):
    """Dispatch to the application's model with the QoS inputs it consumes."""
    if kind == "ftp":
        return qoe_ftp(inputs.rate_mbps)
    if kind == "uhd":
        return qoe_uhd(inputs.rate_mbps)
    if kind == "web":
        return qoe_web(inputs.rate_mbps)
    if kind == "gaming":
        return qoe_gaming(inputs.total_latency_ms, inputs.plr)
    if kind == "voip":
        return qoe_voip(voip_r_factor(inputs.plr, inputs.burst_ratio))
    raise ValueError(f"unknown application kind: {kind!r}")


def qos_satisfied(inputs: QoeInputs, rate_req_mbps, latency_req_ms, plr_req):
    """1 iff all three requirements hold (boundaries inclusive)."""
    ok = (inputs.rate_mbps >= rate_req_mbps
          and inputs.total_latency_ms <= latency_req_ms
          and inputs.plr <= plr_req)
    return 1 if ok else 0


def intra_ue_fairness(entries):
    """Priority-weighted mean of satisfaction-gated QoE over active apps.

    ``entries`` holds (satisfied, priority, qoe) per active application.
    Returns 0.0 for an empty active set (caller convention).
    """
    num = 0.0
    den = 0.0
    for satisfied, priority, value in entries:
        num += satisfied * priority * value
        den += priority
    if den == 0.0:
        return 0.0
    return num / den


def inter_ue_fairness(values):
    """Mean of intra-UE fairness over active UEs; 0.0 when none are active."""
    values = list(values)
    if not values:
        return 0.0
    return sum(values) / len(values)
