"""schedlab: single-cell downlink packet-scheduling laboratory.

A discrete-time environment with per-application QoE models and a fairness
reward, five classic baseline schedulers, a from-scratch DDPG scheduler with
a knowledge-embedding action post-processor, and a CLI harness for seeded
training, evaluation, and comparison.
"""

__version__ = "0.1.0"
