"""Neuron parameters and the graph-to-network mapping.

Every vertex becomes a leaky integrate-and-fire neuron. Every pair of
neurons is connected symmetrically: excitatory where the graph has an
edge, inhibitory where it does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spikecomm.errors import ParameterError
from spikecomm.graph import LabeledGraph


@dataclass(frozen=True)
class NeuronParams:
    """Homogeneous LIF parameters. Times in ms, potentials in V."""

    tau: float = 25.0
    v_th: float = 0.8
    v_reset: float = 0.0
    v_rest: float = 0.0
    t_refract: float = 20.0
    r_membrane: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ParameterError(f"tau must be > 0, got {self.tau}")
        if self.t_refract < 0:
            raise ParameterError(f"t_refract must be >= 0, got {self.t_refract}")
        if not self.v_reset < self.v_th:
            raise ParameterError("v_reset must be below v_th")
        if self.v_rest > self.v_th:
            raise ParameterError("v_rest must not exceed v_th")


@dataclass(frozen=True)
class SynapseConfig:
    w_excitatory: float = 0.75
    w_inhibitory: float = -0.75

    def __post_init__(self):
        if not self.w_excitatory > 0 > self.w_inhibitory:
            raise ParameterError("need w_excitatory > 0 > w_inhibitory")

    @classmethod
    def symmetric(cls, w: float) -> "SynapseConfig":
        """Equal-magnitude excitatory/inhibitory pair."""
        return cls(abs(w), -abs(w))


@dataclass(frozen=True, eq=False)
class SpikingNetwork:
    """``weights[j, i]`` is the potential jump delivered to ``i`` when ``j`` fires."""

    n: int
    params: NeuronParams
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ParameterError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.array_equal(w, w.T):
            raise ParameterError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ParameterError("weights must have a zero diagonal")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def map_graph_to_network(
    g: LabeledGraph,
    params: NeuronParams | None = None,
    syn: SynapseConfig | None = None,
) -> SpikingNetwork:
    params = params or NeuronParams()
    syn = syn or SynapseConfig()
    adj = g.adjacency()
    w = np.where(adj, syn.w_excitatory, syn.w_inhibitory)
    np.fill_diagonal(w, 0.0)
    return SpikingNetwork(g.n, params, w)


def network_summary(net: SpikingNetwork) -> tuple[int, int, int]:
    """``(n, positive synapse count, negative synapse count)``; each direction counts once."""
    w = net.weights
    return net.n, int((w > 0).sum()), int((w < 0).sum())


def recover_edges(net: SpikingNetwork) -> frozenset:
    """Edge set encoded by the positive entries of the weight matrix."""
    iu, ju = np.nonzero(np.triu(net.weights > 0, k=1))
    return frozenset(zip(iu.tolist(), ju.tolist()))
