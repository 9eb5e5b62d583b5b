"""Closed-form firing relations for square-pulse driving.

A neuron held under constant drive ``2 * a_max`` charges from ``v_reset``
to ``v_th`` in

    charging_time = tau * ln((2*a_max - v_reset) / (2*a_max - v_th))

so the driven neuron fires every ``t_refract + charging_time`` ms. A
neighbour receiving those spikes through a sub-threshold excitatory synapse
fires only when enough arrivals pile up before the leak removes them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

from spikecomm.errors import ParameterError
from spikecomm.network import NeuronParams, SynapseConfig


def charging_time(params: NeuronParams, a_max: float) -> float:
    """Time (ms) for a reset neuron to reach threshold under plateau drive ``2*a_max``."""
    drive = 2.0 * a_max * params.r_membrane
    if drive <= params.v_th:
        raise ParameterError(
            f"drive too weak to fire: 2*a_max={drive} V does not exceed v_th={params.v_th} V"
        )
    return params.tau * math.log((drive - params.v_reset) / (drive - params.v_th))


def active_isi(params: NeuronParams, a_max: float) -> float:
    return params.t_refract + charging_time(params, a_max)


def amax_for_target_isi(params: NeuronParams, target_isi: float) -> float:
    """Pulse half-amplitude whose plateau gives inter-spike interval ``target_isi``."""
    delta = target_isi - params.t_refract
    if delta <= 0:
        raise ParameterError(
            f"target ISI {target_isi} ms is infeasible: must exceed t_refract={params.t_refract} ms"
        )
    # (D - v_reset) / (D - v_th) = e  =>  D = (e*v_th - v_reset) / (e - 1)
    e = math.exp(delta / params.tau)
    drive = (e * params.v_th - params.v_reset) / (e - 1.0)
    return drive / (2.0 * params.r_membrane)


def response_feasible(params: NeuronParams, syn: SynapseConfig, isi: float) -> bool:
    """Whether two excitatory spikes ``isi`` ms apart push a resting neuron over threshold.

    Evaluates ``w * (exp(-isi/tau) + 1) > v_th`` directly, with the first
    arrival landing on a neuron at ``v_rest``.
    """
    if isi <= 0:
        raise ParameterError("isi must be > 0")
    w = syn.w_excitatory
    if params.v_rest + w >= params.v_th:
        return True
    return params.v_rest + w * (math.exp(-isi / params.tau) + 1.0) > params.v_th


def active_spike_count(params: NeuronParams, a_max: float, pulse_width: float) -> int:
    """Spikes fired during one pulse, assuming the first lands at pulse onset."""
    return int(math.floor(pulse_width / active_isi(params, a_max))) + 1


def response_spike_times(params: NeuronParams, syn: SynapseConfig, arrivals) -> list[float]:
    """Event-driven response of an undriven neighbour to a list of input spike times.

    Between arrivals the potential relaxes toward ``v_rest``; arrivals during
    the refractory window are discarded. Used as the analytic stand-in for a
    clock-driven run of the two-neuron experiment.
    """
    v = params.v_rest
    last = None
    refractory_until = -math.inf
    fired: list[float] = []
    w = syn.w_excitatory
    for t in arrivals:
        if t < refractory_until:
            continue
        if last is not None:
            v = params.v_rest + (v - params.v_rest) * math.exp(-(t - last) / params.tau)
        v += w
        last = t
        if v >= params.v_th:
            fired.append(t)
            v = params.v_reset
            refractory_until = t + params.t_refract
    return fired


def bipolar_thresholds(
    r1: int,
    r2: int,
    community_order: int,
    avg_degree: float,
    neighbor_fraction: float = 0.5,
) -> tuple[float, float]:
    """Spike-count bounds ``(f_min, f_max)`` for a neuron inside a driven community.

    ``f_max`` assumes a clique where every other member's drive triggers a
    response. ``f_min`` is a heuristic: only ``neighbor_fraction`` of an
    average vertex's neighbours (plus one) are required to lie in the same
    community. A ``RuntimeWarning`` flags ``f_min > f_max``, which happens for
    communities too small relative to ``avg_degree``.
    """
    if min(r1, r2, community_order, avg_degree) < 0:
        raise ParameterError("threshold inputs must be >= 0")
    f_max = r1 + (community_order - 1) * r2
    f_min = r1 + (avg_degree * neighbor_fraction + 1) * r2
    if f_min > f_max:
        warnings.warn(f"bounds crossed: f_min={f_min} > f_max={f_max}", RuntimeWarning, stacklevel=2)
    return f_min, f_max


@dataclass(frozen=True)
class CalibrationReport:
    charging_time: float
    active_isi: float
    response_isi: float | None
    alpha: float
    response_feasible: bool
    f_max: float
    f_min: float
    r1: int
    r2: int

    def as_dict(self) -> dict:
        return asdict(self)

    def to_lines(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())


def calibrate(
    params: NeuronParams | None = None,
    syn: SynapseConfig | None = None,
    a_max: float | None = None,
    pulse_width: float = 200.0,
    community_order: int = 32,
    avg_degree: float = 16.0,
    neighbor_fraction: float = 0.5,
) -> CalibrationReport:
    """Evaluate every closed-form relation for one parameter set.

    ``a_max`` defaults to the amplitude giving a 21 ms active ISI. ``r2`` is
    obtained by feeding the driven neuron's ``r1`` evenly spaced spikes through
    :func:`response_spike_times`.
    """
    params = params or NeuronParams()
    syn = syn or SynapseConfig()
    if a_max is None:
        a_max = amax_for_target_isi(params, 21.0)
    delta = charging_time(params, a_max)
    isi1 = params.t_refract + delta
    r1 = active_spike_count(params, a_max, pulse_width)
    responses = response_spike_times(params, syn, [k * isi1 for k in range(r1)])
    r2 = len(responses)
    isi2 = (responses[-1] - responses[0]) / (r2 - 1) if r2 > 1 else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        f_min, f_max = bipolar_thresholds(r1, r2, community_order, avg_degree, neighbor_fraction)
    return CalibrationReport(
        charging_time=delta,
        active_isi=isi1,
        response_isi=isi2,
        alpha=abs(syn.w_excitatory) / params.v_th,
        response_feasible=response_feasible(params, syn, isi1),
        f_max=f_max,
        f_min=f_min,
        r1=r1,
        r2=r2,
    )
