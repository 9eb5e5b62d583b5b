import math

import numpy as np
import pytest

from spikecomm import LabeledGraph, NumericFault, ParameterError
from spikecomm.calibration import charging_time
from spikecomm.decode import epoch_windows, window_spike_counts
from spikecomm.network import NeuronParams, map_graph_to_network
from spikecomm.simulator import SimulationConfig, SpikeData, record_membrane, run_simulation, traces_to_csv
from spikecomm.stimulus import A_MAX, DriveSchedule, SquarePulse, community_ordered_schedule

ISOLATED = LabeledGraph(1, frozenset(), (0,))
PAIR = LabeledGraph(2, frozenset({(0, 1)}), (0, 0))


def single_pulse(target=0, a_max=A_MAX, t1=1000.0, width=200.0, beta=1.0):
    return DriveSchedule((SquarePulse(target, t1, t1 + width, a_max, beta),), t1 + width + 1800.0, 800.0)


def test_isolated_neuron_fires_ten_times():
    spikes = run_simulation(map_graph_to_network(ISOLATED), single_pulse())
    train = spikes.trains[0]
    assert train.size == 10
    assert np.all(np.abs(np.diff(train) - 21.0) <= 0.5)


def test_neighbour_fires_five_times():
    spikes = run_simulation(map_graph_to_network(PAIR), single_pulse())
    assert spikes.trains[0].size == 10
    train = spikes.trains[1]
    assert train.size == 5
    assert np.all(np.abs(np.diff(train) - 42.0) <= 1.0)


def test_no_drive_no_spikes():
    g = LabeledGraph(5, frozenset({(0, 1), (2, 3)}), (0, 0, 1, 1, 1))
    spikes = run_simulation(map_graph_to_network(g), DriveSchedule((), 500.0, 800.0))
    assert spikes.total_spikes == 0


def test_undriven_decay_matches_closed_form():
    net = map_graph_to_network(ISOLATED)
    cfg = SimulationConfig(dt=0.1, duration=200.0, v_init=0.5)
    (tr,) = record_membrane(net, DriveSchedule((), 200.0, 800.0), cfg, [0])
    expected = 0.5 * np.exp(-tr.times / 25.0)
    assert np.all(np.abs(tr.potentials - expected) <= 1e-3 * expected)
    assert np.all(np.diff(tr.times) > 0)
    assert np.allclose(np.diff(tr.times), 0.1)


def test_constant_drive_update_is_exact():
    # beta large enough that the drive is exactly flat from the first step
    params = NeuronParams(v_th=100.0)
    net = map_graph_to_network(ISOLATED, params)
    sched = DriveSchedule((SquarePulse(0, 50.0, 150.0, a_max=0.25, beta=1000.0),), 300.0, 0.0)
    (tr,) = record_membrane(net, sched, SimulationConfig(dt=0.1), [0])
    on = (tr.times >= 50.1) & (tr.times <= 150.0)
    elapsed = tr.times[on] - 50.1
    exact = 0.5 + (tr.potentials[tr.times == 50.1][0] - 0.5) * np.exp(-elapsed / 25.0)
    assert np.allclose(tr.potentials[on], exact, rtol=0, atol=1e-12)


def test_refractory_window_holds_reset():
    net = map_graph_to_network(ISOLATED)
    spikes = run_simulation(net, single_pulse())
    (tr,) = record_membrane(net, single_pulse(), SimulationConfig(), [0])
    t0 = spikes.trains[0][0]
    window = (tr.times >= t0) & (tr.times < t0 + 20.0)
    assert window.sum() == 200
    assert np.all(tr.potentials[window] == 0.0)
    assert tr.potentials[np.searchsorted(tr.times, t0 + 20.0) + 1] > 0.0


def test_charging_time_matches_closed_form():
    net = map_graph_to_network(ISOLATED)
    dt = 0.1
    train = run_simulation(net, single_pulse(), SimulationConfig(dt=dt)).trains[0]
    measured = np.diff(train)[2:-2] - 20.0
    assert np.all(np.abs(measured - charging_time(NeuronParams(), A_MAX)) <= 2 * dt)


def test_refractory_separation(ordered_run, random_run):
    for _, spikes in (ordered_run, random_run):
        for train in spikes.trains:
            if train.size > 1:
                assert np.diff(train).min() >= 20.0 - 1e-9


def test_determinism(gn_graph, ordered_run):
    schedule, spikes = ordered_run
    again = run_simulation(map_graph_to_network(gn_graph), schedule, SimulationConfig(dt=0.1))
    assert again == spikes
    assert again.to_csv() == spikes.to_csv()


def test_step_size_robustness():
    net = map_graph_to_network(PAIR)
    coarse = run_simulation(net, single_pulse(), SimulationConfig(dt=0.1))
    fine = run_simulation(net, single_pulse(), SimulationConfig(dt=0.05))
    for a, b in zip(coarse.trains, fine.trains):
        assert a.size == b.size
        assert np.all(np.abs(a - b) < 2 * 0.1)


def test_undriven_community_stays_quiet(gn_graph, ordered_run):
    schedule, spikes = ordered_run
    counts = window_spike_counts(spikes, epoch_windows(schedule, gn_graph.labels))
    undriven = np.asarray(gn_graph.labels) == 2
    assert counts[undriven].max() < 55


def test_mismatched_size():
    with pytest.raises(ParameterError):
        run_simulation(map_graph_to_network(PAIR), single_pulse(target=2))


def test_non_finite_potential_aborts():
    sched = single_pulse(a_max=math.inf)
    with pytest.raises(NumericFault, match="non-finite"):
        run_simulation(map_graph_to_network(ISOLATED), sched)


def test_config_validation():
    with pytest.raises(ParameterError):
        SimulationConfig(dt=0.0)
    with pytest.raises(ParameterError):
        run_simulation(map_graph_to_network(ISOLATED), single_pulse(), SimulationConfig(dt=15.0))
    with pytest.warns(RuntimeWarning, match="coarse"):
        run_simulation(map_graph_to_network(ISOLATED), single_pulse(), SimulationConfig(dt=1.0))


def test_potential_floor():
    net = map_graph_to_network(PAIR.__class__(2, frozenset(), (0, 0)))
    free = record_membrane(net, single_pulse(), SimulationConfig(), [1])[0]
    floored = record_membrane(net, single_pulse(), SimulationConfig(potential_floor=-0.5), [1])[0]
    assert free.potentials.min() < -1.0
    assert floored.potentials.min() == -0.5


def test_spike_csv_roundtrip(ordered_run):
    _, spikes = ordered_run
    text = spikes.to_csv()
    lines = text.splitlines()
    assert lines[0] == "neuron,time_ms"
    rows = [(float(t), int(i)) for i, t in (ln.split(",") for ln in lines[1:])]
    assert rows == sorted(rows)
    assert SpikeData.from_csv(text, spikes.n, spikes.duration) == spikes


def test_membrane_csv_header():
    net = map_graph_to_network(ISOLATED)
    traces = record_membrane(net, DriveSchedule((), 1.0, 0.0), SimulationConfig(duration=1.0), [0])
    text = traces_to_csv(traces)
    assert text.splitlines()[0] == "neuron,time_ms,potential_v"
    assert len(text.splitlines()) == 12


def test_spike_data_invariants():
    with pytest.raises(ParameterError):
        SpikeData(1, ([5.0, 5.0],), 10.0)
    with pytest.raises(ParameterError):
        SpikeData(1, ([11.0],), 10.0)


def test_schedule_default_duration():
    s = community_ordered_schedule(ISOLATED, [0])
    spikes = run_simulation(map_graph_to_network(ISOLATED), s)
    assert spikes.duration == s.total_duration
