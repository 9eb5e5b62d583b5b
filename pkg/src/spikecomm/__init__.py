"""Community detection with networks of leaky integrate-and-fire neurons.

A graph is mapped to a fully connected spiking network (edges excitatory,
non-edges inhibitory), neurons are driven one at a time by square current
pulses, and the resulting spike trains are decoded into Hamming similarity
matrices, bipolar firing states and community labels.
"""

from spikecomm.errors import NumericFault, ParameterError, ParseError
from spikecomm.graph import (
    LabeledGraph,
    PartitionSpec,
    degree_stats,
    generate_planted_partition,
    load_edge_list,
    save_edge_list,
)
from spikecomm.network import (
    NeuronParams,
    SpikingNetwork,
    SynapseConfig,
    map_graph_to_network,
    network_summary,
)
from spikecomm.stimulus import (
    DriveSchedule,
    SquarePulse,
    community_ordered_schedule,
    pulse_value,
    random_permutation_schedule,
)
from spikecomm.simulator import (
    MembraneTrace,
    SimulationConfig,
    SpikeData,
    record_membrane,
    run_simulation,
)
from spikecomm.calibration import (
    CalibrationReport,
    amax_for_target_isi,
    bipolar_thresholds,
    calibrate,
    charging_time,
    response_feasible,
)
from spikecomm.decode import (
    BinaryCodeMatrix,
    BipolarStateTable,
    ComparisonMatrix,
    SeparabilitySweep,
    binarize,
    bipolar_decode,
    comparison_matrix,
    hamming_plain,
    hamming_weighted,
    mean_similarity,
    reconstruct_from_seeds,
    separability_sweep,
    window_spike_counts,
)

__version__ = "0.1.0"
