"""Edge-Laplacian tools for robust consensus on directed graphs."""
from .algebra import (ConsistencyError, EdgeAlgebra, EdgeBlocks, TreePartition, ZeroEigenStructure,
                      build_edge_algebra, edge_adjacency, edge_laplacian_blocks, format_matrix,
                      matrix_rank, nonzero_spectrum, penrose_residuals, spectra_match,
                      tree_partition, zero_eigen_structure)
from .controller import (ConfigError, ControllerConfig, EdgeLaw, Synthesis, edge_control_strong,
                         edge_control_tree, edge_lyapunov, lift_matrix, lift_node_control,
                         lift_residual, quasi_gain_bound, rho_from_gain, strong_law, synthesize,
                         tree_law, worst_case_edge_derivative)
from .graph import (Digraph, GraphError, IncidenceSet, TreeSelection, find_directed_spanning_tree,
                    format_graph, incidence_decomposition, is_quasi_strongly_connected,
                    is_strongly_connected, load_graph, outgoing_edge_neighbors, parse_digraph,
                    read_graph_text, sibling_groups, validate_tree)
from .interconnection import (CycleLimitExceeded, EdgeInterconnectionGraph, GainAssignment,
                              GainError, SmallGainResult, build_edge_interconnection,
                              check_cyclic_small_gain, condensation_edges, cycle_gain,
                              enumerate_simple_cycles, interconnection_strongly_connected,
                              strongly_connected_components)
from .scenario import (OutputSpec, ScenarioError, ScenarioFile, dump_scenario, load_scenario,
                       load_scenario_file, parse_scenario, scale_noise, with_overrides)
from .simulator import (ClosedLoop, ConsensusMetrics, DynamicsSpec, InitialSpec, IntegratorSpec,
                        NoiseSpec, Scenario, SimResult, chua_vector_field, consensus_metrics,
                        initial_states, integrate, prepare, sample_disturbance)
from .verify import VerifyReport, verify_graph

__version__ = "0.1.0"
