"""Import all submodules of walkstream."""
from walkstream.__about__ import __version__

from walkstream.errors import (
    BudgetExceeded,
    CapExceeded,
    DeadEnd,
    DeadEndVertex,
    DuplicateEdge,
    InvalidTurnstile,
    OrderingMismatch,
    ParseError,
    PassBudgetExceeded,
    SketchFailure,
    WalkFailure,
    WalkStreamError
)
from walkstream.graph_stream import (
    DirectedGraph,
    EdgeStream,
    from_graph,
    load_stream,
    read_edge_list,
    read_edge_stream,
    read_turnstile,
    to_turnstile,
    write_edge_list,
    write_turnstile
)
from walkstream.reservoir import (
    ReservoirWithReplacement,
    ReservoirWithoutReplacement,
    finish,
    observe
)
from walkstream.walk_oracle import (
    TVEstimate,
    WalkDistribution,
    classify_exact,
    count_walks,
    empirical_distribution,
    exact_walk_distribution,
    heavy_out_degree_bound,
    marginalize_last_step,
    random_walks,
    revisit_probabilities,
    transition_matrix,
    tv_distance,
    visit_count_distribution,
    visit_prob,
    visit_prob_matrix
)
from walkstream.one_pass_sampler import (
    Failure,
    NeighborTable,
    SamplerConfig,
    folklore_preprocess,
    folklore_sample,
    preprocess,
    sample_all_walks,
    sample_walk
)
from walkstream.two_pass_sampler import (
    HeavyLightEstimate,
    PipelineResult,
    SpaceReport,
    TwoPassConfig,
    classification_sound,
    first_pass,
    run_pipeline,
    sample,
    second_pass
)
from walkstream.turnstile import (
    HeavyHitterSketch,
    L1SamplerSketch,
    SketchConfig,
    run_turnstile_pipeline,
    sketch_update,
    turnstile_preprocess
)
from walkstream.instance_gen import (
    GadgetParams,
    HardInstanceParams,
    check_hard_instance,
    gadget_walk_length,
    gen_complete,
    gen_cycle,
    gen_gadget_union,
    gen_hard_instance,
    gen_index_gadget,
    gen_random_graph,
    gen_star,
    recover_string,
    recovery_rate,
    write_instance
)
from walkstream.experiment import (
    register_generator,
    get_generator,
    get_available_generators,
    register_sampler,
    get_sampler,
    get_available_samplers,
    resolve_source,
    run_trials
)
from walkstream.benchmark_space import benchmark_space
from walkstream.compute_oracle import compute_oracle
from walkstream.generate_instance import generate_instance
from walkstream.simulate_walk import simulate_walk
from walkstream.verify_sampler import verify_sampler
