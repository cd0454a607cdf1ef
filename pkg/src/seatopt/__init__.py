"""Seating-chart optimisation as a cost function network, solved by exact
enumeration, annealed Monte Carlo or QUBO sampling."""
from .bench import BenchmarkReport, ReportRow, SolverSpec, emit_tsv, parse_tsv, run_benchmark
from .cfn import (
    Assignment,
    CfnProblem,
    SolutionRecord,
    count_overlaps,
    delta_evaluate,
    evaluate,
)
from .chart import render_chart
from .classical import (
    AnnealSchedule,
    HfConfig,
    McConfig,
    brute_force_solve,
    hf_solve,
    mc_solve,
    run_replicates,
)
from .compiler import NodeChoiceMap, compile_cfn
from .geometry import (
    PairAdjacent,
    PairProximity,
    PairSameTable,
    Round,
    Row,
    SeatingProblem,
    Table,
)
from .problem_io import builtin_problem, load_problem, parse_problem, serialize_problem
from .qubo import (
    QuboProblem,
    decode_bits,
    encode_approx_binary,
    encode_assignment,
    encode_domain_wall,
    encode_one_hot,
    qubit_count,
    qubo_energy,
    sample_qubo,
    solve_via_qubo,
)

__version__ = "0.1.0"
