"""Holds constant values."""
Edge = tuple[int, int]
Walk = tuple[int, ...]

DEFAULT_C1 = 48
DEFAULT_C2 = 8
DEFAULT_VISIT_CAP = 10_000
DEFAULT_WALK_BUDGET = 10_000_000
HEAVY_THRESHOLD = 1 / 3
LIGHT_THRESHOLD = 2 / 3
ESTIMATED_HEAVY_FRACTION = 0.5
MONTE_CARLO_CHUNK_SIZE = 10_000

EXIT_INVALID_ARGUMENTS = 2
EXIT_INPUT_FORMAT = 3
EXIT_SAMPLER_FAILURE = 4
EXIT_DEAD_END = 5
EXIT_SKETCH_FAILURE = 6
EXIT_ORACLE_LIMIT = 7

BENCH_COLUMNS = [
    'algorithm',
    'n',
    'L',
    'delta',
    'gamma',
    'ell',
    'peak_words',
    'pass_count',
    'empirical_tv',
    'failure_rate',
    'wall_time'
]
