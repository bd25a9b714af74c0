"""Entry point to the walkstream package."""
import sys

from tap import Tap, to_tap_class

from walkstream.benchmark_space import benchmark_space
from walkstream.compute_oracle import compute_oracle
from walkstream.constants import (
    EXIT_DEAD_END,
    EXIT_INPUT_FORMAT,
    EXIT_INVALID_ARGUMENTS,
    EXIT_ORACLE_LIMIT,
    EXIT_SAMPLER_FAILURE,
    EXIT_SKETCH_FAILURE
)
from walkstream.errors import (
    BudgetExceeded,
    CapExceeded,
    DeadEnd,
    DuplicateEdge,
    InvalidTurnstile,
    OrderingMismatch,
    ParseError,
    SketchFailure,
    WalkFailure
)
from walkstream.generate_instance import generate_instance
from walkstream.simulate_walk import simulate_walk
from walkstream.verify_sampler import verify_sampler

NAME_TO_FUNCTION = {
    'gen': generate_instance,
    'sample': simulate_walk,
    'verify': verify_sampler,
    'bench': benchmark_space,
    'oracle': compute_oracle
}

# Checked in order, so subclasses of ValueError come before ValueError
EXIT_CODES = [
    ((WalkFailure,), EXIT_SAMPLER_FAILURE),
    ((DeadEnd,), EXIT_DEAD_END),
    ((SketchFailure,), EXIT_SKETCH_FAILURE),
    ((BudgetExceeded, CapExceeded), EXIT_ORACLE_LIMIT),
    ((ParseError, DuplicateEdge, OrderingMismatch, InvalidTurnstile), EXIT_INPUT_FORMAT),
    ((ValueError,), EXIT_INVALID_ARGUMENTS)
]


def exit_code(error: Exception) -> int | None:
    """Maps an error to its documented exit code (None if it has none)."""
    for error_types, code in EXIT_CODES:
        if isinstance(error, error_types):
            return code

    return None


class WalkStreamTap(Tap):
    walkstream_command: str = ''

    def configure(self):
        self.add_subparsers(help='walkstream commands', dest='walkstream_command', required=True)

        for name, function in NAME_TO_FUNCTION.items():
            tap_class = to_tap_class(function)
            self.add_subparser(name, tap_class, help=function.__doc__.splitlines()[0])


def main(argv: list[str] | None = None) -> None:
    """Entry point to the walkstream package."""
    args = WalkStreamTap().parse_args(argv)

    function = NAME_TO_FUNCTION[args.walkstream_command]

    args_dict = args.as_dict()
    del args_dict['walkstream_command']

    try:
        function(**args_dict)
    except Exception as error:
        code = exit_code(error)

        if code is None:
            raise

        print(f'Error: {error}', file=sys.stderr)
        sys.exit(code)
