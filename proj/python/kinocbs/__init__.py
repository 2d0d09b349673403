"""Multi-robot kinodynamic motion planning: conflict-based search over
discontinuity-bounded single-robot plans, repaired by joint trajectory
optimization."""

from ._kinocbs import (
    ContractError,
    ParseError,
    PrimitiveSet,
    ProblemInstance,
    ValidationError,
    action_dim,
    distance,
    generate_primitives,
    jacobians,
    load_primitives,
    parse_instance,
    parse_instance_string,
    read_solution,
    render_svg,
    robot_types,
    save_primitives,
    solve,
    state_dim,
    step,
    validate_solution,
    write_solution,
)

__all__ = [
    "ContractError",
    "ParseError",
    "PrimitiveSet",
    "ProblemInstance",
    "ValidationError",
    "action_dim",
    "distance",
    "generate_primitives",
    "jacobians",
    "load_primitives",
    "parse_instance",
    "parse_instance_string",
    "read_solution",
    "render_svg",
    "robot_types",
    "save_primitives",
    "solve",
    "state_dim",
    "step",
    "validate_solution",
    "write_solution",
]

__version__ = "0.1.0"
