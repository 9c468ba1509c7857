"""Expected value of perfect information for discrete influence diagrams.

Numeric EVPI comes from an exact solver; qualitative EVPI orderings come
from d-separation on the diagram alone.
"""

__version__ = "0.1.0"

from .errors import (
    BracketError,
    CurveRangeError,
    CyclicGraph,
    IncompleteAssignment,
    InfoValueError,
    InvalidCost,
    InvalidGraph,
    InvalidModel,
    InvalidQuery,
    ModelParseError,
    ModelTooLarge,
    NodeNotFound,
    NonCanonicalQuery,
    UnsupportedReformulation,
    WouldCreateCycle,
)
from .fileformat import dumps, load, loads, model_from_dict, model_to_dict, save
from .graph_core import Dag, NodeKind, d_separated, topological_order
from .model import (
    CeTable,
    Cpt,
    InfluenceDiagram,
    MappingVariableRecord,
    Violation,
    canonicalize,
    is_canonical,
    validate,
)
from .ordering import (
    NevpiRefinement,
    OrderingEdge,
    OrderingGraph,
    Relation,
    build_ordering,
    dominates,
    nevpi_refine,
    set_dominance,
    zero_evpi_nodes,
)
from .solver import (
    DecisionRule,
    EvpiMethod,
    EvpiReport,
    Policy,
    all_policies,
    certain_equivalent,
    evpi,
    expected_utility,
    joint_probability,
    nevpi,
    solve,
    with_observation,
)
from .utility import Exponential, Linear, TabulatedMonotone, UtilityCurve, satisfies_delta_property
