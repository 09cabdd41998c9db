"""Graphic lambda calculus workbench.

Build graphs from the five elementary gates, apply local and global moves
(graphic beta, its dual and extension, fan-out, pruning, emergent-algebra
moves, eta), encode and decode untyped lambda terms, check move soundness
by decoration, replay derivations as scenarios, and drive it all through a
CLI or HTTP session service.
"""

from . import global_moves as _global_moves  # registers the global move handlers
from .coeff import ONE, Coefficient
from .encoding import SectorReport, decode, encode, graph_normalize, sector_of
from .emergent import Dil, EaTerm, Gen, check_move_soundness, decorate, ea_equal, ea_normalize
from .global_moves import ext1, global_fanout, global_prune
from .graph import (
    APP_GATE,
    FANOUT_GATE,
    LAMBDA_GATE,
    TERMINATION_GATE,
    Edge,
    GateKind,
    Graph,
    GraphError,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
    component_through,
    dilation_gate,
    reachable,
    validate,
)
from .iso import canonical_key, is_isomorphic
from .moves import (
    FORWARD,
    REVERSE,
    MoveKind,
    Patch,
    ScriptStep,
    Site,
    apply_move,
    apply_patch,
    apply_script,
    enumerate_matches,
    inverse_site,
    revert_patch,
)
from .terms import TIMEOUT, App, Lam, Term, Var, alpha_equal, parse, term_normalize

__all__ = [
    "ONE",
    "Coefficient",
    "Graph",
    "GateKind",
    "Edge",
    "NodePort",
    "InputLeaf",
    "OutputLeaf",
    "GraphError",
    "LAMBDA_GATE",
    "APP_GATE",
    "FANOUT_GATE",
    "TERMINATION_GATE",
    "dilation_gate",
    "build",
    "validate",
    "reachable",
    "component_through",
    "is_isomorphic",
    "canonical_key",
    "MoveKind",
    "Site",
    "Patch",
    "ScriptStep",
    "FORWARD",
    "REVERSE",
    "enumerate_matches",
    "apply_move",
    "apply_patch",
    "revert_patch",
    "apply_script",
    "inverse_site",
    "global_fanout",
    "global_prune",
    "ext1",
    "parse",
    "term_normalize",
    "alpha_equal",
    "Term",
    "Var",
    "Lam",
    "App",
    "TIMEOUT",
    "encode",
    "decode",
    "graph_normalize",
    "sector_of",
    "SectorReport",
    "Gen",
    "Dil",
    "EaTerm",
    "ea_normalize",
    "ea_equal",
    "decorate",
    "check_move_soundness",
]
