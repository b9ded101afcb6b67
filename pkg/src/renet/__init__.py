"""renet: port-graph (net) rewriting, abstraction and solution transfer."""

from __future__ import annotations

from .errors import BudgetExhausted, InputError, RenetError
from .net import Alphabet, Delta, Net, Node, delta_d, height, nets_equal, structure, var_node
from .rules import (
    ApplyOrder,
    FreshLetters,
    LettersOutside,
    Preform,
    RedexDisjoint,
    RedexRestriction,
    Rns,
    Rule,
    invert_rns,
    rule,
)
from .rewrite import Stage, Transducer, apply, apply_transducer, derive, normal_forms, pipeline
from .abstraction import (
    OriginWitness,
    Prns,
    abstract_sisters,
    concept,
    roundtrip,
    search_common_origin,
    synthesize_prns,
    validate_rns_type,
    verify_origin,
)
from .macro import build_macro, parallel_td, solve_micro, verify_macro_equation, verify_parallel
from .realize import AlgebraSpec, evaluate, generated_closure, hom_extend
from .solver import MemoryBank, Problem, check_solution, recognize, solve

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec", "Alphabet", "ApplyOrder", "BudgetExhausted", "Delta", "FreshLetters", "InputError",
    "LettersOutside", "MemoryBank", "Net", "Node", "OriginWitness", "Preform", "Prns", "Problem",
    "RedexDisjoint", "RedexRestriction", "RenetError", "Rns", "Rule", "Stage", "Transducer",
    "abstract_sisters", "apply", "apply_transducer", "build_macro", "check_solution", "concept",
    "delta_d", "derive", "evaluate", "generated_closure", "height", "hom_extend", "invert_rns",
    "nets_equal", "normal_forms", "parallel_td", "pipeline", "recognize", "roundtrip", "rule",
    "search_common_origin", "solve", "solve_micro", "structure", "synthesize_prns",
    "validate_rns_type", "var_node", "verify_macro_equation", "verify_origin", "verify_parallel",
]
