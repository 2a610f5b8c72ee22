"""Trace boundedness of complete deterministic well-structured systems."""
from .boundedness import (Bounded, BoundedExpression, ForkWitness, Unbounded, Unknown, check_trace_inclusion,
                          clover, decide_boundedness, enumerate_bounded_expressions, expr_to_complement_dfa,
                          find_increasing_fork)
from .channels import LcsRule, LcsSystem, accelerate_lcs, lcs_read, lcs_write, product_leq
from .commutation import (Independence, decide_bounded_modulo, diamond_sufficient_check, fnf_word,
                          foata_automaton, normalized_system, omega_empty_modulo)
from .core import (AcceleratedWord, Alphabet, Dfa, DBuchi, DRabin, ModelError, NondeterminismError, OmegaLoop,
                   Plain, PreconditionError, ProductSystem, System, TraceboundError, UnsupportedModelError,
                   UsageError, lub_accelerate, synchronous_product)
from .counters import OMEGA, AffineTransition, CounterSystem, NetTransition, accelerate_affine, compile_net
from .coverability import UpSet, backward_coverable, check_determinism, language_empty, saturate
from .modelio import load_model, model_from_json, model_to_json
from .omega import (build_stage_systems, is_coflat, ltl_to_dra, ltl_to_nba, model_check_ltl, nba_to_dra,
                    omega_language_empty, parse_ltl)

__version__ = "0.1.0"
