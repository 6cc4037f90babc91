"""Reversible multiparty asynchronous choreographies: types, runtime, semantics and checks."""
from .atomic import apply_atomic, atomic_steps, enumerate_atomic, explore_atomic
from .causal import (Trace, Transition, check_causal_consistency, check_square, concurrent,
                     rearrange, residual, reverse, stamp, trace_equivalent)
from .conformance import (WfContext, bf_bisimilar, check_correspondence, check_loop,
                          check_theorem1, check_wf_config, check_wf_process, implements,
                          initially_implements, queue_equiv)
from .decoupled import Redex, apply, apply_backward, apply_forward, explore, steps
from .errors import (BudgetExhausted, NotFirstOrder, ProjectionUndefined, RevchorError,
                     SourceError, StaleRedex)
from .globalsem import global_backward, global_forward, start
from .runtime import barbs, is_stable, normalize, show_config, state_hash
from .syntax import load, parse, show_source
from .types import project, swap_equivalent, type_equal

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
