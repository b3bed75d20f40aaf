"""Workbench for the two-domain strand displacement calculus.

Represent soups of two-domain single strands and top-nicked double
strands, reduce them under exchange, coverage, cooperation and waste,
verify may-/will-reachability of gate constructions, and simulate the
derived mass-action network deterministically or stochastically.
"""

from .errors import (
    BudgetExceeded,
    ElaborationError,
    InapplicableReaction,
    NickError,
    ParseError,
)
from .terms import (
    Soup,
    alg_equal,
    canonicalize,
    cosignal,
    duplex,
    fresh_private,
    parallel,
    public_domains,
    replicate,
    seg_t,
    seg_tx,
    seg_x,
    seg_xt,
    seg_xy,
    signal,
    soup,
    substitute,
)
from .syntax import (
    PlotSpec,
    SimSettings,
    elaborate,
    parse_dsd_script,
    parse_soup_term,
    print_soup,
)
from .rewrite import (
    Reaction,
    applicable_reactions,
    apply_reaction,
    is_reactive,
    successors,
)
from .gates import GateSpec, catalyst, fork, join, transducer
from .verify import (
    StateGraph,
    VerifyResult,
    build_state_graph,
    export_dot,
    may_reach,
    terminal_states,
    will_reach,
)
from .kinetics import (
    Crn,
    SimTrace,
    eval_plots,
    extract_crn,
    simulate_ode,
    simulate_ssa,
)

__version__ = "0.1.0"
