"""Finite state graphs over canonical soups and reachability verdicts.

A state graph is the breadth-first closure of the one-step successors of
an initial soup, with states deduplicated up to algebraic equality.
May-correctness asks whether a target state is reachable; will-correctness
asks whether it stays reachable from every reachable state, which on a
finite graph reduces to a reverse reachability sweep from the target.

Exploration is sequential and deterministic: states are numbered in BFS
discovery order under the canonical molecule order, so repeated runs (and
any future parallel frontier expansion honoring the same ordering) produce
identical graphs, verdicts and exports.
"""

from collections import deque
from dataclasses import dataclass, field
import json
import time

from . import rewrite, syntax, terms
from .errors import BudgetExceeded, NickError

DEFAULT_MAX_STATES = 10**6


@dataclass
class StateGraph:
    states: list  # index -> canonical soup
    edges: list  # (src, dst, Reaction, multiplicity)
    initial: int = 0
    complete: bool = True
    index: dict = field(default_factory=dict)  # canonical soup -> index

    def successors_of(self, i):
        return [(dst, r, m) for (src, dst, r, m) in self.edges if src == i]


@dataclass
class VerifyResult:
    verdict: str  # "holds" | "fails" | "inconclusive"
    witness: list = None  # [(Reaction, state soup), ...] for may-verdicts
    counterexample: object = None  # soup from which the target is unreachable
    counterexample_closure: list = None  # states reachable from it (indices)
    graph: StateGraph = None
    states: int = 0
    edges: int = 0
    seconds: float = 0.0

    @property
    def holds(self):
        return self.verdict == "holds"


def build_state_graph(initial, max_states=DEFAULT_MAX_STATES, eager_waste=False):
    """Breadth-first closure from canonicalize(initial).

    Raises :class:`BudgetExceeded` (carrying the partial graph) if the
    closure has more than *max_states* states.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    start = terms.canonicalize(initial)
    if eager_waste:
        start = rewrite.strip_unreactive(start)
    states = [start]
    index = {start: 0}
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for reaction, succ, mult in rewrite.successors(states[i], eager_waste):
            j = index.get(succ)
            if j is None:
                if len(states) >= max_states:
                    graph = StateGraph(states, edges, complete=False, index=index)
                    raise BudgetExceeded(
                        f"state budget of {max_states} exceeded", partial=graph
                    )
                j = len(states)
                index[succ] = j
                states.append(succ)
                queue.append(j)
            edges.append((i, j, reaction, mult))
    return StateGraph(states, edges, index=index)


def terminal_states(graph):
    """Indices of states with no outgoing edge; requires a complete graph."""
    if not graph.complete:
        raise NickError("terminal states of a truncated graph are undefined")
    has_out = {src for src, _, _, _ in graph.edges}
    return sorted(set(range(len(graph.states))) - has_out)


def may_reach(initial, target, max_states=DEFAULT_MAX_STATES, eager_waste=False):
    """Is some reduction sequence from *initial* ending at *target*?

    Holds comes with a shortest witness trace.  The search stops as soon as
    the target is discovered, so a holds verdict may be reached well inside
    the state budget; exhausting the budget without a decision yields an
    explicit inconclusive verdict.
    """
    t0 = time.monotonic()
    goal = terms.canonicalize(target)
    if eager_waste:
        goal = rewrite.strip_unreactive(goal)
    start = terms.canonicalize(initial)
    if eager_waste:
        start = rewrite.strip_unreactive(start)

    states = [start]
    index = {start: 0}
    parent = {0: None}
    queue = deque([0])
    n_edges = 0
    budget_hit = False
    found = index.get(goal)
    while queue and found is None:
        i = queue.popleft()
        for reaction, succ, _mult in rewrite.successors(states[i], eager_waste):
            n_edges += 1
            if succ in index:
                continue
            if len(states) >= max_states:
                budget_hit = True
                queue.clear()
                break
            j = len(states)
            index[succ] = j
            states.append(succ)
            parent[j] = (i, reaction)
            queue.append(j)
            if succ == goal:
                found = j
                break

    seconds = time.monotonic() - t0
    if found is not None:
        trace = []
        node = found
        while parent[node] is not None:
            prev, reaction = parent[node]
            trace.append((reaction, states[node]))
            node = prev
        trace.reverse()
        return VerifyResult(
            "holds",
            witness=trace,
            states=len(states),
            edges=n_edges,
            seconds=seconds,
        )
    verdict = "inconclusive" if budget_hit else "fails"
    return VerifyResult(verdict, states=len(states), edges=n_edges, seconds=seconds)


def will_reach(initial, target, max_states=DEFAULT_MAX_STATES, eager_waste=False):
    """Is *target* reachable from every state reachable from *initial*?

    Computed as a reverse reachability sweep from the target over the full
    forward closure.  A failure carries a counterexample state (a terminal
    one when any exists) together with its forward closure, all of which
    avoids the target.
    """
    t0 = time.monotonic()
    try:
        graph = build_state_graph(initial, max_states, eager_waste)
    except BudgetExceeded as exc:
        g = exc.partial
        return VerifyResult(
            "inconclusive",
            graph=g,
            states=len(g.states),
            edges=len(g.edges),
            seconds=time.monotonic() - t0,
        )
    goal = terms.canonicalize(target)
    if eager_waste:
        goal = rewrite.strip_unreactive(goal)
    goal_idx = graph.index.get(goal)

    n = len(graph.states)
    good = [False] * n
    if goal_idx is not None:
        preds = {}
        for src, dst, _r, _m in graph.edges:
            preds.setdefault(dst, []).append(src)
        good[goal_idx] = True
        queue = deque([goal_idx])
        while queue:
            i = queue.popleft()
            for p in preds.get(i, ()):
                if not good[p]:
                    good[p] = True
                    queue.append(p)

    bad = [i for i in range(n) if not good[i]]
    seconds = time.monotonic() - t0
    if not bad:
        return VerifyResult(
            "holds", graph=graph, states=n, edges=len(graph.edges), seconds=seconds
        )

    terminals = set(terminal_states(graph))
    bad_terminals = [i for i in bad if i in terminals]
    pick = bad_terminals[0] if bad_terminals else bad[0]
    closure = _forward_closure(graph, pick)
    assert goal_idx not in closure
    return VerifyResult(
        "fails",
        counterexample=graph.states[pick],
        counterexample_closure=sorted(closure),
        graph=graph,
        states=n,
        edges=len(graph.edges),
        seconds=seconds,
    )


def _forward_closure(graph, start):
    adj = {}
    for src, dst, _r, _m in graph.edges:
        adj.setdefault(src, set()).add(dst)
    seen = {start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in adj.get(i, ()):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def replay_trace(initial, trace):
    """Re-run a witness trace, checking every step; returns the final soup."""
    state = terms.canonicalize(initial)
    for reaction, expected in trace:
        state = rewrite.apply_reaction(state, reaction)
        if state != terms.canonicalize(expected):
            raise NickError("trace step does not replay to the recorded state")
    return state


# ---------------------------------------------------------------------------
# exports

def export_dot(graph):
    """DOT digraph with core-format state labels; byte-stable for a graph."""
    lines = ["digraph states {"]
    for i, state in enumerate(graph.states):
        label = _quote(syntax.print_soup(state))
        shape = ' shape="doublecircle"' if i == graph.initial else ""
        lines.append(f'  s{i} [label={label}{shape}];')
    for src, dst, reaction, mult in sorted(
        graph.edges, key=lambda e: (e[0], e[1], e[2].sort_key())
    ):
        suffix = f" x{mult}" if mult > 1 else ""
        lines.append(f'  s{src} -> s{dst} [label={_quote(reaction.rule + suffix)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def trace_step_json(reaction):
    return {
        "rule": reaction.rule,
        "consumed": [syntax.print_molecule(s) for s, c in reaction.consumed for _ in range(c)],
        "produced": [syntax.print_molecule(s) for s, c in reaction.produced for _ in range(c)],
    }


def graph_json(graph):
    return {
        "states": [syntax.print_soup(s) for s in graph.states],
        "edges": [
            {"from": src, "to": dst, "rule": r.rule, "mult": m}
            for src, dst, r, m in graph.edges
        ],
        "initial": graph.initial,
        "complete": graph.complete,
    }


def result_json(result, include_graph=False):
    # exploration time stays off the wire so JSON output is byte-deterministic
    out = {
        "verdict": result.verdict,
        "states": result.states,
        "edges": result.edges,
    }
    if result.witness is not None:
        out["witness"] = [trace_step_json(r) for r, _ in result.witness]
    if result.counterexample is not None:
        out["counterexample"] = syntax.print_soup(result.counterexample)
        out["counterexample_closure"] = result.counterexample_closure
    if include_graph and result.graph is not None:
        out["graph"] = graph_json(result.graph)
    return out


def to_json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
