"""Command-line front end for parsing, gates, reduction, verification and
simulation.

Exit codes: 0 success (or verdict holds), 1 verdict fails, 2 inconclusive
or budget exceeded, 64 usage error, 65 malformed input.  Outputs are
deterministic given inputs and seed flags.
"""

import argparse
import os
import sys

from . import gates, kinetics, rewrite, syntax, terms, verify
from .errors import BudgetExceeded, ElaborationError, NickError, ParseError

EX_OK = 0
EX_FAILS = 1
EX_INCONCLUSIVE = 2
EX_USAGE = 64
EX_DATA = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _read_term_arg(value):
    """A term argument is an inline expression or a path to a term file."""
    if os.path.exists(value):
        with open(value, encoding="utf-8") as fh:
            value = fh.read()
    return syntax.parse_soup_term(value)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = _Parser(prog="nick", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="echo the canonical form of a term")
    p.add_argument("term", help="core-format text or a path to a .nick file")
    p.add_argument("--style", choices=["core", "pictogram"], default="core")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("gate", help="emit a gate population in core format")
    p.add_argument("kind", choices=list(gates.KINDS))
    p.add_argument("domains", nargs="+", help="transducer/fork: input then outputs; catalyst: x y z; join: inputs then output")
    p.add_argument("--n", type=int, default=1, help="population size")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("reduce", help="breadth-first reduction frontier")
    p.add_argument("term")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--eager-waste", action="store_true")
    p.add_argument("--max-states", type=int, default=verify.DEFAULT_MAX_STATES)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("states", help="build the full state graph")
    p.add_argument("term")
    p.add_argument("--max-states", type=int, default=verify.DEFAULT_MAX_STATES)
    p.add_argument("--eager-waste", action="store_true")
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check a reachability property")
    p.add_argument("mode", choices=["may", "will"])
    p.add_argument("--init", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--max-states", type=int, default=verify.DEFAULT_MAX_STATES)
    p.add_argument("--eager-waste", action="store_true")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="run kinetics and emit a CSV trace")
    p.add_argument("method", choices=["ode", "ssa"])
    p.add_argument("input", help=".dsd script, .nick term file, or inline term")
    p.add_argument("--two-step", action="store_true", help="expand cooperation")
    p.add_argument("--eager-waste", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--end-time", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--plot", action="append", default=[], help="extra plot spec (term syntax or sum({...}))")
    p.add_argument("--max-species", type=int, default=10_000)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")

    p = sub.add_parser("crn", help="extract the reaction network")
    p.add_argument("input", help=".dsd script, .nick term file, or inline term")
    p.add_argument("--two-step", action="store_true")
    p.add_argument("--eager-waste", action="store_true")
    p.add_argument("--max-species", type=int, default=10_000)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _load_simulation_input(args):
    """Returns (initial soup, settings, plot specs)."""
    text = None
    is_script = False
    if os.path.exists(args.input):
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
        is_script = args.input.endswith(".dsd")
    else:
        text = args.input
    if is_script:
        program = syntax.parse_dsd_script(text)
        initial, settings, plots = syntax.elaborate(program)
    else:
        initial = terms.canonicalize(syntax.parse_soup_term(text))
        settings = syntax.SimSettings()
        plots = []
    if getattr(args, "end_time", None) is not None:
        settings.end_time = args.end_time
    if getattr(args, "points", None) is not None:
        settings.points = args.points
    settings.seed = getattr(args, "seed", 0)
    for spec_text in getattr(args, "plot", []):
        plots.append(_parse_plot_arg(spec_text))
    return initial, settings, plots


def _parse_plot_arg(text):
    stream = syntax._Stream(text)
    spec = syntax._parse_plot_spec(stream)
    if stream.peek().kind != "eof":
        stream.fail("trailing input in plot spec")
    return spec


def _cmd_parse(args):
    u = terms.canonicalize(_read_term_arg(args.term))
    if args.format == "json":
        payload = {
            "canonical": syntax.print_soup(u),
            "molecules": u.molecule_count(),
            "public_domains": sorted(terms.public_domains(u)),
            "private_domains": u.n_priv,
        }
        _emit(verify.to_json_text(payload), args.out)
    else:
        _emit(syntax.print_soup(u, style=args.style) + "\n", args.out)
    return EX_OK


def _cmd_gate(args):
    kind = args.kind
    doms = args.domains
    try:
        if kind == "transducer":
            if len(doms) != 2:
                raise ValueError("transducer takes: input output")
            u = gates.transducer(doms[0], doms[1], args.n)
        elif kind == "fork":
            if len(doms) < 3:
                raise ValueError("fork takes: input output output...")
            u = gates.fork(doms[0], doms[1:], args.n)
        elif kind == "catalyst":
            if len(doms) != 3:
                raise ValueError("catalyst takes: x y z (inputs x,y; outputs y,z)")
            u = gates.catalyst(doms[0], doms[1], doms[2], args.n)
        else:
            if len(doms) < 3:
                raise ValueError("join takes: input input [input] output")
            u = gates.join(doms[:-1], doms[-1], args.n)
    except ValueError as exc:
        print(f"nick gate: {exc}", file=sys.stderr)
        return EX_USAGE
    if args.format == "json":
        _emit(verify.to_json_text({"term": syntax.print_soup(u)}), args.out)
    else:
        _emit(syntax.print_soup(u) + "\n", args.out)
    return EX_OK


def _cmd_reduce(args):
    initial = terms.canonicalize(_read_term_arg(args.term))
    if args.eager_waste:
        initial = rewrite.strip_unreactive(initial)
    frontier = {initial}
    seen = {initial}
    for _ in range(args.steps):
        nxt = set()
        for state in frontier:
            for _r, succ, _m in rewrite.successors(state, args.eager_waste):
                if succ not in seen:
                    seen.add(succ)
                    nxt.add(succ)
                    if len(seen) > args.max_states:
                        raise BudgetExceeded(
                            f"state budget of {args.max_states} exceeded"
                        )
        frontier = nxt
        if not frontier:
            break
    ordered = sorted(frontier, key=lambda u: (u.mols, u.n_priv))
    lines = [syntax.print_soup(s) for s in ordered]
    if args.format == "json":
        payload = {"steps": args.steps, "frontier": lines}
        _emit(verify.to_json_text(payload), args.out)
    else:
        header = f"# frontier after {args.steps} step(s): {len(lines)} state(s)\n"
        _emit(header + "".join(line + "\n" for line in lines), args.out)
    return EX_OK


def _cmd_states(args):
    initial = _read_term_arg(args.term)
    graph = verify.build_state_graph(
        initial, max_states=args.max_states, eager_waste=args.eager_waste
    )
    terminals = verify.terminal_states(graph)
    if args.format == "dot":
        _emit(verify.export_dot(graph), args.out)
    elif args.format == "json":
        payload = verify.graph_json(graph)
        payload["terminals"] = terminals
        _emit(verify.to_json_text(payload), args.out)
    else:
        lines = [
            f"{len(graph.states)} states, {len(graph.edges)} edges, "
            f"{len(terminals)} terminal(s)"
        ]
        lines.extend(f"terminal: {syntax.print_soup(graph.states[i])}" for i in terminals)
        _emit("\n".join(lines) + "\n", args.out)
    return EX_OK


def _cmd_verify(args):
    initial = _read_term_arg(args.init)
    target = _read_term_arg(args.target)
    fn = verify.may_reach if args.mode == "may" else verify.will_reach
    result = fn(
        initial,
        target,
        max_states=args.max_states,
        eager_waste=args.eager_waste,
    )
    if args.format == "json":
        _emit(verify.to_json_text(verify.result_json(result)), args.out)
    else:
        lines = []
        if result.graph is not None and result.graph.complete:
            n_term = len(verify.terminal_states(result.graph))
            lines.append(f"{result.states} states, {n_term} terminal(s)")
        else:
            lines.append(f"{result.states} states explored")
        lines.append(f"{args.mode}-reach: {result.verdict}")
        if result.witness:
            lines.append(f"witness ({len(result.witness)} steps):")
            for reaction, state in result.witness:
                lines.append(f"  {reaction.rule}: {syntax.print_soup(state)}")
        if result.counterexample is not None:
            lines.append(f"counterexample: {syntax.print_soup(result.counterexample)}")
        _emit("\n".join(lines) + "\n", args.out)
    if result.verdict == "holds":
        return EX_OK
    if result.verdict == "fails":
        return EX_FAILS
    return EX_INCONCLUSIVE


def _cmd_simulate(args):
    initial, settings, plots = _load_simulation_input(args)
    settings.method = args.method
    mode = "two-step" if args.two_step else "trimolecular"
    crn = kinetics.extract_crn(
        initial,
        settings=settings,
        max_species=args.max_species,
        cooperation=mode,
        eager_waste=args.eager_waste,
    )
    if args.method == "ode":
        trace = kinetics.simulate_ode(crn, settings=settings)
    else:
        trace = kinetics.simulate_ssa(crn, settings=settings)
    if plots:
        trace = kinetics.eval_plots(trace, crn, plots)
    if args.format == "json":
        payload = {
            "labels": trace.labels,
            "times": [float(t) for t in trace.times],
            "values": [[float(v) for v in row] for row in trace.values],
        }
        _emit(kinetics.json_text(payload), args.out)
    else:
        _emit(kinetics.trace_csv(trace), args.out)
    return EX_OK


def _cmd_crn(args):
    initial, settings, _plots = _load_simulation_input(args)
    mode = "two-step" if args.two_step else "trimolecular"
    crn = kinetics.extract_crn(
        initial,
        settings=settings,
        max_species=args.max_species,
        cooperation=mode,
        eager_waste=args.eager_waste,
    )
    report = kinetics.counts_report(initial, settings=settings)
    if args.format == "json":
        payload = kinetics.crn_json(crn)
        payload["counts"] = kinetics.crn_counts(crn)
        payload["report"] = report
        _emit(kinetics.json_text(payload), args.out)
    else:
        lines = [f"cooperation mode: {mode}"]
        for name, counts in report["modes"].items():
            ref = report["reference"]
            match = report["match"][name]
            lines.append(f"[{name}]")
            for key, value in counts.items():
                if key in ref:
                    flag = "match" if match[key] else "mismatch"
                    lines.append(f"  {key}: {value} (reference {ref[key]}: {flag})")
                else:
                    lines.append(f"  {key}: {value}")
        _emit("\n".join(lines) + "\n", args.out)
    return EX_OK


def _cmd_serve(args):
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EX_OK


_COMMANDS = {
    "parse": _cmd_parse,
    "gate": _cmd_gate,
    "reduce": _cmd_reduce,
    "states": _cmd_states,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "crn": _cmd_crn,
    "serve": _cmd_serve,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EX_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ElaborationError) as exc:
        print(f"nick: {exc}", file=sys.stderr)
        return EX_DATA
    except BudgetExceeded as exc:
        print(f"nick: {exc}", file=sys.stderr)
        return EX_INCONCLUSIVE
    except ValueError as exc:
        print(f"nick: {exc}", file=sys.stderr)
        return EX_USAGE
    except NickError as exc:
        print(f"nick: {exc}", file=sys.stderr)
        return EX_FAILS


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
