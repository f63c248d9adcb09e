"""Command-line front end: ``netlaplace {analyze,solve,verify,example}``.

Exit codes: 0 success, 1 input error, 2 solvability condition violated,
3 singular system, 4 internal residual failure (or a failed verification).
"""

import argparse
import json
import sys

import numpy as np

from . import bilaplace as bl
from . import checks
from . import closed_forms
from . import laplace as lp
from .exceptions import NetworkError, ResidualError, SingularSystemError, SolvabilityError
from .markov import (
    boundary_chain,
    build_transition,
    funnel_transition,
    green_restricted,
    induced_boundary,
    is_reversible,
    subnetwork_transition,
)
from .network import builtin_example, load_network, random_network, serialize_network

EXIT_OK, EXIT_INPUT, EXIT_SOLVABILITY, EXIT_SINGULAR, EXIT_RESIDUAL = range(5)

# kind -> (required fields, optional fields)
PROBLEM_FIELDS = {
    "poisson": ({"f"}, set()),
    "neumann": ({"f", "g"}, set()),
    "dirichlet": ({"f", "g"}, set()),
    "mixed": ({"f", "g", "dirichlet"}, {"neumann"}),
    "robin": ({"f", "g", "alpha", "beta"}, set()),
    "poisson-potential": ({"f", "v"}, set()),
    "dirichlet-potential": ({"f", "g", "v"}, set()),
    "d2n": ({"g"}, set()),
    "balayage": ({"f", "Y"}, set()),
    "iterated-poisson": ({"f"}, set()),
    "bineumann": ({"f", "g"}, set()),
    "bidirichlet": ({"f", "g"}, set()),
    "plate1": ({"f", "g1", "g2"}, set()),
    "plate2": ({"f", "g1", "g2"}, set()),
    "iterated-dirichlet": ({"f", "g1", "g2"}, set()),
    "bi-d2n": ({"g2"}, {"f"}),
    "bi-n2d": ({"g1"}, {"f", "c"}),
}
COMMON_FIELDS = {"kind", "ground", "anchor", "normal", "Y_normal", "overrides"}


class InputError(ValueError):
    pass


# -- encoding -------------------------------------------------------------------------

def decode_scalar(x):
    if isinstance(x, bool):
        raise InputError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, dict) and set(x) <= {"re", "im"} and "re" in x:
        return complex(float(x["re"]), float(x.get("im", 0.0)))
    raise InputError(f"expected a number or {{'re', 'im'}}, got {x!r}")


def encode_scalar(z):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return {"re": z.real, "im": z.imag}


def encode_matrix(a):
    a = np.asarray(a)
    if np.isrealobj(a):
        return a.tolist()
    return [[encode_scalar(z) for z in row] for row in a]


def _field(ts, obj, support, name):
    if not isinstance(obj, dict):
        raise InputError(f"field {name!r} must be an object vertex -> value")
    values = {}
    for k, v in obj.items():
        if k not in ts.vertices:
            raise InputError(f"field {name!r}: unknown vertex {k!r}")
        values[k] = decode_scalar(v)
    try:
        return ts.vector(values, support)
    except ValueError as exc:
        raise InputError(f"field {name!r}: {exc}") from None


def _vertex_list(ts, obj, name):
    if not isinstance(obj, list) or not all(isinstance(v, str) for v in obj):
        raise InputError(f"{name!r} must be a list of vertex names")
    try:
        return list(ts.indices(obj))
    except KeyError as exc:
        raise InputError(str(exc)) from None


# -- solve ----------------------------------------------------------------------------

def _lap(ts, u):
    return ts.P @ u - u


def _maxnorm(a):
    return float(np.abs(np.asarray(a)).max(initial=0.0))


def run_problem(ts, problem, ground=None, anchor=None):
    """Solve a problem description; returns ``(u, residuals, dof)``.

    ``residuals`` maps each defining equation to the max-norm of its defect.
    """
    if not isinstance(problem, dict) or "kind" not in problem:
        raise InputError("problem must be an object with a 'kind'")
    kind = problem["kind"]
    if kind not in PROBLEM_FIELDS:
        raise InputError(f"unknown problem kind {kind!r}")
    required, optional = PROBLEM_FIELDS[kind]
    unknown = set(problem) - required - optional - COMMON_FIELDS
    if unknown:
        raise InputError(f"unknown fields for {kind!r}: {sorted(unknown)}")
    missing = required - set(problem)
    if missing:
        raise InputError(f"missing fields for {kind!r}: {sorted(missing)}")
    ground = problem.get("ground", ground)
    anchor = problem.get("anchor", anchor)
    if ground is not None and ground not in ts.vertices:
        raise InputError(f"unknown ground vertex {ground!r}")
    if anchor is not None and anchor not in ts.vertices:
        raise InputError(f"unknown anchor vertex {anchor!r}")

    X = tuple(range(ts.n))
    i, d = list(ts.interior), list(ts.boundary)
    F = lambda name, support: _field(ts, problem[name], support, name)
    res = {}
    dof = 0

    if kind in ("poisson", "poisson-potential", "balayage", "iterated-poisson"):
        f = F("f", X)
    elif kind not in ("d2n", "bi-d2n", "bi-n2d", "plate2", "iterated-dirichlet"):
        f = F("f", i)

    if kind == "poisson":
        u = lp.solve_poisson(ts, f, ground)
        res["laplace"] = _maxnorm(_lap(ts, u) - f)
        dof = 1
    elif kind == "neumann":
        g = F("g", d)
        u = lp.solve_neumann(ts, f, g, ground)
        L = _lap(ts, u)
        res["laplace"] = _maxnorm(L[i] - f)
        res["neumann"] = _maxnorm(-L[d] - g)
        dof = 1
    elif kind == "dirichlet":
        g = F("g", d)
        u = lp.solve_dirichlet(ts, f, g)
        res["laplace"] = _maxnorm(_lap(ts, u)[i] - f)
        res["dirichlet"] = _maxnorm(u[d] - g)
    elif kind == "mixed":
        g = F("g", d)
        D = _vertex_list(ts, problem["dirichlet"], "dirichlet")
        N = _vertex_list(ts, problem["neumann"], "neumann") if "neumann" in problem else None
        u = lp.solve_mixed(ts, f, g, D, N)
        L = _lap(ts, u)
        gm = dict(zip(d, g))
        Nl = [b for b in d if b not in set(D)]
        res["laplace"] = _maxnorm(L[i] - f)
        res["dirichlet"] = _maxnorm(u[D] - [gm[b] for b in D])
        res["neumann"] = _maxnorm(-L[Nl] - [gm[b] for b in Nl])
    elif kind == "robin":
        g, a, b = F("g", d), F("alpha", d), F("beta", d)
        u = lp.solve_robin(ts, f, g, a, b)
        L = _lap(ts, u)
        res["laplace"] = _maxnorm(L[i] - f)
        res["robin"] = _maxnorm(a * u[d] - b * L[d] - g)
    elif kind == "poisson-potential":
        v = F("v", X)
        u = lp.solve_poisson_potential(ts, f, v)
        res["schroedinger"] = _maxnorm(_lap(ts, u) - v * u - f)
    elif kind == "dirichlet-potential":
        g, v = F("g", d), F("v", i)
        u = lp.solve_dirichlet_potential(ts, f, g, v)
        res["schroedinger"] = _maxnorm(_lap(ts, u)[i] - v * u[i] - f)
        res["dirichlet"] = _maxnorm(u[d] - g)
    elif kind == "d2n":
        g = F("g", d)
        g1 = lp.dirichlet_to_neumann(ts, g)
        u = lp.harmonic_extension(ts, g)
        res["neumann"] = _maxnorm(-_lap(ts, u)[d] - g1)
        res["laplace"] = _maxnorm(_lap(ts, u)[i])
    elif kind == "balayage":
        Y = _vertex_list(ts, problem["Y"], "Y")
        out = lp.balayage(ts, f, Y, ground)
        u = out.reduite
        res["laplace"] = _maxnorm(_lap(ts, u) - out.balayee)
        res["agreement-on-Y"] = _maxnorm(u[Y] - out.potential[Y])
    elif kind == "iterated-poisson":
        u = bl.solve_iterated_poisson(ts, f, ground)
        res["bilaplace"] = _maxnorm(_lap(ts, _lap(ts, u)) - f)
        dof = 1
    elif kind == "bineumann":
        g = F("g", d)
        u = bl.solve_bineumann(ts, f, g, ground)
        L = _lap(ts, u)
        res["bilaplace"] = _maxnorm(_lap(ts, L)[i] - f)
        res["neumann"] = _maxnorm(-L[d] - g)
        dof = 1
    elif kind == "bidirichlet":
        g = F("g", d)
        u = bl.solve_bidirichlet(ts, f, g)
        res["bilaplace"] = _maxnorm(_lap(ts, _lap(ts, u))[i] - f)
        res["dirichlet"] = _maxnorm(u[d] - g)
    elif kind == "plate1":
        g1, g2 = F("g1", d), F("g2", d)
        u = bl.solve_plate1(ts, f, g1, g2, anchor)
        L = _lap(ts, u)
        res["bilaplace"] = _maxnorm(_lap(ts, L)[i] - f)
        res["neumann"] = _maxnorm(-L[d] - g1)
        res["dirichlet"] = _maxnorm(u[d] - g2)
    elif kind == "plate2":
        sub = subnetwork_transition(ts, i)
        dY = [i[k] for k in sub.boundary]
        Yo = [i[k] for k in sub.interior]
        f, g1, g2 = F("f", Yo), F("g1", dY), F("g2", d)
        u = bl.solve_plate2(ts, f, g1, g2)
        uy = u[i]
        Ly = sub.P @ uy - uy
        res["bilaplace-subnetwork"] = _maxnorm((sub.P @ Ly - Ly)[list(sub.interior)] - f)
        res["star-neumann"] = _maxnorm(lp.normal_derivative(ts, u, "star", Y=i) - g1)
        res["dirichlet"] = _maxnorm(u[d] - g2)
    elif kind == "iterated-dirichlet":
        dY = list(induced_boundary(ts, i))
        Yo = [y for y in i if y not in set(dY)]
        f, g1, g2 = F("f", Yo), F("g1", dY), F("g2", d)
        u = bl.solve_iterated_dirichlet(ts, f, g1, g2)
        L = _lap(ts, u)
        res["bilaplace"] = _maxnorm(_lap(ts, L)[Yo] - f)
        res["inner-dirichlet"] = _maxnorm(L[dY] - g1)
        res["dirichlet"] = _maxnorm(u[d] - g2)
    elif kind == "bi-d2n":
        g2 = F("g2", d)
        f = F("f", i) if "f" in problem else np.zeros(len(i))
        g1 = bl.bi_d2n(ts, g2, f)
        u = bl.solve_plate1(ts, f, g1, g2, anchor)
        res["plate-condition"] = _maxnorm(bl.plate1_condition(ts, f, g1, g2).residual)
    else:  # bi-n2d
        g1 = F("g1", d)
        f = F("f", i) if "f" in problem else np.zeros(len(i))
        c = decode_scalar(problem.get("c", 0.0))
        g2 = bl.bi_n2d(ts, g1, f, anchor, c)
        u = bl.solve_plate1(ts, f, g1, g2, anchor)
        res["plate-condition"] = _maxnorm(bl.plate1_condition(ts, f, g1, g2).residual)
        dof = 1
    return u, res, dof


def _normal_report(ts, u, problem, kind):
    Y = None
    if kind in ("subnetwork", "star"):
        Y = problem.get("Y_normal", [ts.vertices[k] for k in ts.interior])
        Y = _vertex_list(ts, Y, "Y_normal")
    overrides = problem.get("overrides")
    vals = lp.normal_derivative(ts, u, kind, Y=Y, overrides=overrides)
    if Y is None:
        where = ts.boundary
    else:
        where = induced_boundary(ts, Y)
    return {ts.vertices[k]: encode_scalar(v) for k, v in zip(where, vals)}


def cmd_solve(args):
    net = load_network(args.network)
    ts = build_transition(net)
    with open(args.problem, encoding="utf-8") as fh:
        try:
            problem = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"problem file: {exc}") from None
    u, res, dof = run_problem(ts, problem, args.ground, args.anchor)
    scale = max(1.0, _maxnorm(u))
    out = {
        "kind": problem["kind"],
        "solution": {v: encode_scalar(x) for v, x in zip(ts.vertices, u)},
        "residuals": res,
        "degrees_of_freedom": dof,
        "condition_report": _condition_report(ts),
    }
    normal = problem.get("normal", args.normal)
    if normal:
        out["normal_derivative"] = {"kind": normal, "values": _normal_report(ts, u, problem, normal)}
    bad = {k: r for k, r in res.items() if r > args.tol * scale}
    _emit(out, args.output)
    if bad:
        print(f"residual gate failed: {bad}", file=sys.stderr)
        return EXIT_RESIDUAL
    return EXIT_OK


def _condition_report(ts):
    if not ts.interior:
        return {}
    rep = {"green_interior": green_restricted(ts, ts.interior).condition}
    s = checks.singularity_report(ts)
    rep["S"] = s["S"]["condition"]
    rep["I+R"] = s["I+R"]["condition"]
    return {k: (v if np.isfinite(v) else "inf") for k, v in rep.items()}


# -- analyze --------------------------------------------------------------------------

def cmd_analyze(args):
    net = load_network(args.network)
    ts = build_transition(net)
    V = ts.vertices
    out = {
        "vertices": len(V),
        "edges": len(net.edges),
        "boundary": list(net.boundary),
        "interior": [V[k] for k in ts.interior],
        "strongly_connected": True,
        "pi": {v: float(p) for v, p in zip(V, ts.pi)},
        "reversible": is_reversible(ts),
    }
    if ts.interior:
        app = boundary_chain(ts)
        out["exit_boundary"] = [V[k] for k in app.exit]
        out["entrance_boundary"] = [V[k] for k in app.entrance]
        rep = checks.singularity_report(ts)
        for name in ("S", "I+R"):
            cond = rep[name]["condition"]
            out[name] = {
                "verdict": "SINGULAR" if rep[name]["singular"] else "regular",
                "condition": cond if np.isfinite(cond) else "inf",
            }
    if args.output == "table":
        lines = [
            f"vertices: {out['vertices']}",
            f"edges: {out['edges']}",
            f"boundary: {{{', '.join(out['boundary'])}}}",
            f"interior: {{{', '.join(out['interior'])}}}",
            "strongly connected: yes",
            "pi: " + ", ".join(f"{v}={p:.12g}" for v, p in out["pi"].items()),
            f"reversible: {'yes' if out['reversible'] else 'no'}",
        ]
        if ts.interior:
            lines.append(f"exit boundary: {{{', '.join(out['exit_boundary'])}}}")
            lines.append(f"entrance boundary: {{{', '.join(out['entrance_boundary'])}}}")
            for name in ("S", "I+R"):
                lines.append(f"{name}: {out[name]['verdict'].upper()} (condition {out[name]['condition']})")
        print("\n".join(lines))
    else:
        _emit(out, "json")
    return EXIT_OK


# -- verify ---------------------------------------------------------------------------

def cmd_verify(args):
    if args.network == "random":
        rng = np.random.default_rng(args.seed)
        net = random_network(int(rng.integers(4, 13)), rng)
    else:
        net = load_network(args.network)
    ts = build_transition(net)
    if args.suite == "identities":
        rng = np.random.default_rng(args.seed)
        results = checks.identity_checks(ts, rng) + checks.solver_checks(ts, rng)
        results.append(checks.resolvent_check(ts))
    else:
        results = checks.montecarlo_checks(ts, args.trials, args.seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{'FAIL' if failed else 'PASS'} summary passed={len(results) - len(failed)} failed={len(failed)}")
    return EXIT_RESIDUAL if failed else EXIT_OK


# -- example --------------------------------------------------------------------------

def _numeric_expectations(ts):
    i = list(ts.interior)
    app = boundary_chain(ts)
    blocks = bl.bi_blocks(ts)
    out = {
        "pi": ts.pi,
        "green_ground": green_restricted(ts, [k for k in range(ts.n) if k != ts.root]).matrix,
        "green_interior": green_restricted(ts, i).matrix,
        "hitting": app.hitting,
        "Q": app.Q,
        "R": blocks.R,
    }
    if blocks.ir_invertible:
        out["T"] = bl.transfer_matrix(ts).T
    return out


def _jsonify(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (bool, np.bool_)):
            out[k] = bool(v)
        elif np.ndim(v) == 0:
            out[k] = encode_scalar(v)
        elif np.ndim(v) == 1:
            out[k] = [encode_scalar(x) for x in v]
        else:
            out[k] = encode_matrix(v)
    return out


def cmd_example(args):
    params = args.params
    if args.kind == "pathA":
        if len(params) != 1:
            raise InputError("pathA takes one parameter N")
        N = _int(params[0])
        net = builtin_example("pathA", N)
        exp = {
            "closed_form": _jsonify(closed_forms.path_closed_forms(N)),
            "computed": _jsonify(_numeric_expectations(build_transition(net))),
        }
    elif args.kind == "cycle":
        if len(params) != 1:
            raise InputError("cycle takes one parameter, the even length 2N")
        L = _int(params[0])
        net = builtin_example("cycle", L)
        ts = build_transition(net)
        rep = checks.singularity_report(ts)
        exp = {
            "closed_form": _jsonify(closed_forms.cycle_closed_forms(L)),
            "computed": {"S_singular": rep["S"]["singular"], "I+R_singular": rep["I+R"]["singular"]},
        }
    elif args.kind == "funnelB":
        p = [float(x) for x in params]
        net = builtin_example("funnelB", p, allow_loop_fold=args.allow_loop_fold)
        exp = {"network_chain": _jsonify(_numeric_expectations(build_transition(net)))}
        if args.allow_loop_fold:
            looped = funnel_transition(p)
            exp["looped_chain"] = _jsonify(closed_forms.funnel_closed_forms(p))
            exp["looped_chain_computed"] = _jsonify(_numeric_expectations(looped))
    else:
        raise InputError(f"unknown example kind {args.kind!r}")
    text = serialize_network(net)
    if args.network_out:
        with open(args.network_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    _emit({"network": json.loads(text), "expectations": exp}, args.output)
    return EXIT_OK


def _int(s):
    try:
        return int(s)
    except ValueError:
        raise InputError(f"expected an integer, got {s!r}") from None


# -- plumbing -------------------------------------------------------------------------

def _emit(obj, mode):
    if mode == "table":
        for key, val in obj.items():
            if isinstance(val, dict):
                print(f"{key}:")
                for k, v in val.items():
                    print(f"  {k}: {json.dumps(v)}")
            else:
                print(f"{key}: {json.dumps(val)}")
    else:
        print(json.dumps(obj, indent=2, sort_keys=False))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netlaplace",
        description="Laplace and bi-Laplace boundary value problems on directed networks.",
    )
    parser.add_argument("--output", choices=["json", "table"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="describe a network and its boundary apparatus")
    p.add_argument("network")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="solve a boundary value problem")
    p.add_argument("network")
    p.add_argument("problem")
    p.add_argument("--tol", type=float, default=1e-9, help="residual gate (relative)")
    p.add_argument("--ground", help="grounding vertex (default: the root)")
    p.add_argument("--anchor", help="boundary anchor for plate problems")
    p.add_argument("--normal", choices=["standard", "reversed", "subnetwork", "star", "override"],
                   help="also report this normal derivative of the solution")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the identity or Monte Carlo suite")
    p.add_argument("network", help="network file, or 'random' for a seeded random network")
    p.add_argument("--suite", choices=["identities", "montecarlo"], default="identities")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="emit a built-in network with its expected kernels")
    p.add_argument("kind", choices=["pathA", "funnelB", "cycle"])
    p.add_argument("params", nargs="+")
    p.add_argument("--allow-loop-fold", action="store_true",
                   help="funnelB: take p_1..p_N and fold the holding probability p_1 away")
    p.add_argument("--network-out", help="also write the network file here")
    p.set_defaults(func=cmd_example)

    # accept --output after the subcommand too
    for name, sp in sub.choices.items():
        sp.add_argument("--output", choices=["json", "table"], default=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolvabilityError as exc:
        print(f"solvability condition violated: {exc}", file=sys.stderr)
        res = exc.residual
        if res is not None:
            print(json.dumps({"residual": _jsonify({"r": res})["r"]}), file=sys.stderr)
        return EXIT_SOLVABILITY
    except np.linalg.LinAlgError as exc:
        print(f"singular system: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ResidualError as exc:
        print(f"internal residual failure: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except (InputError, NetworkError, ValueError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
