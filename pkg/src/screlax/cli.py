"""Command-line front end.

Subcommands: gen (write a random instance), solve (pattern enumeration),
run (relaxation hierarchy trace), hull (facet strengthening rounds),
compare (projection dominance report), report (flatten a trace to CSV).

Exit codes: 0 success, 1 computational failure, 2 usage or input error.
SCRELAX_LOG sets the log level; outputs are JSON (schemas ship under
screlax/schemas) and are reproducible for a fixed seed apart from the
generated_at stamp.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from .disjunctive import (algorithm41_run, algorithm41_run_exact,
                          compare_dominance, facets_to_dict)
from .formulations import build_bigm, build_lcp_alpha, build_mip_alpha
from .instance import (LcpInstance, default_bound, enumerate_solutions,
                       load_instance, random_instance)
from .lp import LpError
from .relaxation import DirectionSet, default_probes, run_hierarchy

log = logging.getLogger("screlax.cli")

_FORMS = ("mip_alpha", "bigm", "lcp_alpha_implicit", "lcp_alpha_explicit")
_MODES = ("ssilp", "ssdp", "homog_lp", "homog_sdp")
_HOMOG = ("homog_lp", "homog_sdp")


class UsageError(ValueError):
    """Bad arguments or malformed input files; mapped to exit code 2."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path: str | None, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _read_instance(path: str) -> LcpInstance:
    try:
        return load_instance(path)
    except FileNotFoundError as exc:
        raise UsageError(f"instance file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed instance file {path}: {exc}") from exc


def _instance_from_args(ns) -> LcpInstance:
    if getattr(ns, "instance", None) and ns.ell is not None:
        raise UsageError("give an instance file or --ell, not both")
    if getattr(ns, "instance", None):
        return _read_instance(ns.instance)
    if ns.ell is None:
        raise UsageError("need an instance file (-i) or a generator spec (--ell)")
    return random_instance(ns.ell, seed=ns.seed, kind=ns.kind)


def _build_form(inst: LcpInstance, form: str, big_r: float | None = None):
    if form == "mip_alpha":
        return build_mip_alpha(inst)
    if form == "bigm":
        return build_bigm(inst, r=big_r if big_r is not None else default_bound(inst))
    if form == "lcp_alpha_implicit":
        return build_lcp_alpha(inst, explicit_s=False)
    if form == "lcp_alpha_explicit":
        return build_lcp_alpha(inst, explicit_s=True)
    raise UsageError(f"unknown formulation {form!r}")


def _ser(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _ser(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_ser(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(ns) -> int:
    if ns.ell < 1:
        raise UsageError("--ell must be at least 1")
    inst = random_instance(ns.ell, seed=ns.seed, kind=ns.kind)
    obj = inst.to_dict()
    obj.update({"kind": ns.kind, "seed": ns.seed, "generated_at": _now()})
    _write_json(ns.output, obj)
    print(f"instance ell={inst.ell} kind={ns.kind} seed={ns.seed}"
          + (f" -> {ns.output}" if ns.output else ""), file=sys.stderr)
    return 0


def cmd_solve(ns) -> int:
    inst = _read_instance(ns.instance)
    sols = enumerate_solutions(inst, bound=ns.bound)
    report = {
        "ell": inst.ell,
        "n_solutions": len(sols),
        "solutions": [s.to_dict() for s in sols],
        "generated_at": _now(),
    }
    _write_json(ns.output, report)
    if sols:
        print(f"{len(sols)} solutions", file=sys.stderr)
    else:
        print("no solutions", file=sys.stderr)
    return 0


def cmd_run(ns) -> int:
    inst = _instance_from_args(ns)
    bundle = _build_form(inst, ns.form, ns.big_r)
    if ns.mode in _HOMOG and bundle.layout.m == bundle.layout.n:
        raise UsageError(
            f"mode {ns.mode} needs a formulation with a 0-1 block "
            f"(mip_alpha or bigm), not {ns.form}")
    if ns.d0 == "minimal":
        try:
            d0 = DirectionSet.minimal(bundle.layout)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        d0 = DirectionSet.coordinate(bundle.n)
    max_iter = ns.max_iter
    if max_iter is None:
        max_iter = inst.ell if ns.mode in _HOMOG else 10
    probes = default_probes(bundle, n_random=ns.probes, seed=ns.seed)
    trace = run_hierarchy(bundle, ns.mode, d0=d0, probe_dirs=probes,
                          max_iter=max_iter, tol=ns.tol)
    out = trace.to_dict()
    out["form"] = ns.form
    out["generated_at"] = _now()
    _write_json(ns.output, out)
    print(f"{ns.mode} on {ns.form}: {trace.stop_reason} after "
          f"{trace.iterations_run} iterations", file=sys.stderr)
    return 0


def cmd_hull(ns) -> int:
    inst = _instance_from_args(ns)
    max_iter = ns.max_iter if ns.max_iter is not None else inst.ell
    if max_iter < 0:
        raise UsageError("--max-iter must be nonnegative")
    if ns.arith == "rational":
        facets, trace = algorithm41_run_exact(inst, max_iter=max_iter)
    else:
        facets, trace = algorithm41_run(inst, max_iter=max_iter, jobs=ns.jobs)
    out = {
        "ell": inst.ell,
        "arith": ns.arith,
        "trace": _ser(trace),
        "facets": [facets_to_dict(f) for f in facets],
        "generated_at": _now(),
    }
    if ns.compare_dominance:
        rep = compare_dominance(inst, k_max=max_iter or inst.ell, jobs=ns.jobs)
        out["dominance"] = rep.to_dict()
    _write_json(ns.output, out)
    last = trace["iterations"][-1]
    print(f"{max_iter} strengthening rounds: {last['n_rows']} rows, "
          f"{last['n_eq']} equalities", file=sys.stderr)
    return 0


def cmd_compare(ns) -> int:
    inst = _instance_from_args(ns)
    rep = compare_dominance(inst, k_max=ns.k_max, jobs=ns.jobs)
    out = rep.to_dict()
    out["generated_at"] = _now()
    _write_json(ns.output, out)
    print(f"dominance: status={rep.status} all_ok={rep.all_ok}", file=sys.stderr)
    return 0


def cmd_report(ns) -> int:
    try:
        with open(ns.input) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"trace file not found: {ns.input}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed trace file {ns.input}: {exc}") from exc
    iterations = data.get("iterations")
    if iterations is None and isinstance(data.get("trace"), dict):
        iterations = data["trace"].get("iterations")
    if not isinstance(iterations, list):
        raise UsageError("input has no iterations to flatten")
    rows = [("k", "dir_id", "support")]
    for it in iterations:
        sup = it.get("supports", {})
        for key in sorted(sup, key=lambda s: (len(s), s)):
            rows.append((it.get("k"), key, sup[key]))
    if ns.output:
        with open(ns.output, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    else:
        csv.writer(sys.stdout).writerows(rows)
    print(f"{len(rows) - 1} support rows", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screlax",
        description="successive convex relaxations for complementarity problems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_generator(p, with_file=True):
        if with_file:
            p.add_argument("-i", "--instance", help="instance JSON file")
        p.add_argument("--ell", type=int, default=None,
                       help="generate an instance of this size instead")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--class", dest="kind", default="general",
                       choices=("general", "symmetric_psd"))

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class", dest="kind", default="general",
                   choices=("general", "symmetric_psd"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="enumerate complementary solutions")
    p.add_argument("instance")
    p.add_argument("--bound", type=float, default=None,
                   help="box bound for the search (default derived)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run", help="run a relaxation hierarchy")
    add_generator(p)
    p.add_argument("--form", required=True, choices=_FORMS)
    p.add_argument("--mode", required=True, choices=_MODES)
    p.add_argument("--d0", default="coordinate", choices=("coordinate", "minimal"),
                   help="direction set preset for the operator")
    p.add_argument("--probes", type=int, default=8,
                   help="number of random probe directions")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--big-r", type=float, default=None,
                   help="box size for the bigm formulation")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("hull", help="facet strengthening rounds")
    add_generator(p)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--arith", default="float", choices=("float", "rational"))
    p.add_argument("--compare-dominance", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("compare", help="projection dominance report")
    add_generator(p)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="flatten a trace JSON to CSV")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    level = os.environ.get("SCRELAX_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LpError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except (KeyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
