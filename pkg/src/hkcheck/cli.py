"""Command-line interface.

Subcommands: certify, power, bip, heinz-kato, gen, trace. JSON goes to stdout
or to ``-o PATH``; diagnostics go to stderr.

Exit codes
----------
0  success (heinz-kato / trace: every row passes)
1  input could not be parsed (bad JSON, schema field, flag value)
2  an operator failed certification (resolvent singular)
3  a routine's precondition was not met (exponent range, non-diagonalizable
   input for the oracle, ...)
4  heinz-kato / trace found a violating row
5  analytic BIP requested without usable structure metadata
"""

import argparse
import json
import os
import sys

import numpy as np

from hkcheck import defaults
from hkcheck.bip import analytic_bip, fit_bip, sample_imaginary_norms
from hkcheck.cmatrix import from_json, to_json
from hkcheck.errors import PreconditionError, ResolventSingular, StructureUnknown
from hkcheck.gen import CLASSES, InstanceSpec, bundle_to_json, gen_bundle
from hkcheck.heinzkato import build_instance, check_inequality, three_lines_trace
from hkcheck.powers import QuadratureConfig, power
from hkcheck.sectorial import certify_invertible_sectorial, certify_sectorial

EXIT_OK, EXIT_PARSE, EXIT_SINGULAR, EXIT_PRECONDITION, EXIT_VIOLATION, EXIT_STRUCTURE = range(6)


class InputError(Exception):
    pass


def parse_complex(text):
    """Parse ``re``, ``re+imi``, ``imi`` (``j`` accepted for ``i``)."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"cannot parse exponent {text!r}") from None


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg})") from None


def _load_matrix(path):
    obj = _load_json(path)
    try:
        return from_json(obj), obj.get("structure")
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_bundle(path):
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected an object")
    mats = {}
    for key in ("A", "B", "T"):
        if key not in obj:
            raise InputError(f"{path}: missing field '{key}'")
        try:
            mats[key] = from_json(obj[key])
        except ValueError as exc:
            raise InputError(f"{path}: field '{key}': {exc}") from None
    mats["structure"] = obj.get("structure") or {}
    return mats


_GEN_KEYS = {
    "class": ("cls", str),
    "seed": ("seed", int),
    "n1": ("n1", int),
    "n2": ("n2", int),
    "n": ("n", int),
    "lo": ("lo", float),
    "hi": ("hi", float),
    "cond": ("cond_target", float),
    "sector": ("sector_angle", float),
    "norm_t": ("norm_t", float),
}


def parse_gen(tokens, seed=None):
    """``key=value`` tokens (class, seed, n, n1, n2, lo, hi, cond, sector,
    norm_t) to an InstanceSpec."""
    vals = {}
    for tok in tokens:
        key, sep, raw = tok.partition("=")
        if not sep or key not in _GEN_KEYS:
            raise InputError(f"bad --gen token {tok!r}; keys: {', '.join(_GEN_KEYS)}")
        name, conv = _GEN_KEYS[key]
        try:
            vals[name] = conv(raw)
        except ValueError:
            raise InputError(f"bad value in --gen token {tok!r}") from None
    if seed is not None:
        vals["seed"] = seed
    n = vals.pop("n", 4)
    kw = {
        "seed": vals.pop("seed", 0),
        "cls": vals.pop("cls", "HermitianDiag"),
        "dims": (vals.pop("n1", n), vals.pop("n2", n)),
        "spectrum": (vals.pop("lo", 0.5), vals.pop("hi", 10.0)),
    }
    kw.update(vals)
    if kw["cls"] not in CLASSES:
        raise InputError(f"unknown class {kw['cls']!r}; choose from {', '.join(CLASSES)}")
    try:
        return InstanceSpec(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_grid(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None
    if not vals:
        raise InputError("grid is empty")
    return vals


def _emit(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _quad_cfg(args):
    try:
        return QuadratureConfig(nodes_per_panel=args.nodes, panel_count=args.panels,
                                x_lo=args.x_lo, x_hi=args.x_hi, tail_tol=args.tail_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# -- subcommands ----------------------------------------------------------

def cmd_certify(args):
    a, _ = _load_matrix(args.matrix)
    if args.kind == "invertible":
        cert = certify_invertible_sectorial(a, s_max=args.s_max, n_grid=args.n_grid)
    else:
        cert = certify_sectorial(a, s_max=args.s_max, n_grid=args.n_grid)
    _emit(cert.to_json(), args.output)
    return EXIT_OK


def cmd_power(args):
    a, _ = _load_matrix(args.matrix)
    z = parse_complex(args.exponent)
    res = power(a, z, args.method, _quad_cfg(args))
    _emit(res.to_json(), args.output)
    return EXIT_OK


def cmd_bip(args):
    a, structure = _load_matrix(args.matrix)
    if args.t_points < 1 or args.t_max < 0:
        raise InputError("empty t-range")
    if structure and not args.fitted:
        cert = analytic_bip(a, structure)
        cert = type(cert)(cert.M, cert.phi, cert.provenance, cert.t_max,
                          tuple(sample_imaginary_norms(a, _t_grid(args))))
    else:
        cert = fit_bip(sample_imaginary_norms(a, _t_grid(args)))
    obj = cert.to_json()
    if obj["t_max"] == float("inf"):
        obj["t_max"] = None
    _emit(obj, args.output)
    return EXIT_OK


def _t_grid(args):
    if args.t_points == 1:
        return [0.0]
    return np.linspace(-args.t_max, args.t_max, args.t_points).tolist()


def _instance_from_args(args):
    if args.bundle and args.gen is not None:
        raise InputError("give either a bundle file or --gen, not both")
    if args.bundle:
        mats = _load_bundle(args.bundle)
    else:
        spec = parse_gen(args.gen or [], args.seed)
        mats = gen_bundle(spec)
    if args.bip == "analytic":
        st = mats["structure"]
        if not (st.get("A") and st.get("B")):
            raise StructureUnknown("bundle lacks structure metadata for analytic BIP")
    return build_instance(mats["A"], mats["B"], mats["T"], mats["structure"], bip=args.bip)


def cmd_heinz_kato(args):
    inst = _instance_from_args(args)
    grid = parse_grid(args.a_grid) if args.a_grid else defaults.A_GRID
    if any(not 0 < a < 1 for a in grid):
        raise InputError("a-grid values must lie in (0, 1)")
    report = check_inequality(inst, grid, _quad_cfg(args))
    _emit(report.to_json(), args.output)
    return EXIT_OK if report.all_pass else EXIT_VIOLATION


def cmd_gen(args):
    spec = parse_gen(args.gen or [], args.seed)
    _emit(bundle_to_json(gen_bundle(spec)), args.output)
    return EXIT_OK


def cmd_trace(args):
    inst = _instance_from_args(args)
    grid = parse_grid(args.a_grid) if args.a_grid else [0.25, 0.5, 0.75]
    if any(not 0 < a < 1 for a in grid):
        raise InputError("a-grid values must lie in (0, 1)")
    if args.t_points < 3:
        raise InputError("the trace needs at least 3 t-points")
    t_grid = np.linspace(-args.t_max, args.t_max, args.t_points)
    rng = np.random.Generator(np.random.Philox(args.seed if args.seed is not None else 0))
    n1, n2 = inst.A.shape[0], inst.B.shape[0]
    records = []
    for _ in range(args.pairs):
        u = rng.standard_normal(n1) + 1j * rng.standard_normal(n1)
        v = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
        for a in grid:
            records.append(three_lines_trace(inst, a, u, v, t_grid, _quad_cfg(args)).to_json())
    ok = all(r["holds"] for r in records)
    _emit({"records": records, "all_hold": ok}, args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------

def _add_quad(p):
    g = p.add_argument_group("quadrature")
    g.add_argument("--nodes", type=int, default=defaults.NODES_PER_PANEL)
    g.add_argument("--panels", type=int, default=defaults.PANEL_COUNT)
    g.add_argument("--x-lo", type=float, default=defaults.X_BOUNDS[0])
    g.add_argument("--x-hi", type=float, default=defaults.X_BOUNDS[1])
    g.add_argument("--tail-tol", type=float, default=defaults.TAIL_TOL)


def _add_instance(p):
    p.add_argument("bundle", nargs="?", help="instance bundle JSON {A, B, T, structure}")
    p.add_argument("--gen", nargs="*", metavar="KEY=VALUE",
                   help="generate the instance instead, e.g. class=HermitianDiag seed=7")
    p.add_argument("--seed", type=int, help="generator seed (overrides seed=)")
    p.add_argument("--bip", choices=("analytic", "fitted"), default="analytic")
    p.add_argument("--a-grid", help="comma-separated exponents in (0, 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hkcheck",
        description="Powers of sectorial matrices and Heinz-Kato inequality checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="certify sectoriality constant K or L")
    p.add_argument("matrix")
    p.add_argument("--kind", choices=("invertible", "sectorial"), default="invertible")
    p.add_argument("--s-max", type=float, default=defaults.SCAN_S_MAX)
    p.add_argument("--n-grid", type=int, default=defaults.SCAN_N_GRID)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("power", help="compute a complex power A^z",
                       description="Use '--' before negative complex exponents, "
                                   "e.g. power --method dunford m.json -- -0.3-0.2i")
    p.add_argument("matrix")
    p.add_argument("exponent", help="complex exponent 're[+im i]'")
    p.add_argument("--method", default="auto",
                   choices=("auto", "oracle", "balakrishnan", "dunford", "imaginary"))
    _add_quad(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("bip", help="bounded-imaginary-powers certificate")
    p.add_argument("matrix", help="matrix JSON, optionally with a 'structure' field")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-points", type=int, default=len(defaults.BIP_T_GRID))
    p.add_argument("--fitted", action="store_true", help="fit even when structure is given")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bip)

    p = sub.add_parser("heinz-kato", help="check the inequality on an instance")
    _add_instance(p)
    _add_quad(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_heinz_kato)

    p = sub.add_parser("gen", help="emit a generated instance bundle")
    p.add_argument("--gen", nargs="*", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trace", help="three-lines proof-function trace")
    _add_instance(p)
    _add_quad(p)
    p.add_argument("--pairs", type=int, default=10, help="random (u, v) pairs")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-points", type=int, default=len(defaults.TRACE_T_GRID))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_trace)
    return parser


def _thread_limit():
    cap = os.environ.get("HK_THREADS")
    if not cap:
        return None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(int(cap))


def main(argv=None):
    args = build_parser().parse_args(argv)
    limiter = _thread_limit()
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResolventSingular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except StructureUnknown as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (PreconditionError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    sys.exit(main())
