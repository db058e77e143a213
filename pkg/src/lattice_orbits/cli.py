"""Command-line interface. Every run prints one JSON document (or CSV with
commented JSON headers) that echoes the full run configuration."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath

from . import contfrac, dimension, flow, norms, section, synthesis
from .scalars import (PRECISION_ENV, QuadraticSurd, default_precision, number_to_json,
                      parse_number, parse_surd)

SCHEMA = "lattice-orbits/1"


class UsageError(ValueError):
    pass


# -- value helpers ------------------------------------------------------------

def approx(value, error) -> dict:
    """A float never travels alone: value plus an error bound."""
    return {"value": mpmath.nstr(mpmath.mpf(value), 17), "error_bound": mpmath.nstr(mpmath.mpf(error), 3)}


def exact_str(v) -> str:
    return str(v)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def parse_point(text: str) -> section.SectionPoint:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (2, 3):
        raise UsageError("a section point is x,y[,eps]")
    eps = int(parts[2]) if len(parts) == 3 else 1
    return section.SectionPoint(parse_number(parts[0]), parse_number(parts[1]), eps)


def parse_lattice(text: str) -> flow.PlanarLattice:
    kind, _, body = text.partition(":")
    if kind == "reconstruct":
        return section.reconstruct_lattice(parse_point(body))[0]
    if kind == "alpha":
        return flow.lattice_from_alpha(parse_number(body))
    if kind == "standard":
        return flow.PlanarLattice.standard()
    if kind == "basis":
        rows = [[parse_number(c) for c in r.split(",")] for r in body.split(";")]
        return flow.PlanarLattice(((rows[0][0], rows[0][1]), (rows[1][0], rows[1][1])), "cli")
    raise UsageError(f"unknown lattice spec {text!r}")


def parse_positions(text: str):
    return "cubic" if text == "cubic" else parse_int_list(text)


def parse_alpha(text: str, precision: int):
    """Numbers, or ``synth:x,y[,eps][:L]`` for a synthesized alpha."""
    if text.startswith("synth:"):
        body = text[len("synth:"):]
        point, _, L = body.partition(":")
        sa = synthesis.synthesize(parse_point(point), L=int(L or 2))
        return sa.to_mpf(precision + 64), sa
    return parse_number(text), None


def parse_t_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--t expects lo:hi:step")
    return tuple(parse_number(p) if ("/" in p or ":" in p) else mpmath.mpf(p) for p in parts)


def build_norm(args) -> norms.NormBody:
    if getattr(args, "norm_json", None):
        raw = args.norm_json
        obj = json.loads(open(raw).read() if os.path.exists(raw) else raw)
        return norms.norm_from_json(obj)
    kind = args.kind
    if kind == "pnorm":
        return norms.PNorm(args.p)
    return norms.norm_by_name(kind)


def optimizer_config(args) -> norms.OptimizerConfig:
    return norms.OptimizerConfig(grid=args.grid, iterations=args.iterations,
                                 restarts=args.restarts, seed=args.seed)


def prepared_norm(args) -> norms.NormBody:
    """The requested norm with critical data; conjugated when --conjugate-to is set."""
    base = build_norm(args)
    norms.critical_radius(base, optimizer_config(args))
    target = getattr(args, "conjugate_to", None)
    if not target:
        return base
    source = _locus_representative(base)
    g = norms.conjugating_element(source, parse_lattice(target))
    return norms.conjugate_norm(base, g)


def _locus_representative(base: norms.NormBody) -> flow.PlanarLattice:
    if base.kind == "polygon" and _is_regular_hexagon(base):
        return norms.hexagon_tiling_lattice()
    return base.critical.argmax


def _is_regular_hexagon(nm) -> bool:
    return nm.to_json() == norms.regular_hexagon().to_json()


# -- subcommands --------------------------------------------------------------

def cmd_cf(args) -> dict:
    if args.action == "expand":
        x = _cf_value(args)
        digits = contfrac.cf_digits(x, args.n)
        exp = contfrac.CFExpansion.of(x)
        return {"value": number_to_json(x), "digits": digits, "requested": args.n,
                "terminated": len(digits) < args.n, "source": exp.source,
                "preperiod": exp.preperiod, "period": exp.period}
    if args.action == "convergents":
        digits = parse_int_list(args.digits)
        pairs = contfrac.convergent_pairs(digits)[2:]
        return {"digits": digits, "convergents": [f"{p}/{q}" for p, q in pairs]}
    if args.action == "cylinder":
        c = contfrac.cylinder(parse_int_list(args.index))
        return {"index": list(c.index), "left": str(c.left), "right": str(c.right),
                "left_closed": c.left_closed, "right_closed": c.right_closed,
                "sigma": str(c.sigma), "length": str(c.length),
                "convergents": [str(c.prev), str(c.conv)]}
    if args.action == "remainder":
        x = _cf_value(args)
        rho, z = contfrac.remainder_and_z(x, args.n)
        return {"value": number_to_json(x), "n": args.n, "rho": number_to_json(rho),
                "z": number_to_json(z), "rho_text": str(rho), "z_text": str(z)}
    raise UsageError(args.action)


def _cf_value(args):
    if args.surd:
        return parse_surd(args.surd)
    if args.rational:
        return Fraction(args.rational)
    if args.value:
        return parse_number(args.value)
    raise UsageError("give --surd, --rational or --value")


def cmd_orbit(args) -> dict | tuple:
    prec = default_precision()
    if args.action == "scan":
        alpha, _ = parse_alpha(args.alpha, prec)
        nm = build_norm(args)
        lo, hi, step = parse_t_range(args.t)
        scan = flow.orbit_min_scan(flow.lattice_from_alpha(alpha), nm, lo, hi, step,
                                   refine=args.refine)
        summary = scan.summary()
        summary["inf_squared"] = approx(scan.inf ** 2, 2 * scan.inf * scan.error_bound + mpmath.mpf(2) ** -(prec - 8))
        summary["inf"] = approx(scan.inf, scan.error_bound + mpmath.mpf(2) ** -(prec - 8))
        summary["sup"] = approx(scan.sup, scan.error_bound + mpmath.mpf(2) ** -(prec - 8))
        if args.format == "csv":
            return summary, flow.samples_to_csv(scan.samples, prec)
        return summary
    if args.action == "chain":
        lat = parse_lattice(args.lattice)
        if args.lattice.startswith("reconstruct:"):
            pair = section.reconstruct_lattice(parse_point(args.lattice.split(":", 1)[1]))[1]
        else:
            pair = section.initial_pair(lat)
        pairs = section.chain(pair, args.depth)
        lines = section.chain_jsonl(pairs).splitlines()
        return {"depth": args.depth, "length": len(pairs), "terminal": pairs[-1].terminal,
                "points": [json.loads(l) for l in lines]}
    if args.action == "precompact":
        rep = section.precompact_test(parse_lattice(args.lattice), args.depth)
        return rep.to_json()
    raise UsageError(args.action)


def cmd_norm(args) -> dict:
    if args.action == "critical":
        nm = build_norm(args)
        data = norms.critical_radius(nm, optimizer_config(args))
        out = data.to_json()
        out["r_hat"] = approx(data.r_hat, data.error_bound)
        return out
    if args.action == "locus":
        nm = prepared_norm(args)
        locus = norms.locus_sample(nm, args.tol)
        return {"tol": args.tol, "count": len(locus),
                "cluster_diameter": approx(norms.cluster_diameter(locus), 1e-12),
                "samples": [L.to_json() for L in locus[: args.limit]]}
    if args.action == "di":
        nm = prepared_norm(args)
        alpha, sa = parse_alpha(args.alpha, default_precision())
        v = norms.di_test(alpha, nm, parse_number(args.t0), parse_number(args.tmax),
                          parse_number(args.step))
        out = v.to_json()
        out["alpha"] = number_to_json(alpha) if sa is None else {"synthesized": sa.plan.to_json()}
        return out
    if args.action == "conjugate":
        base = build_norm(args)
        norms.critical_radius(base, optimizer_config(args))
        target = parse_lattice(args.target)
        source = _locus_representative(base)
        g = norms.conjugating_element(source, target)
        conj = norms.conjugate_norm(base, g)
        mapped = g @ source
        rep = section.precompact_test(target, args.depth) if target.exact else None
        return {"g": [[number_to_json(e) for e in row] for row in g.matrix],
                "r_hat": approx(conj.critical.r_hat, conj.critical.error_bound),
                "locus_point_distance_to_target": approx(norms.lattice_distance(mapped, target), 1e-12),
                "lambda1_at_target": approx(flow.shortest_vector(target, conj).value,
                                            conj.critical.error_bound),
                "target_precompact": rep.to_json() if rep else None}
    raise UsageError(args.action)


def _plan_from(args) -> synthesis.SynthesizedAlpha:
    if getattr(args, "plan", None):
        obj = json.load(open(args.plan))
        cfg = obj["config"]
        return synthesis.synthesize(parse_point(cfg["target"]), L=cfg["L"],
                                    positions=parse_positions(cfg["positions"]),
                                    align=not cfg.get("no_align", False))
    return synthesis.synthesize(parse_point(args.target), L=args.L,
                                positions=parse_positions(args.positions), align=not args.no_align)


def cmd_construct(args) -> dict:
    sa = _plan_from(args)
    if args.action == "synthesize":
        K = args.K
        end = sa.plan.positions.span(K)[1]
        return {"alpha_digits_prefix": sa.prefix(max(end, args.prefix)),
                "positions": [sa.plan.positions.m(k) for k in range(1, K + 1)],
                "blocks": {str(k): {"span": list(sa.plan.positions.span(k)),
                                    "digits": list(sa.read_block(k))} for k in range(1, K + 1)},
                "plan": sa.plan.to_json(),
                "alpha": approx(sa.to_mpf(), mpmath.mpf(2) ** -default_precision())}
    if args.action == "verify":
        rep = synthesis.verify_limit_point(sa, args.checkpoints, args.tail)
        out = rep.to_json()
        if args.chain:
            cc = synthesis.chain_consistency(sa, args.checkpoints, args.tail)
            out["chain_consistency"] = {"ok": cc.ok, "checked": cc.checked,
                                        "mismatches": cc.mismatches}
        return out
    raise UsageError(args.action)


def cmd_dim(args) -> dict | tuple:
    positions = parse_positions(args.positions)
    if args.action == "bound":
        rep = dimension.dim_lower_bound(args.L, args.M, positions, args.mmax)
        out = rep.to_json()
        out["asymptotic_bound"] = approx(rep.asymptotic, 1e-15)
        out["running_max"] = approx(rep.running_max, 1e-12)
        out["finite_m_curve"] = [dict(r, value=approx(r["value"], 1e-12)) for r in rep.curve]
        if args.format == "csv":
            return {"asymptotic_bound": out["asymptotic_bound"]}, rep.to_csv()
        return out
    if args.action == "audit":
        blocks = None
        if args.target:
            sp = synthesis.align_target(parse_point(args.target))
            blocks = (contfrac.CFExpansion.of(sp.x), contfrac.CFExpansion.of(sp.y))
        if positions == "cubic" and blocks is None:
            positions = []
        rep = dimension.audit_family(args.L, args.M, blocks, positions, args.mmax,
                                     keep_families=False)
        return rep.to_json()
    raise UsageError(args.action)


# -- parser -------------------------------------------------------------------

def _add_norm_args(p, default="sup"):
    p.add_argument("--kind", default=default,
                   choices=["sup", "euclidean", "pnorm", "hexagon"])
    p.add_argument("--p", type=float, default=3.0, help="exponent for --kind pnorm")
    p.add_argument("--norm-json", help="norm definition as JSON text or a file path")
    p.add_argument("--grid", type=int, default=48)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--restarts", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lattice-orbits", description=__doc__)
    ap.add_argument("--precision", type=int, default=None, help="working precision in bits")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=["json", "csv", "text"], default="json")
    ap.add_argument("--output", help="write the result here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    cf = sub.add_parser("cf", help="continued fractions")
    cf.add_argument("action", choices=["expand", "convergents", "cylinder", "remainder"])
    cf.add_argument("--surd")
    cf.add_argument("--rational")
    cf.add_argument("--value")
    cf.add_argument("--n", type=int, default=10)
    cf.add_argument("--digits", default="")
    cf.add_argument("--index", default="")

    orb = sub.add_parser("orbit", help="orbit scans and section chains")
    orb.add_argument("action", choices=["scan", "chain", "precompact"])
    orb.add_argument("--alpha", default="phi")
    orb.add_argument("--norm", dest="kind", default="sup",
                     choices=["sup", "euclidean", "pnorm", "hexagon"])
    orb.add_argument("--p", type=float, default=3.0)
    orb.add_argument("--norm-json")
    orb.add_argument("--t", default="0:20:0.001")
    orb.add_argument("--refine", type=int, default=3)
    orb.add_argument("--lattice", default="reconstruct:phi,phi,+1")
    orb.add_argument("--depth", type=int, default=20)

    nm = sub.add_parser("norm", help="critical radii, loci and Dirichlet improvability")
    nm.add_argument("action", choices=["critical", "locus", "di", "conjugate"])
    _add_norm_args(nm)
    nm.add_argument("--tol", type=float, default=1e-3)
    nm.add_argument("--limit", type=int, default=50)
    nm.add_argument("--alpha", default="phi")
    nm.add_argument("--t0", default="5")
    nm.add_argument("--tmax", default="40")
    nm.add_argument("--step", default="1/1000")
    nm.add_argument("--conjugate-to", help="lattice spec the critical locus is moved to")
    nm.add_argument("--target", default="reconstruct:phi,phi,+1")
    nm.add_argument("--depth", type=int, default=100)

    con = sub.add_parser("construct", help="planted-block synthesis")
    con.add_argument("action", choices=["synthesize", "verify"])
    con.add_argument("--target", default="phi,phi,+1")
    con.add_argument("--L", type=int, default=2)
    con.add_argument("--K", type=int, default=6)
    con.add_argument("--positions", default="cubic")
    con.add_argument("--no-align", action="store_true")
    con.add_argument("--prefix", type=int, default=40)
    con.add_argument("--plan", help="JSON output of a previous synthesize run")
    con.add_argument("--checkpoints", type=int, default=6)
    con.add_argument("--tail", type=int, default=60)
    con.add_argument("--chain", action="store_true", help="also run the lattice-chain cross-check")

    dm = sub.add_parser("dim", help="Hausdorff dimension lower bounds")
    dm.add_argument("action", choices=["bound", "audit"])
    dm.add_argument("--L", type=int, default=10)
    dm.add_argument("--M", type=int, default=1)
    dm.add_argument("--positions", default="cubic")
    dm.add_argument("--mmax", type=int, default=200)
    dm.add_argument("--target", help="x,y[,eps] whose digits fill the blocks")
    return ap


COMMANDS = {"cf": cmd_cf, "orbit": cmd_orbit, "norm": cmd_norm,
            "construct": cmd_construct, "dim": cmd_dim}


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "output"}
    cfg["precision"] = default_precision()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    saved = os.environ.get(PRECISION_ENV)
    if args.precision is not None:
        os.environ[PRECISION_ENV] = str(args.precision)
    doc = {"schema": SCHEMA}
    table = None
    code = 0
    try:
        doc["config"] = _config(args)
        with mpmath.workprec(default_precision()):
            result = COMMANDS[args.command](args)
        if isinstance(result, tuple):
            result, table = result
        doc["result"] = result
    except (ValueError, ArithmeticError, RuntimeError, KeyError, OSError) as exc:
        doc.setdefault("config", {k: str(v) for k, v in vars(args).items()})
        doc["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 1
    finally:
        if saved is None:
            os.environ.pop(PRECISION_ENV, None)
        else:
            os.environ[PRECISION_ENV] = saved
    text = _render(doc, table, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return code


def _render(doc: dict, table: str | None, fmt: str) -> str:
    if fmt == "csv" and table is not None:
        head = "\n".join("# " + json.dumps({k: doc[k]}, default=str) for k in doc)
        return head + "\n" + table
    if fmt == "text":
        return _text(doc) + "\n"
    return json.dumps(doc, indent=2, default=str) + "\n"


def _text(doc: dict, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in doc.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {json.dumps(v, default=str)}")
    return "\n".join(lines)


if __name__ == "__main__":
    sys.exit(main())
