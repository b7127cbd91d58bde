"""Command-line interface.

Every subcommand prints (or writes to --out) one JSON document.  When --out
is given a run manifest is written next to it as <out>.manifest.json.
Exit status: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .boundary import cocycle_check, cylinder, cylinder_measure, extend_along, m_vector, partition_check, rn_from_m
from .counting import freeness_bound, sphere_size, triangle_count, wall_triangle_count
from .dynamics import (
    classify,
    generator_rn_census,
    phi_construct,
    ratio_descriptor,
    transitivity_witnesses,
    triangle_census,
    verify_pieces,
)
from .errors import (
    AtildeError,
    BudgetExceeded,
    ConfigurationError,
    DepthError,
    RangeError,
    UsageError,
)
from .pgeom import VectorGeometry, annihilator_duality
from .tripres import (
    find_presentation,
    load_presentation,
    save_presentation,
    search_presentations,
    validate_presentation,
)
from .wordcore import build_ball, format_word, group, load_ball, parse_word, save_ball


class CheckFailed(AtildeError):
    """A computed check did not hold; the message names the report section."""


def to_json(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_json(v) for v in items]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def dumps(doc) -> str:
    return json.dumps(to_json(doc), indent=1, sort_keys=True) + "\n"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _shape_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _word_arg(text: str):
    try:
        return parse_word(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--presentation", metavar="FILE", help="presentation JSON file")
    p.add_argument("--ball", metavar="FILE", help="ball file built by 'ball build'")
    p.add_argument("--radius", type=int, help="ball radius")
    p.add_argument("--n", type=int, help="rank of the building")
    p.add_argument("--q", type=int, help="order of the building")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--max-vertices", type=int, default=10_000_000)
    p.add_argument("--out", metavar="PATH", help="write the JSON result here")
    p.add_argument("--timing", action="store_true", help="record wall time in the manifest")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="atilde", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    tp = sub.add_parser("tripres", help="triangle presentations")
    tsub = tp.add_subparsers(dest="action", required=True)
    tsub.add_parser("validate", parents=[common], help="check the five axioms")
    s = tsub.add_parser("search", parents=[common], help="search for presentations")
    s.add_argument("--limit", type=int, default=1)
    s.add_argument("--node-budget", type=int, default=1_000_000)
    s.add_argument("--duality", choices=["auto", "annihilator"], default="auto")

    bp = sub.add_parser("ball", help="Cayley balls")
    bsub = bp.add_subparsers(dest="action", required=True)
    bsub.add_parser("build", parents=[common], help="build and save a ball")

    sp = sub.add_parser("sphere", help="sphere tables")
    ssub = sp.add_subparsers(dest="action", required=True)
    c = ssub.add_parser("census", parents=[common], help="formula vs enumeration")
    c.add_argument("--max-norm", type=int, required=True)

    m = sub.add_parser("measure", parents=[common], help="cylinder measure or partition check")
    m.add_argument("--base", type=_word_arg, default=())
    m.add_argument("--target", type=_word_arg)
    m.add_argument("--k", type=_shape_arg, help="partition S_k(base) instead")

    r = sub.add_parser("rn", parents=[common], help="displacement vector and RN derivative")
    r.add_argument("--x", type=_word_arg, default=())
    r.add_argument("--y", type=_word_arg)
    r.add_argument("--z", type=_word_arg)
    r.add_argument("--census", action="store_true", help="generator census and exponent scan")
    r.add_argument("--cocycle", action="store_true", help="cocycle check over the radius-2 ball")

    p = sub.add_parser("phi", parents=[common], help="piecewise full-group map")
    p.add_argument("--x", type=_word_arg, required=True)
    p.add_argument("--y", type=_word_arg, required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--sample", type=int, default=10, help="pieces to list in the output")

    w = sub.add_parser("witnesses", parents=[common], help="transitivity witnesses on S_k")
    w.add_argument("--k", type=_shape_arg, required=True)
    w.add_argument("--levels", type=int, default=3)

    sub.add_parser("ratio-set", parents=[common], help="ratio set and lambda")

    cl = sub.add_parser("classify", parents=[common], help="type certificate")
    cl.add_argument("--levels", type=int, default=1)

    t = sub.add_parser("triangles", parents=[common], help="apex triangle census")
    t.add_argument("--m", type=int, required=True)
    t.add_argument("--method", choices=["grow", "project"], default="grow")

    f = sub.add_parser("freeness-bound", parents=[common], help="wall-triangle bound table")
    f.add_argument("--m", type=int, required=True, help="largest triangle size")
    return ap


# -- helpers -------------------------------------------------------------------


def _need(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise UsageError(f"--{name} is required for this command")


def _group(args):
    _need(args, "presentation")
    return group(load_presentation(args.presentation))


def _ball(args, G, radius: int):
    if args.ball:
        B = load_ball(args.ball, G)
        if B.radius < radius:
            raise RangeError(f"--ball has radius {B.radius}, this command needs {radius}")
        return B
    return build_ball(G, max(radius, args.radius or 0), args.max_vertices)


def _inputs(args) -> dict:
    out = {}
    for key in ("presentation", "ball"):
        path = getattr(args, key, None)
        if path:
            out[key] = _sha256(path)
    return out


# -- commands --------------------------------------------------------------------


def cmd_tripres(args):
    if args.action == "validate":
        P = load_presentation(args.presentation) if args.presentation else None
        if P is None:
            raise UsageError("--presentation is required for this command")
        rep = validate_presentation(P)
        doc = rep.summary()
        doc["digest"] = P.digest()
        return doc, rep.valid, "axioms"
    _need(args, "n", "q")
    G = VectorGeometry(args.n, args.q)
    stats: dict = {}
    if args.duality == "annihilator":
        found = search_presentations(G, annihilator_duality(G), args.limit, args.seed, args.node_budget, stats)
    else:
        found = find_presentation(G, args.limit, args.seed, args.node_budget, stats)
    files = []
    if args.out:
        base = Path(args.out)
        for i, P in enumerate(found):
            path = base if i == 0 else base.with_name(f"{base.stem}.{i + 1}{base.suffix}")
            save_presentation(P, path, {"seed": args.seed, "n": args.n, "q": args.q})
            files.append(str(path))
    doc = {
        "n": args.n,
        "q": args.q,
        "seed": args.seed,
        "found": len(found),
        "stats": stats,
        "digests": [P.digest() for P in found],
        "valid": [validate_presentation(P).valid for P in found],
        "files": files,
    }
    return doc, all(doc["valid"]), "search", True


def cmd_ball(args):
    G = _group(args)
    _need(args, "radius", "out")
    B = build_ball(G, args.radius, args.max_vertices)
    save_ball(B, args.out)
    doc = {"radius": B.radius, "vertices": len(B), "per_radius": B.radius_counts(), "digest": B.digest()}
    return doc, True, "ball", True


def cmd_sphere(args):
    M = args.max_norm
    if M < 0:
        raise UsageError("--max-norm must be non-negative")
    if args.presentation:
        G = _group(args)
        n, q = G.n, G.q
        B = _ball(args, G, M)
    else:
        _need(args, "n", "q")
        n, q, B = args.n, args.q, None
    rows = []
    for r in range(M + 1):
        for k in itertools.product(range(r + 1), repeat=n):
            if sum(k) != r:
                continue
            formula = sphere_size(k, n, q)
            counted = len(B.sphere(k)) if B else None
            rows.append({"k": k, "formula": formula, "enumerated": counted,
                         "match": None if B is None else counted == formula})
    ok = all(row["match"] is not False for row in rows)
    return {"n": n, "q": q, "rows": rows, "all_match": ok}, ok, "rows"


def cmd_measure(args):
    G = _group(args)
    if args.k is not None:
        rep = partition_check(G, args.base, args.k)
        return rep, rep["ok"], "partition"
    if args.target is None:
        raise UsageError("--target or --k is required")
    c = cylinder(G, args.base, args.target)
    doc = {"base": format_word(c.base), "target": format_word(c.target), "shape": c.shape,
           "measure": cylinder_measure(c, G)}
    return doc, True, "measure"


def cmd_rn(args):
    G = _group(args)
    if args.census:
        B = _ball(args, G, 3)
        doc = generator_rn_census(G, B)
        return doc, doc["generators_ok"], "generators"
    if args.cocycle:
        B = _ball(args, G, 2)
        verts = [w for w in B.words if len(w) <= 2]
        z = extend_along(G, (), (), (7,) * G.n)
        z2 = extend_along(G, (), z, (1,) * G.n)
        doc = cocycle_check(G, verts, z, z2)
        doc["failures"] = [[format_word(w) for w in t] for t in doc["failures"]]
        return doc, doc["ok"], "cocycle"
    if args.y is None or args.z is None:
        raise UsageError("--y and --z are required (or use --census / --cocycle)")
    m = m_vector(G, args.x, args.y, args.z)
    doc = {"x": format_word(args.x), "y": format_word(args.y), "z": format_word(args.z),
           "m": m, "rn": rn_from_m(m, G.n, G.q)}
    return doc, True, "rn"


def cmd_phi(args):
    G = _group(args)
    B = load_ball(args.ball, G) if args.ball else None
    pm = phi_construct(G, args.x, args.y, args.levels, B, args.threads)
    doc = pm.summary()
    doc["x"], doc["y"] = format_word(pm.x), format_word(pm.y)
    doc["reference_check"] = verify_pieces(G, pm, max(1, len(pm) // 997))
    doc["sample"] = [
        {"source": format_word(s), "mover": format_word(mv), "target": format_word(t)}
        for s, mv, t in (pm.piece(i) for i in range(min(args.sample, len(pm))))
    ]
    ok = pm.ok and doc["reference_check"]["ok"]
    return doc, ok, "checks"


def cmd_witnesses(args):
    G = _group(args)
    B = load_ball(args.ball, G) if args.ball else None
    doc = transitivity_witnesses(G, args.k, args.levels, B, args.threads)
    for row in doc["witnesses"]:
        row["x"], row["y"] = format_word(row["x"]), format_word(row["y"])
    return doc, doc["ok"], "witnesses"


def cmd_ratio(args):
    _need(args, "n", "q")
    return ratio_descriptor(args.n, args.q).to_dict(), True, "descriptor"


def cmd_classify(args):
    if args.presentation:
        G = _group(args)
        B = _ball(args, G, 3)
        cert = classify(G, B, levels=args.levels, threads=args.threads)
    else:
        _need(args, "n", "q")
        cert = classify(n=args.n, q=args.q)
    return cert, cert["status"] == "PASSED", "sections"


def cmd_triangles(args):
    if args.presentation:
        G = _group(args)
        radius = args.m if args.method == "grow" else 2 * args.m
        B = _ball(args, G, radius)
        counted = triangle_census(G, B, args.m, args.method)
        q = G.q
    else:
        _need(args, "q")
        counted, q = None, args.q
    formula = triangle_count(args.m, q)
    doc = {"m": args.m, "q": q, "formula": formula, "enumerated": counted, "method": args.method,
           "match": None if counted is None else counted == formula}
    return doc, doc["match"] is not False, "match"


def cmd_freeness(args):
    _need(args, "q")
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    rows = []
    for m in range(1, args.m + 1):
        b = freeness_bound(m, args.q)
        row = {"m": m, "wall_triangles": wall_triangle_count(m, args.q),
               "triangles": triangle_count(m, args.q), "bound": b}
        if m > 1:
            row["ratio_to_previous"] = b / rows[-1]["bound"]
        rows.append(row)
    expected = Fraction(1, args.q**2)
    ok = all(r.get("ratio_to_previous", expected) == expected for r in rows)
    return {"q": args.q, "rows": rows, "step_ratio": expected, "decreasing": ok}, ok, "rows"


COMMANDS = {
    "tripres": cmd_tripres,
    "ball": cmd_ball,
    "sphere": cmd_sphere,
    "measure": cmd_measure,
    "rn": cmd_rn,
    "phi": cmd_phi,
    "witnesses": cmd_witnesses,
    "ratio-set": cmd_ratio,
    "classify": cmd_classify,
    "triangles": cmd_triangles,
    "freeness-bound": cmd_freeness,
}


def _manifest(args, argv, inputs, elapsed) -> dict:
    doc = {
        "command": [a for a in argv],
        "inputs": inputs,
        "seed": args.seed,
        "threads": args.threads,
        "versions": {"atilde": __version__, "python": platform.python_version()},
    }
    if args.timing:
        doc["milliseconds"] = int(elapsed * 1000)
    return doc


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        inputs = _inputs(args)
        res = COMMANDS[args.command](args)
        doc, ok, section = res[0], res[1], res[2]
        out_is_artifact = len(res) > 3
    except (UsageError, RangeError, DepthError, ConfigurationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"check failed [budget]: {exc} (high-water {exc.high_water})", file=sys.stderr)
        return 1
    except AtildeError as exc:
        print(f"check failed [consistency]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    text = dumps(doc)
    if args.out and not out_is_artifact:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.out:
        Path(str(args.out) + ".manifest.json").write_text(dumps(_manifest(args, argv, inputs, elapsed)))
    if not ok:
        print(f"check failed: see section '{section}' of the report", file=sys.stderr)
        return 1
    return 0
