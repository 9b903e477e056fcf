"""Command-line entry point: ``taflab VERB [options]``, JSON in and out.

Exit codes: 0 success, 2 invalid input or failed validation, 3 when the
headline verdict could not be decided at the requested depth.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import schemas
from .chains import (
    Chain, ExtractionError, check_cmi_chain, check_condition_c_mi, check_mi_chain, chain_ideal_truncation,
    fit_chain, hasse_dot, mic_minimal_intervals,
)
from .distance import (
    FeasibilityError, ModulePattern, cor_6_3_check, matrix_from_json, matrix_to_json, maximal_rectangles,
    nearest_element, norm,
)
from .fdcore import (
    CapacityError, CoordinateError, DigraphAlgebra, DomainError, Ideal, MatrixUnit, ShapeError,
    enumerate_ideals, ideal_count, ideal_from_generators, is_meet_irreducible, minimal_excluded_generators,
)
from .nestrep import build_nest_rep, invariant_subspace_lattice, is_nest, kernel_truncation
from .spectrum import (
    Cocycle, DigitPoint, IntervalSpec, Point, UnsupportedOrderError, classify_theorem_3_1, displacement_cocycle,
    interval_ideal, interval_is_finite, interval_monotone, make_point_pair, order_compare, q_set,
    validate_cocycle,
)
from .tower import ArgumentError, DepthError, ValidationError, build_presentation

OK, INVALID, UNDECIDED = 0, 2, 3


class InputError(ValueError):
    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


# -- input -------------------------------------------------------------------------------

def _load_json(text_or_path: str):
    s = text_or_path.strip()
    if s.startswith("{") or s.startswith("["):
        return json.loads(s)
    return json.loads(Path(text_or_path).read_text())


def _check(data, schema, where=""):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        pointer = where + "/" + "/".join(str(p) for p in exc.absolute_path)
        raise InputError(f"{pointer}: {exc.message}", pointer) from None
    return data


def parse_presentation_file(path: str):
    """Read, schema-check and build a presentation."""
    return parse_presentation(_load_json(path))


def parse_presentation(data):
    _check(data, schemas.PRESENTATION)
    return build_presentation(data)


def _presentation(args, data=None):
    if args.pres:
        return parse_presentation_file(args.pres)
    if isinstance(data, dict) and "presentation" in data:
        _check(data["presentation"], schemas.PRESENTATION, "/presentation")
        return build_presentation(data["presentation"])
    raise InputError("no presentation given (use --pres or a 'presentation' key in --file)")


def _data(args, schema=None, required=True):
    if not args.file:
        if required:
            raise InputError("--file is required for this command")
        return None
    data = _load_json(args.file)
    if schema is not None:
        _check({k: v for k, v in data.items() if k != "presentation"}, schema)
    return data


def _chain(data) -> Chain:
    return Chain(int(data.get("start_level", 1)), tuple(MatrixUnit.parse(u) for u in data["units"]))


def _interval(pres, data) -> IntervalSpec:
    pair = make_point_pair(pres, _chain(data))
    return IntervalSpec(pair, bool(data.get("include_left", True)), bool(data.get("include_right", True)))


def _point(data):
    if "first" in data:
        return DigitPoint.from_json(data)
    return Point(tuple(MatrixUnit.parse(u) for u in data["units"]), int(data.get("start_level", 1)))


def _level(args, pres):
    if args.level is None:
        raise InputError("--level is required for this command")
    pres.check_level(args.level)
    return args.level


# -- report helpers ------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, MatrixUnit):
        return str(x)
    if isinstance(x, dict):
        return {str(_jsonable(k)): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _tribool(v):
    return _jsonable(v.to_json())


def _truncation(tr):
    return {"level": tr.level, "depth": tr.depth,
            "certified_out": sorted(str(u) for u in tr.certified_out),
            "certified_in": sorted(str(u) for u in tr.certified_in),
            "candidate_ideal": tr.candidate_ideal.to_json(),
            "verdicts": {str(u): _tribool(v) for u, v in sorted(tr.verdicts.items())}}


# -- verbs --------------------------------------------------------------------------------

def cmd_validate(args):
    data = _load_json(args.pres) if args.pres else _data(args)
    try:
        if isinstance(data, dict) and "presentation" in data and "builder" not in data and "levels" not in data:
            data = data["presentation"]
        pres = parse_presentation(data)
    except ValidationError as exc:
        return {"ok": False, "failures": [{"axiom": a, "witness": _jsonable(w)} for a, w in exc.failures]}, INVALID
    return {"ok": True, "failures": [], "levels": [list(a.summand_sizes) for a in pres.levels],
            "stationary_period": pres.stationary_period, "ordered": pres.ordered}, OK


def cmd_ideals(args):
    pres = _presentation(args, _data(args, required=False))
    k = _level(args, pres)
    alg = pres.algebra(k)
    if args.count:
        return {"level": k, "count": ideal_count(alg)}, OK
    ideals = [I.to_json() for I in enumerate_ideals(alg)]
    return {"level": k, "count": len(ideals), "ideals": ideals}, OK


def cmd_mi(args):
    data = _data(args, schemas.IDEAL_INPUT)
    pres = _presentation(args, data)
    k = _level(args, pres)
    alg = pres.algebra(k)
    if "ideal" in data:
        I = Ideal.from_json(alg, data["ideal"])
    else:
        I = ideal_from_generators(alg, [alg.check_unit(MatrixUnit.parse(u)) for u in data["generators"]])
    return {"level": k, "ideal": I.to_json(), "meet_irreducible": is_meet_irreducible(alg, I),
            "minimal_excluded": [str(u) for u in minimal_excluded_generators(alg, I)]}, OK


def cmd_chain(args):
    data = _data(args, schemas.CHAIN)
    pres = _presentation(args, data)
    ch = _chain(data)
    fit_chain(pres, ch)
    mi = check_mi_chain(pres, ch)
    cond = check_condition_c_mi(pres, ch, args.depth)
    out = {"mi_chain": bool(mi), "witness_level": mi.witness_level,
           "condition_c": str(cond), "condition_c_detail": _tribool(cond)}
    if args.level is not None:
        out["truncations"] = [_truncation(chain_ideal_truncation(pres, ch, args.level, args.depth,
                                                                 args.assume_stationary))]
    return out, OK


def cmd_cmi(args):
    data = _data(args, schemas.CHAIN)
    pres = _presentation(args, data)
    ch = _chain(data)
    fit_chain(pres, ch)
    v = check_cmi_chain(pres, ch, args.depth, args.assume_stationary)
    return {"cmi": str(v), "cmi_detail": _tribool(v)}, OK


def cmd_interval(args):
    data = _data(args, schemas.CHAIN)
    pres = _presentation(args, data)
    iv = _interval(pres, data)
    ch = iv.pair.chain
    depth = args.depth if args.depth is not None else ch.end_level
    levels = [args.level] if args.level is not None else list(range(ch.start_level, depth + 1))
    trs = [interval_ideal(pres, iv, k, depth, args.assume_stationary) for k in levels]
    return {"q_set": sorted(str(u) for u in q_set(pres, iv, levels[-1])),
            "truncations": [_truncation(t) for t in trs]}, OK


def cmd_classify(args):
    data = _data(args, schemas.POINTS)
    pres = _presentation(args, data)
    a, b = _point(data["a"]), _point(data["b"])
    c = classify_theorem_3_1(pres, a, b, args.depth)
    out = _jsonable(c.to_json())
    out["order"] = str(order_compare(pres, a, b, args.depth))
    return out, OK if c.certified else UNDECIDED


def cmd_nestrep(args):
    data = _data(args, schemas.CHAIN)
    pres = _presentation(args, data)
    k = _level(args, pres)
    iv = _interval(pres, data)
    rep = build_nest_rep(pres, iv, k)
    lat = invariant_subspace_lattice(rep)
    out = rep.to_json()
    out.update(lattice=[list(s) for s in lat], nest=is_nest(lat),
               kernel=kernel_truncation(rep, pres, iv, k, args.depth).to_json())
    return out, OK


def _random_trials(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        n = int(rng.integers(1, args.size + 1))
        T = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        sigma = ModulePattern(tuple(int(c) for c in np.sort(rng.integers(1, n + 2, size=n))))
        r = nearest_element(T, sigma, args.tol)
        worst = max(worst, abs(r.achieved - r.distance) / max(1.0, r.distance))
    return {"distance": 0.0, "rectangles": [],
            "trials": {"count": args.trials, "max_size": args.size, "worst_gap": worst, "seed": args.seed}}, OK


def cmd_distance(args):
    data = _data(args, schemas.DISTANCE_INPUT, required=False)
    if data is None:
        return _random_trials(args)
    raw = data["T"]
    several = bool(raw and raw[0] and raw[0][0]) and isinstance(raw[0][0][0], list)
    mats = [matrix_from_json(m) for m in raw] if several else [matrix_from_json(raw)]
    report = {}
    if "sigma" in data:
        pats = [ModulePattern(tuple(c)) for c in data["sigma"]]
    elif "J" in data:
        alg = DigraphAlgebra(tuple(m.shape[0] for m in mats))
        J = Ideal.from_json(alg, data["J"])
        pats = ModulePattern.from_ideal(J)
        rep = cor_6_3_check(alg, mats, J, args.tol)
        report["ideal_check"] = {"direct": rep.direct, "mi_sup": rep.mi_sup, "brute_sup": rep.brute_sup,
                                 "equal": rep.equal}
    else:
        raise InputError("distance input needs 'sigma' or 'J'", "/")
    rects = [{"summand": s, "rectangle": [i0, j0], "norm": norm(t[i0 - 1:, :j0])}
             for s, (t, p) in enumerate(zip(mats, pats), 1) for i0, j0 in maximal_rectangles(p)]
    near = nearest_element(mats, pats, args.tol)
    report.update(distance=near.distance, rectangles=rects,
                  nearest={"S": [matrix_to_json(S) for S in near.S], "achieved": near.achieved})
    return report, OK


def cmd_mic(args):
    pres = _presentation(args, _data(args, required=False))
    k = _level(args, pres)
    alg = pres.algebra(k)
    if args.dot:
        return hasse_dot(alg), OK
    found = mic_minimal_intervals(alg)
    return {"level": k, "pairs": len(found), "classes": len({m.cone_class for m in found}),
            "intervals": [{"lower": m.lower.to_json(), "upper": m.upper.to_json(), "class": m.cone_class,
                           "maximal": m.maximal} for m in found]}, OK


def cmd_cocycle(args):
    data = _data(args, schemas.COCYCLE_INPUT, required=False) or {}
    pres = _presentation(args, data)
    spec = data.get("cocycle", "displacement")
    c = displacement_cocycle(pres) if spec == "displacement" else Cocycle.from_json(spec)
    rep = validate_cocycle(pres, c, args.depth)
    out = {"ok": rep.ok, "failures": [{"axiom": a, "witness": w} for a, w in rep.failures]}
    if not rep.ok:
        return out, INVALID
    code = OK
    if "interval" in data:
        iv = _interval(pres, data["interval"])
        fin = interval_is_finite(pres, c, iv, args.depth, args.assume_stationary)
        out["finiteness"] = fin.to_json()
        out["monotone"] = interval_monotone(pres, iv, args.depth)
        if fin.verdict == "unknown":
            code = UNDECIDED
    return out, code


VERBS = {
    "validate": (cmd_validate, "check a presentation file"),
    "ideals": (cmd_ideals, "enumerate or count the ideals at a level"),
    "mi": (cmd_mi, "meet irreducibility of one ideal"),
    "chain": (cmd_chain, "check an MI chain and condition (C)"),
    "cmi": (cmd_cmi, "check the CMI condition of a chain"),
    "interval": (cmd_interval, "interval ideal truncations"),
    "classify": (cmd_classify, "classify the sigma/tau ideals of a point pair"),
    "nestrep": (cmd_nestrep, "finite nest representation of an interval"),
    "distance": (cmd_distance, "distance to a staircase module and a nearest element"),
    "mic": (cmd_mic, "minimal intervals of the ideal lattice"),
    "cocycle": (cmd_cocycle, "validate an integer cocycle"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for name, (_, helptext) in VERBS.items():
        p = sub.add_parser(name, help=helptext)
        if name == "chain":
            p.add_argument("action", nargs="?", choices=["check"], default="check")
        p.add_argument("--pres", help="presentation JSON file or inline JSON")
        p.add_argument("--file", help="command input JSON file or inline JSON")
        p.add_argument("--level", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--assume-stationary", action="store_true")
        if name == "ideals":
            p.add_argument("--count", action="store_true")
        if name == "mic":
            p.add_argument("--dot", action="store_true", help="emit the Hasse diagram in DOT")
        if name == "distance":
            p.add_argument("--trials", type=int, default=100, help="random trials when no --file is given")
            p.add_argument("--size", type=int, default=8)
    return parser


ERRORS = (ValidationError, InputError, CoordinateError, ShapeError, DepthError, ArgumentError, DomainError,
          CapacityError, FeasibilityError, UnsupportedOrderError, ExtractionError, json.JSONDecodeError,
          OSError, KeyError)


def run(argv=None) -> tuple[object, int]:
    args = build_parser().parse_args(argv)
    func = VERBS[args.verb][0]
    try:
        return func(args)
    except ERRORS as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, InputError):
            report["pointer"] = exc.pointer
        if isinstance(exc, ValidationError):
            report["failures"] = [{"axiom": a, "witness": _jsonable(w)} for a, w in exc.failures]
        if isinstance(exc, ExtractionError):
            report["state"] = _jsonable(exc.state)
        return report, INVALID


def main(argv=None) -> int:
    report, code = run(argv)
    if isinstance(report, str):
        print(report)
    else:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
