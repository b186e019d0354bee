"""Command-line front end.

    aggbounds bounds   --groups groups.csv --marginals marginals.csv --contrast "cell(1) - cell(0)"
    aggbounds frechet  ...
    aggbounds ci       ... --alpha 0.05
    aggbounds simulate --preset 1 --reps 100
    aggbounds oracle   ...

Every option can also come from a JSON config (``--config``); flags given on
the command line win.  Exit status is 0 on success, 2 for bad input and 3
for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
import warnings
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import SearchOptions, identified_set, joint_known_range
from .core import (AggregateDataset, CovariateSupport, FinerMoment, GroupRecord, OutcomeRange,
                   ShapeConstraintSet, UnknownPointError, flat_index, monotone_constraints,
                   validate_dataset, weight_vector)
from .feasible import EmptyFeasibleSetError, InconsistentMarginalsWarning
from .frechet import NonBinaryOutcomeError, frechet_identified_set
from .inference import MissingDataError, ci_identified_set
from .simlab import (DimensionTooLargeError, JointSpec, brute_force_bounds, consistency_study,
                     coverage_study, exercise_preset, population_dataset, white_gap)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
DATASET_FORMAT = "aggbounds.dataset"


class InputError(ValueError):
    """Bad files, flags or configuration."""


# ---------------------------------------------------------------------------
# reading and writing data


def _read_csv(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return [{(k or "").strip(): (v or "").strip() for k, v in r.items()} for r in rows]


def _need(row, key, path, kind=float):
    if key not in row or row[key] == "":
        raise InputError(f"{path}: missing column '{key}' in row {row}")
    try:
        return kind(row[key])
    except ValueError as exc:
        raise InputError(f"{path}: bad value for '{key}': {row[key]!r}") from exc


def _opt(row, key, kind=float):
    v = row.get(key, "")
    return kind(v) if v not in ("", None) else None


def read_support(path, names=None) -> CovariateSupport:
    rows = _read_csv(path)
    if not rows:
        raise InputError(f"{path}: no support points")
    cols = [c for c in rows[0] if c != "point_id"]
    if names:
        missing = [n for n in names if n not in cols]
        if missing:
            raise InputError(f"{path}: support lacks covariate columns {missing}")
        cols = list(names)
    pts = [tuple(_need(r, c, path) for c in cols) for r in rows]
    return CovariateSupport(pts, cols)


def read_dataset(groups_path, marginals_path, support_path=None, finer_path=None,
                 yrange: OutcomeRange | None = None, binary: bool = False) -> AggregateDataset:
    """Assemble a dataset from the CSV tables.

    Without a support table the support is the product of the covariate
    values seen in the marginals.  Group shares come from the counts unless
    a ``share`` column is present.
    """
    grows = _read_csv(groups_path)
    mrows = _read_csv(marginals_path)
    if not grows:
        raise InputError(f"{groups_path}: no groups")
    names: list[str] = []
    values: dict[str, set] = {}
    for r in mrows:
        cov = r.get("covariate", "")
        if not cov:
            raise InputError(f"{marginals_path}: row without covariate: {r}")
        if cov not in values:
            names.append(cov)
            values[cov] = set()
        values[cov].add(_need(r, "value", marginals_path))
    if support_path:
        support = read_support(support_path, names or None)
    else:
        if not names:
            raise InputError("no marginals and no support table")
        support = CovariateSupport.product([sorted(values[n]) for n in names], names)
    marg: dict[str, dict] = {}
    for r in mrows:
        gid = r.get("group_id", "")
        l = support.covariate_index(r["covariate"])
        v = _need(r, "value", marginals_path)
        if v not in support.per_covariate_values[l]:
            raise InputError(f"{marginals_path}: group {gid}, covariate {r['covariate']}: "
                             f"value {v:g} not in support")
        marg.setdefault(gid, {})[(l, v)] = _need(r, "prob", marginals_path)
    finer: dict[str, dict] = {}
    if finer_path:
        for r in _read_csv(finer_path):
            gid = r.get("group_id", "")
            l = support.covariate_index(r["covariate"])
            v = _need(r, "value", finer_path)
            finer.setdefault(gid, {})[(l, v)] = FinerMoment(
                _need(r, "y_mean", finer_path), _opt(r, "y_se"), _opt(r, "count", int))
    counts = [_opt(r, "count", int) for r in grows]
    shares = [_opt(r, "share") for r in grows]
    if all(s is not None for s in shares):
        pass
    elif all(c is not None for c in counts):
        tot = sum(counts)
        if tot <= 0:
            raise InputError(f"{groups_path}: counts must be positive")
        shares = [c / tot for c in counts]
    else:
        raise InputError(f"{groups_path}: every group needs a count (or a share column)")
    groups = []
    known = set()
    for r, c, s in zip(grows, counts, shares):
        gid = r.get("group_id", "")
        if not gid:
            raise InputError(f"{groups_path}: row without group_id")
        known.add(gid)
        if gid not in marg:
            raise InputError(f"{marginals_path}: no marginals for group {gid}")
        groups.append(GroupRecord(gid, s, _need(r, "y_mean", groups_path), marg[gid], c,
                                  _opt(r, "y_se"), finer.get(gid, {})))
    for gid in list(marg) + list(finer):
        if gid not in known:
            raise InputError(f"group {gid} appears in marginals/finer but not in {groups_path}")
    if yrange is None:
        yrange = OutcomeRange(0.0, 1.0)
    return AggregateDataset(support, yrange, tuple(groups), binary)


def dataset_to_dict(ds: AggregateDataset) -> dict:
    s = ds.support
    return {
        "format": DATASET_FORMAT, "version": 1,
        "covariates": list(s.names),
        "support": [list(pt) for pt in s.points],
        "range": [ds.range.y_lo, ds.range.y_hi],
        "binary": ds.binary,
        "groups": [{
            "group_id": g.group_id, "share": g.share, "y_mean": g.y_mean,
            "count": g.count, "y_se": g.y_se,
            "marginals": [[s.names[l], v, p] for (l, v), p in sorted(g.marginals.items())],
            "finer": [[s.names[l], v, f.y_mean, f.y_se, f.count]
                      for (l, v), f in sorted(g.finer.items())],
        } for g in ds.groups],
    }


def dataset_from_dict(d: dict) -> AggregateDataset:
    if d.get("format") != DATASET_FORMAT:
        raise InputError("not a dataset document")
    s = CovariateSupport([tuple(p) for p in d["support"]], d["covariates"])
    groups = []
    for g in d["groups"]:
        marg = {(s.covariate_index(n), float(v)): float(p) for n, v, p in g["marginals"]}
        fin = {(s.covariate_index(n), float(v)): FinerMoment(m, se, c)
               for n, v, m, se, c in g.get("finer", [])}
        groups.append(GroupRecord(g["group_id"], g["share"], g["y_mean"], marg, g.get("count"),
                                  g.get("y_se"), fin))
    return AggregateDataset(s, OutcomeRange(*d["range"]), tuple(groups), d.get("binary", False))


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o).__name__)


def write_csv(path, rows: list[dict]):
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


# ---------------------------------------------------------------------------
# weights and shape restrictions

_TERM = re.compile(r"\s*([+-])?\s*(\d*\.?\d+(?:[eE][+-]?\d+)?)?\s*\*?\s*cell\(([^)]*)\)\s*")


def parse_contrast(expr: str, support: CovariateSupport) -> np.ndarray:
    """Parse e.g. ``"cell(1,0,0) - cell(0,0,0)"`` or ``"cell(white=1, econ=0, ell=0)"``.

    Each term is an optional coefficient times ``cell(...)``; named
    arguments may be given in any order.
    """
    lam = np.zeros(support.K)
    pos = 0
    expr = expr.strip()
    if not expr:
        raise InputError("empty contrast expression")
    while pos < len(expr):
        m = _TERM.match(expr, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot parse contrast near {expr[pos:]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        args = [a.strip() for a in m.group(3).split(",") if a.strip()]
        if any("=" in a for a in args):
            vals = [None] * support.num_covariates
            for a in args:
                name, _, val = a.partition("=")
                vals[support.covariate_index(name.strip())] = float(val)
            if any(v is None for v in vals):
                raise InputError(f"cell({m.group(3)}) does not name every covariate")
        else:
            vals = [float(a) for a in args]
        try:
            lam[flat_index(support, vals)] += sign * coef
        except UnknownPointError as exc:
            raise InputError(f"cell({m.group(3)}) is not a support point") from exc
        pos = m.end()
    return lam


def parse_lambda(text: str, support: CovariateSupport) -> np.ndarray:
    try:
        vals = [float(x) for x in re.split(r"[,\s]+", text.strip()) if x]
    except ValueError as exc:
        raise InputError(f"bad --lambda value {text!r}") from exc
    return np.asarray(vals)


def load_shape(path, K: int) -> ShapeConstraintSet:
    """Shape rows from JSON ``{"S": [[...]], "a": [...]}`` or CSV ``s1..sK,a``."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        d = json.loads(p.read_text())
        per = {g: (np.array(v["S"]), np.array(v["a"])) for g, v in d.get("per_group", {}).items()}
        return ShapeConstraintSet(np.array(d["S"], float), np.array(d["a"], float), per)
    rows = _read_csv(path)
    if not rows:
        raise InputError(f"{path}: no shape rows")
    cols = [c for c in rows[0] if c != "a"]
    S = np.array([[float(r[c]) for c in cols] for r in rows])
    a = np.array([float(r["a"]) for r in rows])
    return ShapeConstraintSet(S, a)


def _parse_range(text) -> OutcomeRange:
    if isinstance(text, (list, tuple)):
        return OutcomeRange(float(text[0]), float(text[1]))
    try:
        lo, hi = str(text).split(":")
        return OutcomeRange(float(lo), float(hi))
    except ValueError as exc:
        raise InputError(f"--range expects LO:HI, got {text!r}") from exc


# ---------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "alpha": 0.05, "seed": 0, "starts": 32, "iters": 400, "tol": 1e-7,
    "use_finer": False, "binary": False, "range": None, "out": None, "format": "both",
    "monotone": [], "shape": None, "lambda": None, "contrast": None, "witnesses": False,
    "strict": False, "renormalize": False, "shares_known": False,
    "reps": 100, "n_per_group": 1300, "preset": None, "spec": None, "groups_limit": None,
    "ns": None, "grid_step": 0.01,
}


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(user) - set(DEFAULTS) - {"groups", "marginals", "support", "finer", "dataset"}
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    for k, v in vars(args).items():
        if v is not None and v is not False and v != []:
            cfg[k] = v
    return cfg


def _options(cfg) -> SearchOptions:
    return SearchOptions(n_random_starts=int(cfg["starts"]), max_iters_per_start=int(cfg["iters"]),
                         convergence_tol=float(cfg["tol"]), seed=int(cfg["seed"]),
                         strict=bool(cfg["strict"]))


def _dataset(cfg) -> AggregateDataset:
    yrange = _parse_range(cfg["range"]) if cfg["range"] is not None else None
    if cfg.get("dataset"):
        try:
            ds = dataset_from_dict(json.loads(Path(cfg["dataset"]).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"cannot read dataset {cfg['dataset']}: {exc}") from exc
        if yrange is not None or cfg["binary"]:
            ds = AggregateDataset(ds.support, yrange or ds.range, ds.groups,
                                  ds.binary or bool(cfg["binary"]))
    else:
        if not cfg.get("groups") or not cfg.get("marginals"):
            raise InputError("need --groups and --marginals (or --dataset)")
        ds = read_dataset(cfg["groups"], cfg["marginals"], cfg.get("support"), cfg.get("finer"),
                          yrange, bool(cfg["binary"]))
    ds, violations = validate_dataset(ds, renormalize=bool(cfg["renormalize"]))
    if violations:
        raise InputError("invalid dataset:\n" + "\n".join(f"  {v}" for v in violations))
    return ds


def _weights(cfg, support) -> np.ndarray:
    if cfg["lambda"] is not None and cfg["contrast"] is not None:
        raise InputError("give either --lambda or --contrast, not both")
    if cfg["contrast"] is not None:
        lam = parse_contrast(cfg["contrast"], support)
    elif cfg["lambda"] is not None:
        lam = (np.asarray(cfg["lambda"], float) if isinstance(cfg["lambda"], list)
               else parse_lambda(cfg["lambda"], support))
    else:
        raise InputError("weights required: --lambda or --contrast")
    try:
        return weight_vector(support, lam)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _shape(cfg, support):
    sets = []
    if cfg["shape"]:
        sets.append(load_shape(cfg["shape"], support.K))
    for item in cfg["monotone"] or []:
        cov, _, direction = str(item).partition(":")
        if direction not in ("inc", "dec"):
            raise InputError(f"--monotone expects COV:inc or COV:dec, got {item!r}")
        try:
            sets.append(monotone_constraints(support, cov, direction))
        except (KeyError, ValueError) as exc:
            raise InputError(f"--monotone {item}: {exc}") from exc
    if not sets:
        return None
    shape = sets[0] if len(sets) == 1 else ShapeConstraintSet.stack(*sets)
    try:
        shape.check(support.K)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return shape


def _emit(cfg, name, payload: dict, rows: list[dict]):
    out = cfg["out"]
    if out is None:
        json.dump(payload, sys.stdout, indent=2, default=_json_default)
        sys.stdout.write("\n")
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    if cfg["format"] in ("json", "both"):
        write_json(d / f"{name}.json", payload)
    if cfg["format"] in ("csv", "both"):
        write_csv(d / f"{name}.csv", rows)


# ---------------------------------------------------------------------------
# commands


def cmd_bounds(cfg) -> int:
    ds = _dataset(cfg)
    lam = _weights(cfg, ds.support)
    shape = _shape(cfg, ds.support)
    res = identified_set(ds, lam, shape, bool(cfg["use_finer"]), _options(cfg))
    rows = []
    per = []
    for g in res.per_group:
        rows.append({"group_id": g.group_id, "share": g.share, "lower": g.lower,
                     "upper": g.upper, "slack": g.slack})
        item = dict(rows[-1])
        if cfg["witnesses"]:
            for tag, w in (("witness_lower", g.witness_lower), ("witness_upper", g.witness_upper)):
                item[tag] = None if w is None else {"p": w.p, "c": w.c}
        per.append(item)
    rows.append({"group_id": "__aggregate__", "share": 1.0, "lower": res.lower,
                 "upper": res.upper, "slack": ""})
    payload = {"command": "bounds", "version": __version__, "lambda": lam,
               "aggregate": [res.lower, res.upper], "per_group": per,
               "shape_rows": 0 if shape is None else int(shape.S.shape[0]),
               "use_finer": bool(cfg["use_finer"]), "seed": int(cfg["seed"])}
    _emit(cfg, "bounds", payload, rows)
    return EXIT_OK


def cmd_frechet(cfg) -> int:
    ds = _dataset(cfg)
    if not ds.binary:
        raise InputError("Fréchet bounds need a binary outcome (--binary)")
    lam = _weights(cfg, ds.support)
    if cfg["shape"] or cfg["monotone"] or cfg["use_finer"]:
        print("warning: shape and finer restrictions are ignored by the Fréchet bounds, "
              "which therefore contain the identified set", file=sys.stderr)
    res = frechet_identified_set(ds, lam)
    rows = [{"group_id": g, "lower": lo, "upper": hi} for g, (lo, hi) in res.per_group.items()]
    rows.append({"group_id": "__aggregate__", "lower": res.lower, "upper": res.upper})
    payload = {"command": "frechet", "version": __version__, "lambda": lam,
               "aggregate": [res.lower, res.upper], "per_group": rows[:-1]}
    _emit(cfg, "frechet", payload, rows)
    return EXIT_OK


def cmd_ci(cfg) -> int:
    ds = _dataset(cfg)
    lam = _weights(cfg, ds.support)
    shape = _shape(cfg, ds.support)
    rep = ci_identified_set(ds, lam, float(cfg["alpha"]), shape, bool(cfg["use_finer"]),
                            _options(cfg), shares_known=bool(cfg["shares_known"]))
    payload = {"command": "ci", "version": __version__, "lambda": lam, **rep.to_dict()}
    rows = [vars(iv).copy() for iv in rep.intervals]
    _emit(cfg, "ci", payload, rows)
    if cfg["out"] is not None and cfg["format"] in ("csv", "both"):
        write_csv(Path(cfg["out"]) / "ci_groups.csv",
                  [{"group_id": g, "L_ci": lo, "U_ci": hi} for g, (lo, hi) in rep.per_group.items()])
    return EXIT_OK


def _spec(cfg) -> JointSpec:
    if cfg["spec"]:
        try:
            spec = JointSpec.load(cfg["spec"])
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read spec {cfg['spec']}: {exc}") from exc
    elif cfg["preset"] is not None:
        try:
            spec = exercise_preset(int(cfg["preset"]))
        except ValueError as exc:
            raise InputError(f"invalid preset {cfg['preset']!r}: choose 1, 2 or 3") from exc
    else:
        raise InputError("simulate needs --preset or --spec")
    G = cfg["groups_limit"]
    if G:
        G = int(G)
        spec = JointSpec(spec.support, spec.joints[:G], spec.cell_means[:G],
                         spec.shares[:G] / spec.shares[:G].sum(), spec.range, spec.binary,
                         spec.group_ids[:G], spec.finer, spec.meta)
    return spec


def cmd_simulate(cfg) -> int:
    spec = _spec(cfg)
    if cfg["lambda"] is None and cfg["contrast"] is None:
        lam = white_gap(spec.support)
    else:
        lam = _weights(cfg, spec.support)
    opts = _options(cfg)
    shape = _shape(cfg, spec.support)
    n = int(cfg["n_per_group"])
    pop = identified_set(population_dataset(spec, n), lam, shape, bool(cfg["use_finer"]), opts)
    res = coverage_study(spec, n, int(cfg["reps"]), float(cfg["alpha"]), lam, opts,
                         seed=int(cfg["seed"]), shares_known=not cfg.get("shares_estimated", False),
                         use_finer=bool(cfg["use_finer"]), shape=shape, population=pop)
    summary = {"command": "simulate", "version": __version__, "lambda": lam,
               "preset": cfg["preset"], "groups": spec.G, "n_per_group": n,
               "reps": int(cfg["reps"]), "alpha": float(cfg["alpha"]), "seed": int(cfg["seed"]),
               "population": list(res.population), "true_parameter": spec.population_parameter(lam),
               "coverage_rate": res.coverage_rate, "bound_error_stats": res.bound_error_stats}
    if cfg["ns"]:
        ns = [int(x) for x in str(cfg["ns"]).split(",")]
        cons = consistency_study(spec, ns, int(cfg["reps"]), lam, opts, int(cfg["seed"]), pop)
        summary["consistency"] = {str(k): {"median": v["median"], "max": v["max"]}
                                  for k, v in cons.items()}
    if cfg["out"] is None:
        json.dump(summary, sys.stdout, indent=2, default=_json_default)
        sys.stdout.write("\n")
    else:
        d = Path(cfg["out"])
        d.mkdir(parents=True, exist_ok=True)
        write_json(d / "summary.json", summary)
        write_csv(d / "reps.csv", res.reps)
    return EXIT_OK


def cmd_oracle(cfg) -> int:
    ds = _dataset(cfg)
    lam = _weights(cfg, ds.support)
    shape = _shape(cfg, ds.support)
    if ds.support.K > 8:
        raise InputError(f"oracle needs K <= 8, got {ds.support.K}")
    opts = _options(cfg)
    step = float(cfg["grid_step"])
    search = identified_set(ds, lam, shape, bool(cfg["use_finer"]), opts)
    rows = []
    for gi, g in enumerate(ds.groups):
        orc = brute_force_bounds(g, ds.support, lam, ds.range, step, shape, bool(cfg["use_finer"]))
        jk = joint_known_range(g, ds.support, lam, ds.range, opts, (gi,))
        sb = search[g.group_id]
        rows.append({"group_id": g.group_id, "search_lower": sb.lower, "search_upper": sb.upper,
                     "oracle_lower": orc.lower, "oracle_upper": orc.upper,
                     "L_range_min": jk.lower_range[0], "L_range_max": jk.lower_range[1],
                     "U_range_min": jk.upper_range[0], "U_range_max": jk.upper_range[1],
                     "max_abs_diff": max(abs(sb.lower - orc.lower), abs(sb.upper - orc.upper))})
    payload = {"command": "oracle", "version": __version__, "lambda": lam, "grid_step": step,
               "rows": rows}
    _emit(cfg, "oracle", payload, rows)
    if cfg["out"] is not None:
        for r in rows:
            print("{group_id}: search [{search_lower:.6f}, {search_upper:.6f}]  "
                  "oracle [{oracle_lower:.6f}, {oracle_upper:.6f}]  "
                  "L range [{L_range_min:.6f}, {L_range_max:.6f}]  "
                  "U range [{U_range_min:.6f}, {U_range_max:.6f}]".format(**r))
    return EXIT_OK


COMMANDS = OrderedDict([("bounds", cmd_bounds), ("frechet", cmd_frechet), ("ci", cmd_ci),
                        ("simulate", cmd_simulate), ("oracle", cmd_oracle)])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aggbounds", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config document")
        if name != "simulate":
            s.add_argument("--groups", help="groups.csv: group_id,count,y_mean[,y_se]")
            s.add_argument("--marginals", help="marginals.csv: group_id,covariate,value,prob")
            s.add_argument("--support", help="support.csv: point_id,<covariate columns>")
            s.add_argument("--finer", help="finer.csv: group_id,covariate,value,y_mean[,y_se],count")
            s.add_argument("--dataset", help="dataset JSON (alternative to the CSV tables)")
            s.add_argument("--renormalize", action="store_true",
                           help="rescale marginals and shares to sum to one")
        else:
            s.add_argument("--preset", type=int, help="exercise preset 1, 2 or 3")
            s.add_argument("--spec", help="joint-spec JSON file")
            s.add_argument("--reps", type=int)
            s.add_argument("--n-per-group", dest="n_per_group", type=int)
            s.add_argument("--groups-limit", dest="groups_limit", type=int,
                           help="use only the first G groups")
            s.add_argument("--ns", help="comma-separated sample sizes for a consistency study")
            s.add_argument("--shares-estimated", dest="shares_estimated", action="store_true",
                           help="use intervals for group shares instead of treating them as known")
        s.add_argument("--lambda", dest="lambda", help="comma-separated weights, one per support point")
        s.add_argument("--contrast", help='e.g. "cell(1,0,0) - cell(0,0,0)"')
        s.add_argument("--range", help="outcome range LO:HI (default 0:1)")
        s.add_argument("--binary", action="store_true", help="outcome is binary")
        s.add_argument("--alpha", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--starts", type=int, help="random starts per group")
        s.add_argument("--iters", type=int, help="Nelder-Mead iterations per start")
        s.add_argument("--tol", type=float, help="convergence tolerance")
        s.add_argument("--shape", help="shape rows S c <= a (CSV s1..sK,a or JSON)")
        s.add_argument("--monotone", action="append", default=[],
                       help="COV:inc or COV:dec (repeatable)")
        s.add_argument("--use-finer", dest="use_finer", action="store_true")
        s.add_argument("--shares-known", dest="shares_known", action="store_true")
        s.add_argument("--strict", action="store_true",
                       help="fail on marginals inconsistent with the support")
        s.add_argument("--witnesses", action="store_true", help="include witnesses in JSON output")
        s.add_argument("--grid-step", dest="grid_step", type=float)
        s.add_argument("--out", help="output directory (default: JSON on stdout)")
        s.add_argument("--format", choices=["csv", "json", "both"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("always", InconsistentMarginalsWarning)
            return COMMANDS[args.command](cfg)
    except (InputError, MissingDataError, NonBinaryOutcomeError, DimensionTooLargeError,
            EmptyFeasibleSetError, UnknownPointError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
