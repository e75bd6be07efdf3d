"""Command-line driver: ``quadpcp <command> [options]``.

Every command writes deterministic JSON (sorted keys, no timestamps) and
embeds the SHA-256 of the files it read.  Exit status is 0 on success, 1 if
a checked invariant fails, and 2 on usage errors or refused sizes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from quadpcp.labelcover import (
    PlantedLabeling,
    compute_parameters,
    generate_yes_instance,
    instance_from_dict,
    instance_to_dict,
    verify_labeling,
)
from quadpcp.gf2 import BitVector
from quadpcp.quadcode import FoldedColoring, check_folding_support, folding_spaces
from quadpcp.verifier import Hypergraph, LimitExceeded, Limits, build_hypergraph, completeness_check

OUT_ENV = "QUADPCP_OUT"
SCHEMA_LABELING = "quadpcp/labeling/1"
SCHEMA_COLORING = "quadpcp/coloring/1"


class UsageError(Exception):
    pass


# ---------- file helpers


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV, "."))


def _dump(obj, path: Path | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _load(path: str) -> tuple[dict, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _instance(path: str):
    d, digest = _load(path)
    try:
        inst, planted = instance_from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed instance {path}: {exc}") from exc
    return inst, planted, digest


def _instance_seed(path: str):
    d, _ = _load(path)
    return (d.get("provenance") or {}).get("seed")


def _default_labeling(args, planted, instance_hash):
    """``--labeling``, else one embedded in the instance, else ``labeling.json`` beside it."""
    if args.labeling:
        d, h = _load(args.labeling)
        return labeling_from_dict(d), h
    if planted is not None:
        return planted, instance_hash
    sibling = Path(args.instance).with_name("labeling.json")
    if sibling.exists():
        d, h = _load(str(sibling))
        return labeling_from_dict(d), h
    raise UsageError("no labeling given and none found next to the instance")


def labeling_to_dict(lab: PlantedLabeling) -> dict:
    return {"schema": SCHEMA_LABELING, "x": [x.to_list() for x in lab.x], "y": [y.to_list() for y in lab.y]}


def labeling_from_dict(d: dict) -> PlantedLabeling:
    if d.get("schema") != SCHEMA_LABELING:
        raise UsageError(f"unsupported labeling schema {d.get('schema')!r}")
    return PlantedLabeling(tuple(BitVector.from_list(x) for x in d["x"]), tuple(BitVector.from_list(y) for y in d["y"]))


def coloring_to_dict(col: FoldedColoring, folded: bool = True) -> dict:
    return {
        "schema": SCHEMA_COLORING,
        "mode": col.mode,
        "folded": folded,
        "tables": {str(v): [int(c) for c in t] for v, t in enumerate(col.tables)},
    }


def coloring_from_dict(d: dict, inst) -> tuple[FoldedColoring, bool]:
    """The coloring and whether it was stored as a folded (per-coset) table."""
    if d.get("schema") != SCHEMA_COLORING:
        raise UsageError(f"unsupported coloring schema {d.get('schema')!r}")
    sp = folding_spaces(inst)
    tables = [d["tables"][str(v)] for v in range(inst.n_v)]
    mode = int(d.get("mode", 28))
    if d.get("folded", True):
        try:
            return FoldedColoring.from_tables(mode, sp, tables), True
        except ValueError as exc:
            raise UsageError(f"coloring does not fit the instance: {exc}") from exc
    if mode != 28:
        raise UsageError("unfolded tables are only supported for the 8-query mode")
    return FoldedColoring.unfolded(sp, [np.asarray(t) for t in tables]), False


def _exact(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator, "float": float(q)}


# ---------- commands


def cmd_gen_yes(args) -> int:
    if not 1 <= args.r <= args.m:
        raise UsageError(f"need 1 <= r <= m, got r={args.r}, m={args.m}")
    inst, lab = generate_yes_instance(
        args.m, args.r, args.n_u, args.n_v, args.degree, args.constraints, seed=args.seed, k=args.k
    )
    out = _out_dir(args)
    d = instance_to_dict(inst)
    d["provenance"] = {"seed": args.seed, "generator": "yes"}
    _dump(d, out / "instance.json")
    _dump(labeling_to_dict(lab), out / "labeling.json")
    print(f"wrote {out / 'instance.json'} and {out / 'labeling.json'}")
    return 0


def cmd_check(args) -> int:
    inst, planted, ih = _instance(args.instance)
    lab, lh = _default_labeling(args, planted, ih)
    rep = verify_labeling(inst, lab)
    res = {
        "schema": "quadpcp/check/1",
        "provenance": {"instance_sha256": ih, "labeling_sha256": lh},
        "satisfied_fraction": _exact(rep.satisfied_fraction),
        "unsatisfied_edges": rep.unsatisfied_edges,
        "last_coordinate_violations": rep.last_coordinate_violations,
        "constraint_violations": rep.constraint_violations,
        "labeling_ok": rep.ok,
    }
    ok = rep.ok
    if ok:
        for mode in args.mode:
            c = completeness_check(inst, lab, mode)
            res[f"completeness_{mode}"] = {
                "acceptance": _exact(c.acceptance),
                "value_table_ok": c.value_table_ok,
            }
            ok = ok and c.acceptance == 1 and c.value_table_ok
    res["ok"] = ok
    _dump(res, Path(args.out_file) if args.out_file else None)
    return 0 if ok else 1


def cmd_color(args) -> int:
    inst, planted, ih = _instance(args.instance)
    sp = folding_spaces(inst)
    folded = True
    if args.kind in ("honest", "class"):
        lab, _ = _default_labeling(args, planted, ih)
        col = FoldedColoring.honest(args.mode, sp, lab)
        if args.kind == "class":
            col = col.indicator(args.color)
    elif args.kind == "random":
        col = FoldedColoring.random(args.mode, sp, np.random.default_rng(args.seed), p=args.density)
    elif args.kind == "constant":
        col = FoldedColoring.constant(args.mode, sp, args.color)
    else:  # unfolded negative control
        rng = np.random.default_rng(args.seed)
        col = FoldedColoring.unfolded(sp, [rng.integers(0, 2, size=1 << (inst.m * inst.m)) for _ in range(inst.n_v)])
        folded = False
    _dump(coloring_to_dict(col, folded), Path(args.out_file) if args.out_file else None)
    return 0


def cmd_reduce(args) -> int:
    inst, _, ih = _instance(args.instance)
    limits = Limits(max_pairs=args.max_pairs)
    h = build_hypergraph(inst, args.mode, limits, minimal=args.minimal)
    seed = args.seed if args.seed is not None else _instance_seed(args.instance)
    h.provenance = {"instance_sha256": ih, "mode": args.mode, "minimal": args.minimal, "seed": seed}
    _dump(h.to_dict(), Path(args.out_file) if args.out_file else _out_dir(args) / f"hypergraph_{args.mode}.json")
    return 0


def cmd_analyze(args) -> int:
    from quadpcp.fourier import decompose_theta

    inst, _, ih = _instance(args.instance)
    d, ch = _load(args.coloring)
    col, folded = coloring_from_dict(d, inst)
    support = [check_folding_support(col, v) for v in range(inst.n_v)]
    res = {
        "schema": "quadpcp/analysis/1",
        "provenance": {"instance_sha256": ih, "coloring_sha256": ch, "k": args.k},
        "folding_support": {str(v): ok for v, ok in enumerate(support)},
    }
    ok = all(support)
    if ok:
        if not col.is_indicator:
            raise UsageError("the split is defined for 0/1 colorings; extract a class with `color --kind class`")
        rep = decompose_theta(inst, col, args.k)
        res["report"] = rep.to_dict()
        ok = rep.ok
    res["ok"] = ok
    _dump(res, Path(args.out_file) if args.out_file else None)
    return 0 if ok else 1


def cmd_params(args) -> int:
    try:
        p = compute_parameters(args.log2_n, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = {
        "schema": "quadpcp/params/1",
        "log2_N": p.log2_N,
        "epsilon": p.epsilon,
        "k": p.k,
        "log2_delta": p.log2_delta,
        "m_bound": p.m_bound,
        "log2_n_bound": p.log2_n_bound,
        "log2_s_bound": p.log2_s_bound,
        "lemma_consistent": p.lemma_consistent(),
        "outer_pcp_bounds": p.outer_pcp_bounds(),
    }
    _dump(res, Path(args.out_file) if args.out_file else None)
    return 0


def cmd_solve(args) -> int:
    from quadpcp.oracle import is_proper_coloring, solve

    d, hh = _load(args.hypergraph)
    try:
        h = Hypergraph.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed hypergraph: {exc}") from exc
    res = solve(h, qs=tuple(args.q), is_cap=args.is_cap, color_cap=args.color_cap)
    out = res.to_dict()
    out["provenance"] = {"hypergraph_sha256": hh}
    ok = True
    if args.coloring:
        cd, chash = _load(args.coloring)
        tables = cd["tables"]
        colors = [tables[str(v)][idx] for v, idx in h.vertices]
        valid = is_proper_coloring(h.edge_list(), colors)
        out["coloring_check"] = {"coloring_sha256": chash, "proper": valid}
        ok = valid
    _dump(out, Path(args.out_file) if args.out_file else None)
    return 0 if ok else 1


def cmd_run_all(args) -> int:
    from quadpcp.acceptance import run_all

    results = run_all(echo=print)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


# ---------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadpcp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        if out:
            sp.add_argument("--out-file", help="write JSON here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gen-yes", help="generate a YES instance and its planted labeling")
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--r", type=int, default=1)
    g.add_argument("--n-u", type=int, default=3)
    g.add_argument("--n-v", type=int, default=3)
    g.add_argument("--degree", type=int, default=2)
    g.add_argument("--constraints", type=int, default=1)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    common(g, out=False)
    g.set_defaults(func=cmd_gen_yes)

    c = sub.add_parser("check", help="verify a labeling and the honest coloring's acceptance")
    c.add_argument("--instance", required=True)
    c.add_argument("--labeling")
    c.add_argument("--mode", type=int, choices=(28, 44), nargs="*", default=[28, 44])
    common(c)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("color", help="write a coloring file")
    k.add_argument("--instance", required=True)
    k.add_argument("--labeling")
    k.add_argument("--kind", choices=("honest", "class", "random", "constant", "unfolded"), default="honest")
    k.add_argument("--mode", type=int, choices=(28, 44), default=28)
    k.add_argument("--color", type=int, default=0)
    k.add_argument("--density", type=float, default=0.5)
    common(k)
    k.set_defaults(func=cmd_color)

    r = sub.add_parser("reduce", help="materialize the hypergraph of a test")
    r.add_argument("--instance", required=True)
    r.add_argument("--mode", type=int, choices=(28, 44), default=28)
    r.add_argument("--minimal", action="store_true", help="keep only inclusion-minimal edges")
    r.add_argument("--max-pairs", type=int, default=Limits.max_pairs)
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    r.add_argument("--out-file", help="write JSON here instead of the output directory")
    r.add_argument("--seed", type=int, help="recorded in the provenance (default: the instance's seed)")
    r.set_defaults(func=cmd_reduce)

    a = sub.add_parser("analyze", help="split theta for a 0/1 coloring and check every bound")
    a.add_argument("--instance", required=True)
    a.add_argument("--coloring", required=True)
    a.add_argument("--k", type=int, default=1)
    common(a)
    a.set_defaults(func=cmd_analyze)

    q = sub.add_parser("params", help="reduction parameters for given log2 N and epsilon")
    q.add_argument("--log2-n", type=float, required=True)
    q.add_argument("--epsilon", type=float, required=True)
    common(q)
    q.set_defaults(func=cmd_params)

    s = sub.add_parser("solve", help="exact oracles on a hypergraph file")
    s.add_argument("--hypergraph", required=True)
    s.add_argument("--coloring", help="also check this coloring file for monochromatic edges")
    s.add_argument("--q", type=int, nargs="*", default=[2, 3, 4])
    s.add_argument("--is-cap", type=int, default=60)
    s.add_argument("--color-cap", type=int, default=256)
    common(s)
    s.set_defaults(func=cmd_solve)

    ra = sub.add_parser("run-all", help="run the acceptance suite")
    ra.set_defaults(func=cmd_run_all)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LimitExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
