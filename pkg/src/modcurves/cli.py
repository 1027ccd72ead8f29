"""Command-line entry point: ``modcurves <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 input error, 4 audit failure.
Structured output is JSON with sorted keys; big integers are strings.
``MODCURVES_PREC`` overrides the default precision of every subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .qseries import PrecisionError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_AUDIT = 0, 2, 3, 4


class InputError(Exception):
    pass


class AuditFailure(Exception):
    pass


def _default_prec(fallback: int) -> int:
    raw = os.environ.get("MODCURVES_PREC")
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"MODCURVES_PREC must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError("MODCURVES_PREC must be positive")
    return value


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _artifact(kind: str, payload: dict, audit: dict) -> dict:
    doc = {"kind": kind, "tool_version": __version__, "audit": audit}
    doc.update(payload)
    return doc


def _complex_json(z: complex) -> list[str]:
    return [repr(float(z.real)), repr(float(z.imag))]


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise InputError(f"cannot parse {text!r} as a complex number") from None


def _parse_pairs(text: str) -> list[tuple[tuple[int, int], int]]:
    """``"1,0:1;0,2:1;2,1:-1"`` -> [((1, 0), 1), ...]"""
    out = []
    try:
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            lab, m = chunk.split(":")
            i, j = lab.split(",")
            out.append(((int(i), int(j)), int(m)))
    except ValueError:
        raise InputError(f"malformed term list {text!r}; expected 'i,j:m;...'") from None
    return out


def _rat_text(v) -> str:
    return str(Fraction(v)) if isinstance(v, (int, Fraction)) else repr(v)


# ---------------------------------------------------------------- subcommands
def cmd_eis(args) -> int:
    from .eisenstein import (
        DivisorCombo, TorsionLabel, eis_combo, eis_expansion, eis_weight2_diff,
        lattice_oracle, lattice_oracle_combo, weierstrass_p,
    )
    from .qseries import dump_series, series_eval_float

    prec = args.prec or _default_prec(10)
    N, k = args.level, args.weight
    try:
        if args.combo:
            D = DivisorCombo(N, _parse_pairs(args.combo))
            s = eis_combo(k, D, prec)
            name = f"G{k}_D"
        else:
            if args.alpha is None:
                raise InputError("give --alpha i,j or --combo")
            i, j = (int(v) for v in args.alpha.split(","))
            alpha = TorsionLabel(i, j, N)
            if k == 2:
                s = eis_weight2_diff(alpha, prec)
                name = f"P_{i}_{j}"
            else:
                s = eis_expansion(k, alpha, prec)
                name = f"G{k}_{i}_{j}"
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.oracle is None:
        _emit(dump_series([(name, s)], {"weight": k, "level": N, "tool_version": __version__}), args.out)
        return EXIT_OK
    tau = _parse_complex(args.oracle)
    exact = series_eval_float(s, tau)
    if args.combo:
        ref = lattice_oracle_combo(k, D, tau)
        value, tail = ref.value, ref.tail
    elif k == 2:
        # the weight-2 difference is p(alpha); no separate tail is tracked
        value, tail = complex(weierstrass_p(i / N + j * tau / N, tau)), 0.0
    elif k >= 3:
        ref = lattice_oracle(k, alpha, tau)
        value, tail = ref.value, ref.tail
    else:
        raise InputError("single G_1 is conditionally convergent; use --combo for the oracle")
    err = abs(exact - value)
    tol = args.tol
    audit = {"precision": prec, "tolerance": tol, "abs_error": repr(err), "tail_estimate": repr(float(tail)),
             "passed": err <= tol * max(1.0, abs(value))}
    doc = _artifact("eis-oracle", {"name": name, "tau": _complex_json(tau), "series_value": _complex_json(exact),
                                   "oracle_value": _complex_json(value)}, audit)
    _emit(_dump(doc), args.out)
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


def cmd_modpoly(args) -> int:
    from .modpoly import ResidualError, coset_identity_residual, modpoly_verify, modular_polynomial

    if args.level < 1:
        raise InputError("--level must be positive")
    if args.method == "interp" and args.level < 2:
        raise InputError("interpolation needs level >= 2")
    report: dict = {}
    try:
        P = modular_polynomial(args.level, args.method, report=report)
    except ResidualError as exc:
        raise AuditFailure(str(exc)) from None
    audit = {"method": args.method}
    audit.update({k: (repr(v) if isinstance(v, float) else v) for k, v in report.items()
                  if isinstance(v, (int, float, str, bool))})
    passed = True
    if args.verify:
        v = modpoly_verify(P, args.prec or _default_prec(20))
        audit["verify"] = v
        passed = v["passed"]
        if args.level == 2:
            res = coset_identity_residual(P, 30)
            audit["coset_identity_zero"] = all(r.is_zero() for r in res)
            passed = passed and audit["coset_identity_zero"]
    audit["passed"] = passed
    doc = json.loads(P.to_json())
    _emit(_dump(_artifact("modpoly", doc, audit)), args.out)
    return EXIT_OK if passed else EXIT_AUDIT


def _load_divisor(path: str, E):
    from .katz import O, PointDivisor

    try:
        items = json.loads(Path(path).read_text())
        terms = []
        for it in items:
            m = int(it["m"])
            if it["x"] == "O":
                terms.append((O, m))
            else:
                terms.append((E.point(Fraction(it["x"]), Fraction(it["y"])), m))
        return PointDivisor(E, terms)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"bad divisor file: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_katz(args) -> int:
    from .katz import EllCurveQ, PointDivisor, katz_coefficients, numeric_period_bridge

    if args.tau is None:
        if args.divisor is None or args.a is None or args.b is None:
            raise InputError("exact mode needs --a, --b and --divisor")
        try:
            E = EllCurveQ(Fraction(args.a), Fraction(args.b))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        D = _load_divisor(args.divisor, E)
        f, g = katz_coefficients(E, D, args.kmax)
        payload = {"curve": [str(E.a), str(E.b)], "f": [_rat_text(v) for v in f], "g": [_rat_text(v) for v in g]}
        audit = {"mode": "exact", "kmax": args.kmax, "log_derivative_check": True, "passed": True}
        _emit(_dump(_artifact("katz", payload, audit)), args.out)
        return EXIT_OK
    from .eisenstein import DivisorCombo, lattice_oracle_combo

    tau = _parse_complex(args.tau)
    if not args.labels:
        raise InputError("oracle mode needs --labels i,j:m;...")
    N = args.level
    pairs = _parse_pairs(args.labels)
    try:
        Dc = DivisorCombo(N, pairs)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    E, table = numeric_period_bridge(tau, N)
    try:
        D = PointDivisor(E, [(table[(i % N, j % N)], m) for (i, j), m in pairs])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _, g = katz_coefficients(E, D, args.kmax)
    rows, worst = [], 0.0
    for k in range(1, args.kmax + 1):
        G = lattice_oracle_combo(k, Dc, tau).value
        err = abs(g[k - 1] + G)
        worst = max(worst, err / max(1.0, abs(G)))
        rows.append({"k": k, "g": _complex_json(g[k - 1]), "minus_G": _complex_json(-G), "abs_error": repr(err)})
    audit = {"mode": "oracle", "tolerance": args.tol, "max_rel_error": repr(worst), "passed": worst <= args.tol}
    _emit(_dump(_artifact("katz-oracle", {"tau": _complex_json(tau), "rows": rows}, audit)), args.out)
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


def _model_payload(S, ideal, verification) -> dict:
    doc = ideal.to_dict()
    audit = dict(doc.pop("audit"))
    audit["claimed_dim"] = S.claimed_dim
    audit["achieved_rank"] = S.achieved_rank
    audit["verification"] = verification
    audit["passed"] = verification["passed"] and audit.get("passed", True)
    doc["basis"] = S.to_text()
    return doc, audit


def cmd_model(args) -> int:
    from .curvemodel import assemble_form_space, relations_of_degree, restrict_vanishing, verify_relations

    try:
        if args.basis_file:
            S = assemble_form_space(0, args.weight or 0, source="file", path=args.basis_file)
            if args.weight and S.weight != args.weight:
                raise InputError(f"basis file has weight {S.weight}, --weight says {args.weight}")
        else:
            if args.level is None or args.weight is None:
                raise InputError("give --basis-file or both --level and --weight")
            prec = args.prec or (int(os.environ["MODCURVES_PREC"]) if "MODCURVES_PREC" in os.environ else None)
            S = assemble_form_space(args.level, args.weight, group=args.group, prec=prec)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.residual_degree is not None:
        order = int(S.data.deg_L(S.weight)) - args.residual_degree
        if order < 0:
            raise InputError("residual degree exceeds deg L_k")
        S = restrict_vanishing(S, order)
    ideals = [relations_of_degree(S, d) for d in range(2, args.max_degree + 1)]
    ideal = ideals[0]
    for extra in ideals[1:]:
        ideal.relations.extend(extra.relations)
    ideal.audit = {"per_degree": [i.audit for i in ideals], "passed": all(i.audit["passed"] for i in ideals),
                   "group": S.group, "level": S.level, "weight": S.weight}
    verification = verify_relations(ideal, S.series)
    doc, audit = _model_payload(S, ideal, verification)
    if S.claimed_dim is not None and S.achieved_rank < S.claimed_dim and args.residual_degree is None:
        audit["rank_shortfall"] = S.claimed_dim - S.achieved_rank
    _emit(_dump(_artifact("model", doc, audit)), args.out)
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


def cmd_gamma(args) -> int:
    from .curvemodel import gamma1_invariants, gamma_n_invariants

    try:
        data = gamma1_invariants(args.level) if args.group == "Gamma1" else gamma_n_invariants(args.level)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    lhs, rhs = 2 * data.genus - 2, 2 * data.degL1 - data.cusps
    audit = {"canonical_degree_identity": lhs == rhs, "passed": lhs == rhs}
    _emit(_dump(_artifact("gamma", data.as_dict(), audit)), args.out)
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


def _cab_doc(a, b, terms, k, max_degree):
    from .curvemodel import cab_model

    M = cab_model(a, b, dict(terms), k, max_degree=max_degree)
    ideal = M["ideal"]
    doc = ideal.to_dict()
    audit = dict(doc.pop("audit"))
    ver = M.get("verification", {"passed": True, "relations": []})
    audit.update({"verification": ver, "passed": ver["passed"]})
    gen = M.get("generation", {})
    payload = {
        "a": a, "b": b, "k": k, "lower_terms": [[i, j, str(c)] for (i, j), c in sorted(terms)],
        "genus": M["genus"], "gaps": M["gaps"], "dim": M["dim"],
        "rr_basis": [list(m) for m in M["rr_basis"]], "pole_orders": M["pole_orders"],
        "generation": {str(d): v for d, v in gen.items()},
        "quadric_generated": all(v["new_generators"] == 0 for d, v in gen.items() if d > 2),
    }
    payload.update(doc)
    return payload, audit


def cmd_cab(args) -> int:
    raw = _parse_pairs(args.terms) if args.terms else []
    terms = [((i, j), m) for (i, j), m in raw]
    try:
        payload, audit = _cab_doc(args.a, args.b, terms, args.k, args.max_degree)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(_dump(_artifact("cab", payload, audit)), args.out)
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


# --------------------------------------------------------------------- verify
def _verify_doc(doc: dict) -> tuple[bool, list[str]]:
    """Re-run the audits for one stored artifact; returns (ok, failed check names)."""
    kind = doc.get("kind")
    if doc.get("tool_version") != __version__:
        return False, [f"stale artifact version {doc.get('tool_version')!r}"]
    failed = []
    if kind == "modpoly":
        from .modpoly import ModPoly, modpoly_verify

        P = ModPoly.from_json(doc)
        prec = doc.get("audit", {}).get("verify", {}).get("precision", 20)
        v = modpoly_verify(P, prec)
        failed += [name for name, ok in v["checks"].items() if not ok]
    elif kind == "model":
        from .curvemodel import ModelIdeal, assemble_form_space, verify_relations

        S = assemble_form_space(0, 0, source="file", text=doc["basis"])
        ideal = ModelIdeal.from_dict(doc)
        v = verify_relations(ideal, S.series)
        if not v["passed"]:
            failed.append("vanishing")
    elif kind == "gamma":
        from .curvemodel import gamma1_invariants, gamma_n_invariants

        fn = gamma1_invariants if doc["group"] == "Gamma1" else gamma_n_invariants
        if fn(int(doc["N"])).as_dict() != {k: doc[k] for k in ("group", "N", "index", "degree", "cusps", "degL1", "genus")}:
            failed.append("numerology")
    elif kind == "cab":
        terms = [((i, j), Fraction(c)) for i, j, c in doc["lower_terms"]]
        md = max((r["degree"] for r in doc["relations"]), default=2)
        fresh, audit = _cab_doc(doc["a"], doc["b"], terms, doc["k"], max(md, 2))
        for key in ("genus", "dim", "relations"):
            if fresh[key] != doc[key]:
                failed.append(key)
        if not audit["passed"]:
            failed.append("vanishing")
    elif kind in ("katz", "katz-oracle", "eis-oracle"):
        if not doc.get("audit", {}).get("passed", False):
            failed.append("stored audit")
    else:
        return False, [f"unknown artifact kind {kind!r}"]
    return not failed, failed


def verify_bundle(paths) -> dict:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(q for q in p.rglob("*.json") if q.is_file())
        elif p.exists():
            files.append(p)
        else:
            raise InputError(f"no such path: {p}")
    if not files:
        return {"status": "nothing to verify", "artifacts": [], "passed": True}
    results = []
    for f in files:
        try:
            doc = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            results.append({"path": str(f), "passed": False, "failed": [f"unreadable: {exc}"]})
            continue
        try:
            ok, failed = _verify_doc(doc)
        except (KeyError, TypeError, ValueError) as exc:
            ok, failed = False, [f"malformed artifact: {exc}"]
        results.append({"path": str(f), "passed": ok, "failed": failed})
    passed = all(r["passed"] for r in results)
    return {"status": "pass" if passed else "fail", "artifacts": results, "passed": passed}


def cmd_verify(args) -> int:
    report = verify_bundle(args.paths)
    report["tool_version"] = __version__
    _emit(_dump(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_AUDIT


# ------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modcurves", description="Modular forms and modular curve models.")
    p.add_argument("--version", action="version", version=f"modcurves {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eis", help="Eisenstein expansions, optionally checked against the lattice oracle")
    e.add_argument("--level", type=int, required=True)
    e.add_argument("--weight", type=int, required=True)
    e.add_argument("--alpha", help="torsion label i,j for alpha = i/N + j tau/N")
    e.add_argument("--combo", help="divisor combination 'i,j:m;...'")
    e.add_argument("--prec", type=int, help="q-adic precision (default 10)")
    e.add_argument("--oracle", metavar="TAU", help="compare with the lattice sum at TAU, e.g. 0.1+1.2j")
    e.add_argument("--tol", type=float, default=1e-8)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eis)

    m = sub.add_parser("modpoly", help="classical modular polynomial Phi_N")
    m.add_argument("--level", type=int, required=True)
    m.add_argument("--method", choices=["qexp", "interp"], default="qexp")
    m.add_argument("--verify", action="store_true", help="run symmetry/integrality/degree/vanishing checks")
    m.add_argument("--prec", type=int, help="q-adic precision of the vanishing check (default 20)")
    m.add_argument("--out")
    m.set_defaults(func=cmd_modpoly)

    k = sub.add_parser("katz", help="Katz coefficients f_k, g_k of a divisor function")
    k.add_argument("--a", help="curve coefficient a (exact mode)")
    k.add_argument("--b", help="curve coefficient b (exact mode)")
    k.add_argument("--divisor", help="JSON divisor file [{x, y, m}, ...] (exact mode)")
    k.add_argument("--tau", help="oracle mode: period ratio")
    k.add_argument("--level", type=int, default=5, help="oracle mode: torsion level")
    k.add_argument("--labels", help="oracle mode: divisor 'i,j:m;...' of N-torsion labels")
    k.add_argument("--kmax", type=int, default=3)
    k.add_argument("--tol", type=float, default=1e-6)
    k.add_argument("--out")
    k.set_defaults(func=cmd_katz)

    md = sub.add_parser("model", help="relations of the projective model given by a space of forms")
    md.add_argument("--basis-file", help="basis in the qseries file format")
    md.add_argument("--level", type=int)
    md.add_argument("--weight", type=int)
    md.add_argument("--group", choices=["Gamma", "Gamma1"], default="Gamma")
    md.add_argument("--prec", type=int, help="precision in local units (Eisenstein mode)")
    md.add_argument("--residual-degree", type=int, help="restrict to forms vanishing at infinity to leave this degree")
    md.add_argument("--max-degree", type=int, default=2, choices=[2, 3])
    md.add_argument("--out")
    md.set_defaults(func=cmd_model)

    g = sub.add_parser("gamma", help="degree, cusps, deg L_1 and genus")
    g.add_argument("--level", type=int, required=True)
    g.add_argument("--group", choices=["Gamma", "Gamma1"], default="Gamma")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gamma)

    c = sub.add_parser("cab", help="C_{a,b} curve: Riemann-Roch basis and image ideal")
    c.add_argument("--a", type=int, required=True)
    c.add_argument("--b", type=int, required=True)
    c.add_argument("--terms", help="lower terms 'i,j:c;...' of y^a = x^b + sum c x^i y^j")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--max-degree", type=int, default=3, choices=[2, 3])
    c.add_argument("--out")
    c.set_defaults(func=cmd_cab)

    v = sub.add_parser("verify", help="re-run the audits of stored JSON artifacts")
    v.add_argument("paths", nargs="+")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AuditFailure, PrecisionError, ArithmeticError) as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
