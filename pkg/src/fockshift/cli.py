"""Command-line front end: fockshift <command> [options].

Reports are JSON objects with fixed field order and floats written with 17
significant digits, so identical inputs give byte-identical output.
Precondition failures exit with status 2 and a JSON error object.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import fock, freeword, hardy, model, similarity, symfock, weights
from .errors import CapExceeded, PreconditionError

ANCHORS = {
    "radius": "level-norm sup formula and joint spectral radius of weighted shifts",
    "classify": "row contraction, power boundedness and compactness criteria",
    "decompose": "decomposition into injective shifts and truncations",
    "similar": "diagonal similarity of weighted shifts",
    "contract": "similarity of power bounded shifts to row contractions",
    "model": "weighted Rota-type similarity model",
    "fp": "dyadic quasi-nilpotent shift model",
    "membership": "bounded point evaluations and joint point spectrum",
    "eval": "evaluation functionals via kernel vectors",
    "calculus": "Fejer functional calculus",
    "symmetric": "symmetric weighted Fock space and commuting compressions",
    "kernel": "reproducing kernel of the symmetric space",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- deterministic JSON ---

def _fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if text in ("-0", "0"):
        return "0.0"
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps(obj, indent=2, _level=0):
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (np.bool_, bool)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if isinstance(obj, (np.floating, float)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray, complex, np.complexfloating)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(rows):
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0].keys()))
    for row in rows:
        writer.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row.values()])
    return buf.getvalue()


# --- input parsing ---

def parse_complex(text):
    text = text.strip().replace(" ", "")
    if text.endswith("i"):
        text = text[:-1] + "j"
    return complex(text)


def parse_point(text):
    return np.array([parse_complex(t) for t in text.split(",")])


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _weights(args, which="weights"):
    w = _read_weights(args, which)
    args.resolved.setdefault(which, weights.to_json(w))
    return w


def _read_weights(args, which):
    path = getattr(args, which, None)
    if path:
        return weights.from_json(_load_json(path))
    if which != "weights":
        raise PreconditionError(f"--{which.replace('_', '-')} is required")
    if args.family is None:
        raise PreconditionError("give --family or --weights")
    if args.n is None:
        raise PreconditionError("--family needs --n")
    extra = {}
    if args.family in ("constant",):
        extra["rho"] = 1.0 if args.s is None else args.s
    return weights.make_family(args.family, args.n, args.s, **extra)


def _tuple(args):
    if not args.tuple:
        raise PreconditionError("--tuple is required")
    return model.OperatorTuple.from_json(_load_json(args.tuple))


def _symbol(path, n):
    if not path:
        raise PreconditionError("--symbol is required")
    return hardy.Symbol.from_json(_load_json(path), n)


def _fock_level(args, w, default=6):
    N = default if args.N is None else args.N
    if not w.length_only or args.command in ("decompose", "similar", "contract", "symmetric"):
        freeword.check_size(w.n, N)
    return N


# --- commands ---

def cmd_radius(args):
    w = _weights(args)
    N = _fock_level(args, w, 8)
    levels = []
    for k in range(1, N + 1):
        ln = fock.level_row_norm(w, k, N, threads=args.threads)
        row = {"k": k, "value": ln.value, "beta": freeword.word_to_str(ln.beta),
               "alpha": freeword.word_to_str(ln.alpha)}
        cf = w.level_sup(k)
        row["closed_form"] = cf
        levels.append(row)
    est = fock.joint_radius_estimate(w, N)
    result = {"levels": levels, "sequence": est.sequence, "r_estimate": est.estimate,
              "r_exact": est.exact, "window": est.window}
    return result, levels


def cmd_classify(args):
    w = _weights(args)
    N = _fock_level(args, w, 6)
    rep = fock.classify(w, N, args.M)
    rows = [{"k": k + 1, "level_norm": v} for k, v in enumerate(rep["level_norms"])]
    return rep, rows


def cmd_decompose(args):
    w = _weights(args)
    N = _fock_level(args, w, 3)
    comps = fock.reduce_decompose(w, N)
    result = {"components": [{"type": c["type"], "size": len(c["words"]),
                              "words": [freeword.word_to_str(x) for x in c["words"]]} for c in comps],
              "truncation_valid": weights.is_truncation_valid(w, min(N, w.max_level or N))}
    return result, None


def cmd_similar(args):
    w = _weights(args)
    w2 = _weights(args, "weights2")
    N = _fock_level(args, w, 4)
    D = similarity.similarity_diagonal(w, w2, N)
    return {"C1": D.C1, "C2": D.C2, "C2_over_C1": D.C2 / D.C1, "cond": D.cond,
            "residual": similarity.verify_intertwining(D, w, w2, N), "diagonal": D.as_dict()}, None


def cmd_contract(args):
    w = _weights(args)
    N = _fock_level(args, w, 4)
    if args.M is None:
        raise PreconditionError("contract needs --M")
    res = similarity.contraction_weights(w, args.M, N)
    D = similarity.similarity_diagonal(w, res.weights, N)
    return {"M": args.M, "sup_scan": res.sup_scan,
            "weights": weights.to_json(res.weights),
            "gamma_by_level": res.gamma_extrema_by_level(),
            "cond": D.cond, "residual": similarity.verify_intertwining(D, w, res.weights, N)}, None


def cmd_model(args):
    T = _tuple(args)
    mode = args.mode or "tuple-norm"
    Q = np.asarray(_load_json(args.Q), dtype=float) if args.Q else None
    w = _weights(args) if mode == "rota" else None
    N = args.N
    if N is not None:
        freeword.check_size(T.n, N)
    out = model.model_bound(T, mode, Q=Q, N=N, w=w)
    cert = out["certificate"]
    return {"mode": mode, "cb_bound": out["bound"], "certificate_bound": cert.cb_bound,
            "residuals": cert.residuals, "lambda_min": cert.lam_min, "lambda_max": cert.lam_max,
            "regime": cert.regime, "verdict": cert.verdict, "N": cert.N,
            "level_terms": cert.level_terms, "partial_sum_norms": cert.partial_sum_norms,
            "nilpotent_index": T.nilpotent_index()}, None


def cmd_fp(args):
    N = 6 if args.N is None else args.N
    if args.sequence:
        a = [float(x) for x in args.sequence.split(",")]
        T = None
        n = args.n or 1
    else:
        T = _tuple(args)
        a = model.fp_sequence_from_tuple(T, N)
        n = T.n
    freeword.check_size(n, N)
    fp = model.foias_pearcy_weights(a, n)
    cert = model.foias_pearcy_certify(fp, N, T)
    cert["a"] = fp.a
    cert["kappa"] = [fp.kappa.level_weight(k) for k in range(len(fp.a))]
    cert["sigma"] = fp.sigma
    return cert, None


def cmd_membership(args):
    w = _weights(args)
    if args.lam is None:
        raise PreconditionError("--lambda is required")
    lam = parse_point(args.lam)
    kw = {"delta": args.tol} if args.tol is not None else {}
    res = hardy.point_membership(w, lam, max_level=args.N or 60, **kw)
    rows = [{"k": k, "term": t, "partial_sum": s} for k, (t, s) in enumerate(zip(res.terms, res.partial_sums))]
    return {"lambda": res.lam, "verdict": res.verdict, "method": res.method,
            "terms": res.terms, "partial_sums": res.partial_sums, "diagnostics": res.diagnostics}, rows


def cmd_eval(args):
    w = _weights(args)
    f = _symbol(args.symbol, w.n)
    lam = parse_point(args.lam)
    return hardy.evaluate_at_point(f, w, lam), None


def cmd_calculus(args):
    T = _tuple(args)
    phi = _symbol(args.symbol, T.n)
    mode = args.mode or "fejer"
    kw = {"tol": args.tol} if args.tol is not None and mode == "hol0-series" else {}
    value = hardy.cesaro_evaluate(phi, T, args.N if args.N is not None else 10, mode, **kw)
    out = {"mode": mode, "matrix": [[[z.real, z.imag] for z in row] for row in value],
           "spectral_radius": model.spectral_radius(value)}
    if args.symbol2:
        psi = _symbol(args.symbol2, T.n)
        out["certificates"] = hardy.calculus_certificates(phi, psi, T)
    return out, None


def cmd_symmetric(args):
    w = _weights(args)
    D = args.D if args.D is not None else 4
    basis = symfock.SymmetricBasis(w, D)
    mats = [symfock.commuting_shift_matrix(w, i, D, basis).toarray() for i in range(1, w.n + 1)]
    interior = [j for j, k in enumerate(basis.indices) if sum(k) <= D - 2]
    comm = 0.0
    for i in range(w.n):
        for j in range(i + 1, w.n):
            C = (mats[i] @ mats[j] - mats[j] @ mats[i])[:, interior]
            comm = max(comm, float(np.abs(C).max()) if C.size else 0.0)
    rows = [{"k": freeword.multi_index_to_str(k), "omega": float(om)}
            for k, om in zip(basis.indices, basis.omega)]
    out = {"D": D, "omega": {r["k"]: r["omega"] for r in rows}, "commutator_residual": comm}
    N = args.N
    if N is not None:
        freeword.check_size(w.n, N)
        out["compression_residual"] = max(symfock.compression_check(w, i, D, N) for i in range(1, w.n + 1))
    return out, rows


def cmd_kernel(args):
    w = _weights(args)
    if args.lam is None or args.zeta is None:
        raise PreconditionError("kernel needs --zeta and --lambda (';'-separated point lists)")
    zetas = [parse_point(p) for p in args.zeta.split(";")]
    lams = [parse_point(p) for p in args.lam.split(";")]
    rows = []
    for z in zetas:
        for l in lams:
            val = symfock.h2_kernel(w, z, l, max_degree=args.D or 60)["value"]
            rows.append({"zeta": ",".join(_fmt_float(x.real) + ("" if x.imag == 0 else f"{x.imag:+.17g}i") for x in z),
                         "lambda": ",".join(_fmt_float(x.real) + ("" if x.imag == 0 else f"{x.imag:+.17g}i") for x in l),
                         "re": val.real, "im": val.imag})
    return {"values": rows}, rows


COMMANDS = {
    "radius": cmd_radius, "classify": cmd_classify, "decompose": cmd_decompose,
    "similar": cmd_similar, "contract": cmd_contract, "model": cmd_model, "fp": cmd_fp,
    "membership": cmd_membership, "eval": cmd_eval, "calculus": cmd_calculus,
    "symmetric": cmd_symmetric, "kernel": cmd_kernel,
}


def build_parser():
    p = _Parser(prog="fockshift", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--family", choices=["unit", "besov", "dirichlet", "constant", "ratio", "inverse"])
    p.add_argument("--weights", help="JSON weight spec")
    p.add_argument("--weights2", help="second JSON weight spec (similar)")
    p.add_argument("--tuple", help="JSON operator tuple")
    p.add_argument("--symbol", help="JSON symbol")
    p.add_argument("--symbol2", help="second JSON symbol (calculus certificates)")
    p.add_argument("--Q", help="JSON positive definite matrix (model --mode rota)")
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--D", type=int, help="degree cap on the multi-index lattice")
    p.add_argument("--s", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--zeta")
    p.add_argument("--sequence", help="comma-separated a_1,...,a_K (fp)")
    p.add_argument("--mode")
    p.add_argument("--tol", type=float)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    return p


def _config(args):
    out = {k: v for k, v in sorted(vars(args).items()) if k != "resolved"}
    out["resolved"] = args.resolved
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(argv)
        args.resolved = {}
        result, rows = COMMANDS[args.command](args)
        if args.format == "csv":
            if rows is None:
                raise PreconditionError(f"command {args.command!r} has no tabular output")
            text = _csv(rows)
        else:
            report = {"command": args.command, "anchor": ANCHORS[args.command],
                      "config": _config(args), "result": result}
            text = dumps(report) + "\n"
    except (UsageError, PreconditionError, CapExceeded, ValueError, KeyError, OSError,
            json.JSONDecodeError, ArithmeticError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        err = {"error": {"type": type(exc).__name__, "message": msg}}
        sys.stdout.write(dumps(err) + "\n")
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
