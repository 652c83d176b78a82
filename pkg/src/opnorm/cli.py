"""Command-line front end: ``opnorm {norm,clt,diagnose,grothendieck,derivcheck}``.

Every subcommand accepts ``--config FILE`` (a JSON object) whose keys mirror
the long flags with dashes replaced by underscores; flags given on the
command line win. Results are printed as ``key=value`` lines. Exit codes:
0 success, 1 bad input or configuration, 2 reducible matrix, 3 numerical
failure, 4 a configured acceptance threshold was violated.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import diagnostics, ensembles, spectral, stats
from .boyd import PowerOptions, compute_norm
from .core import NormParams, SymMatrix
from .diagnostics import _fmt
from .exceptions import OpNormError, ReducibleError
from .mmio import read_matrix_market

EXIT_OK, EXIT_INPUT, EXIT_REDUCIBLE, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 1, 2, 3, 4

DEFAULT_THRESHOLDS = {"mean": 0.15, "variance": 0.3, "ks_pvalue": 0.01}


class ConfigError(OpNormError):
    """Invalid configuration; the message starts with the offending field path."""


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".opnorm-", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(pairs, stream=None):
    stream = sys.stdout if stream is None else stream
    for key, value in pairs:
        print(f"{key}={_fmt(value)}", file=stream)


def _witness_text(witness):
    return "|".join(",".join(str(i) for i in group) for group in witness)


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    return cfg


def _merge(args, cfg, keys):
    """Resolve each key from the command line first, then the config file."""
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else cfg.get(key)
    return out


def _require(value, path, kind=float, positive=False, minimum=None):
    if value is None:
        raise ConfigError(f"{path}: required")
    try:
        if kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            value = int(value)
        else:
            value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}") from None
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be > 0, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _params(r, p):
    r = _require(r, "r")
    p = _require(p, "p")
    try:
        return NormParams(r, p)
    except ValueError as exc:
        raise ConfigError(f"r/p: {exc}") from exc


def _options(vals):
    tol = 1e-10 if vals.get("tol") is None else _require(vals["tol"], "tol", positive=True)
    max_iter = 10000 if vals.get("max_iter") is None else \
        _require(vals["max_iter"], "max_iter", int, minimum=1)
    return PowerOptions(tol=tol, max_iter=max_iter)


def _read_matrix(path):
    if path is None:
        raise ConfigError("matrix: required")
    return read_matrix_market(path)


def _ensemble(cfg, seed_override=None):
    ens = cfg.get("ensemble")
    if not isinstance(ens, dict):
        raise ConfigError("ensemble: required object")
    known = {"family", "n", "mu", "sigma2", "profile", "diagonal", "support", "probs"}
    for key in ens:
        if key not in known:
            raise ConfigError(f"ensemble.{key}: unknown field")
    family = ens.get("family")
    if family not in ensembles.FAMILIES:
        raise ConfigError(f"ensemble.family: expected one of {list(ensembles.FAMILIES)}, "
                          f"got {family!r}")
    n = _require(ens.get("n"), "ensemble.n", int, minimum=2)
    seed = seed_override if seed_override is not None else cfg.get("seed", 0)
    seed = _require(seed, "seed", int, minimum=0)
    kwargs = {"family": family, "n": n, "seed": seed}
    for key in ("mu", "sigma2"):
        if ens.get(key) is not None:
            kwargs[key] = _require(ens[key], f"ensemble.{key}")
    for key in ("support", "probs"):
        if ens.get(key) is not None:
            kwargs[key] = ens[key]
    profile = ens.get("profile")
    if profile is not None:
        try:
            kwargs["profile"] = (read_matrix_market(profile).entries
                                 if isinstance(profile, str) else np.asarray(profile, dtype=float))
        except (OpNormError, ValueError) as exc:
            raise ConfigError(f"ensemble.profile: {exc}") from exc
    diag = ens.get("diagonal")
    if diag is not None:
        if not isinstance(diag, dict):
            raise ConfigError("ensemble.diagonal: expected an object {zeta, rho2, family}")
        try:
            kwargs["diagonal"] = ensembles.DiagonalLaw(**diag)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"ensemble.diagonal: {exc}") from exc
    try:
        return ensembles.EnsembleSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ensemble: {exc}") from exc


def cmd_norm(args):
    cfg = _load_config(args.config)
    vals = _merge(args, cfg, ("matrix", "r", "p", "tol", "max_iter", "out"))
    params = _params(vals["r"], vals["p"])
    opts = _options(vals)
    A = _read_matrix(vals["matrix"])
    res = compute_norm(A, params, opts)
    _emit([("gamma", res.gamma), ("residual", res.residual),
           ("iterations", res.iterations), ("n", A.n), ("r", params.r), ("p", params.p)])
    if vals["out"]:
        atomic_write(vals["out"], json.dumps({
            "gamma": res.gamma, "residual": res.residual, "iterations": res.iterations,
            "r": params.r, "p": params.p, "v": [float(x) for x in res.v]}, indent=2) + "\n")
    return EXIT_OK


def _csv_text(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(stats.CSV_COLUMNS)
    for rec in records:
        writer.writerow([_fmt(rec[col]) for col in stats.CSV_COLUMNS])
    return buf.getvalue()


def _thresholds(cfg):
    raw = cfg.get("thresholds")
    if raw is None:
        return None
    if raw is True or raw == "default":
        return dict(DEFAULT_THRESHOLDS)
    if not isinstance(raw, dict):
        raise ConfigError("thresholds: expected an object, true or \"default\"")
    out = dict(DEFAULT_THRESHOLDS)
    for key, value in raw.items():
        if key not in DEFAULT_THRESHOLDS:
            raise ConfigError(f"thresholds.{key}: unknown threshold")
        out[key] = _require(value, f"thresholds.{key}", minimum=0.0)
    return out


def cmd_clt(args):
    cfg = _load_config(args.config)
    norm_cfg = cfg.get("norm", {})
    if not isinstance(norm_cfg, dict):
        raise ConfigError("norm: expected an object {r, p}")
    r = args.r if args.r is not None else norm_cfg.get("r", cfg.get("r"))
    p = args.p if args.p is not None else norm_cfg.get("p", cfg.get("p"))
    params = _params(r, p)
    vals = _merge(args, cfg, ("replicates", "mode", "out", "tol", "max_iter"))
    replicates = _require(vals["replicates"], "replicates", int, minimum=2)
    mode = vals["mode"] or "hom"
    if mode not in ("hom", "inhom"):
        raise ConfigError(f"mode: expected 'hom' or 'inhom', got {mode!r}")
    opts = _options(vals)
    spec = _ensemble(cfg, args.seed)
    if mode == "hom" and not spec.sigma2 > 0:
        raise ConfigError("ensemble.sigma2: must be > 0 for the hom statistic")
    extras = cfg.get("extras", True)
    if not isinstance(extras, bool):
        raise ConfigError("extras: expected true or false")
    thresholds = _thresholds(cfg)
    out = vals["out"] or "opnorm_clt"

    summary = stats.run_clt_experiment(spec, params, replicates, mode=mode, opts=opts,
                                       extras=extras)
    csv_path = os.path.join(out, "replicates.csv")
    json_path = os.path.join(out, "summary.json")
    atomic_write(csv_path, _csv_text(summary.records))
    doc = summary.to_dict()
    doc.update({"mode": mode, "r": params.r, "p": params.p, "seed": spec.seed,
                "family": spec.family, "n": spec.n, "mu": spec.mu, "sigma2": spec.sigma2,
                "rng": ensembles.RNG_DESCRIPTION})
    verdict = None
    if thresholds is not None:
        verdict = {
            "mean": abs(summary.mean) <= thresholds["mean"],
            "variance": abs(summary.variance - 2.0) <= thresholds["variance"],
            "ks_pvalue": summary.ks_pvalue > thresholds["ks_pvalue"],
        }
        doc["thresholds"] = thresholds
        doc["thresholds_ok"] = verdict
    atomic_write(json_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _emit([("replicates", summary.replicates), ("mean", summary.mean),
           ("variance", summary.variance), ("ks_distance", summary.ks_distance),
           ("ks_pvalue", summary.ks_pvalue), ("centering", summary.centering),
           ("scaling", summary.scaling), ("resamples", summary.resamples),
           ("csv", csv_path), ("summary", json_path)])
    if verdict is not None:
        _emit([(f"threshold.{k}", ok) for k, ok in verdict.items()])
        if not all(verdict.values()):
            return EXIT_THRESHOLD
    return EXIT_OK


def _offdiag_moments(arr):
    n = arr.shape[0]
    upper = arr[np.triu_indices(n, k=1)]
    return float(upper.mean()), float(upper.var(ddof=1)) if upper.size > 1 else 0.0


def cmd_diagnose(args):
    cfg = _load_config(args.config)
    vals = _merge(args, cfg, ("matrix", "r", "p", "mu", "sigma2", "K", "eps",
                              "num_subsets", "tol", "max_iter", "mean_matrix"))
    params = _params(vals["r"] if vals["r"] is not None else 2.0,
                     vals["p"] if vals["p"] is not None else 2.0)
    opts = _options(vals)
    mu_cfg = vals["mu"]
    if vals["mean_matrix"] is not None:
        n = _require(vals["mean_matrix"], "mean_matrix", int, minimum=2)
        mu = _require(mu_cfg if mu_cfg is not None else 1.0, "mu", positive=True)
        A = SymMatrix.mean_matrix(n, mu)
        sigma2 = 0.0
    elif vals["matrix"] is not None:
        A = read_matrix_market(vals["matrix"])
    elif "ensemble" in cfg:
        spec = _ensemble(cfg, args.seed)
        A = ensembles.sample(spec, 0)
        mu_cfg = spec.mu if mu_cfg is None else mu_cfg
        vals["sigma2"] = spec.sigma2 if vals["sigma2"] is None else vals["sigma2"]
    else:
        raise ConfigError("matrix: give --matrix, --mean-matrix or an ensemble config")
    arr = A.entries
    n = arr.shape[0]
    if n < 2:
        raise ConfigError("matrix: diagnose needs n >= 2")
    mu_hat, var_hat = _offdiag_moments(arr)
    if vals["mean_matrix"] is None:
        mu = _require(mu_cfg if mu_cfg is not None else mu_hat, "mu", positive=True)
        sigma2 = _require(vals["sigma2"] if vals["sigma2"] is not None else var_hat,
                          "sigma2", minimum=0.0)
    K = _require(vals["K"] if vals["K"] is not None else diagnostics.estimate_K(arr), "K",
                 minimum=1.0)
    eps = ensembles.epsilon_n(n, mu, K) if vals["eps"] is None else _require(vals["eps"], "eps")
    num_subsets = 200 if vals["num_subsets"] is None else \
        _require(vals["num_subsets"], "num_subsets", int, minimum=1)

    irr = diagnostics.irreducible(arr)
    _emit([("n", n), ("irreducible", irr.ok), ("irreducible.kind", irr.kind)])
    reg = diagnostics.almost_regular(arr, mu, eps)
    wb = diagnostics.well_balanced_sampled(arr, mu, eps, num_subsets=num_subsets,
                                           seed=args.seed or 0, K=K)
    reg = diagnostics.RegularityReport(
        eps_achieved=reg.eps_achieved, eps_target=reg.eps_target,
        almost_regular=reg.almost_regular, wb_samples=wb.wb_samples,
        wb_violations=wb.wb_violations, K_hat=reg.K_hat)
    print(reg.to_kv("regularity."))
    if not irr.ok:
        _emit([("irreducible.witness", _witness_text(irr.witness))])
        print(f"error: A^T A is reducible ({irr.kind})", file=sys.stderr)
        return EXIT_REDUCIBLE
    res = compute_norm(arr, params, opts)
    _emit([("gamma", res.gamma)])
    print(diagnostics.maximizer_bound(arr, params, res, mu, K).to_kv("maximizer."))
    zeta, rho2 = (float(np.mean(np.diag(arr))), float(np.var(np.diag(arr)))) \
        if not A.zero_diagonal else (0.0, 0.0)
    print(spectral.check_bounds(arr, params, res, mu, sigma2, zeta, rho2).to_kv("spectral."))
    return EXIT_OK


def cmd_grothendieck(args):
    cfg = _load_config(args.config)
    vals = _merge(args, cfg, ("matrix", "r", "tol", "max_iter"))
    r = _require(vals["r"], "r")
    if not r >= 2:
        raise ConfigError(f"r: r must be >= 2, got {r}")
    opts = _options(vals)
    A = _read_matrix(vals["matrix"])
    _emit([("M_r", stats.grothendieck_mr(A, r, opts)), ("r", r)])
    return EXIT_OK


def cmd_derivcheck(args):
    cfg = _load_config(args.config)
    vals = _merge(args, cfg, ("n", "mu", "r", "p", "h", "hess_h"))
    n = _require(vals["n"] if vals["n"] is not None else 200, "n", int, minimum=3)
    mu = _require(vals["mu"] if vals["mu"] is not None else 0.5, "mu", positive=True)
    params = _params(vals["r"] if vals["r"] is not None else 2.0,
                     vals["p"] if vals["p"] is not None else 2.0)
    h = _require(vals["h"] if vals["h"] is not None else 1e-4, "h", positive=True)
    hess_h = None if vals["hess_h"] is None else _require(vals["hess_h"], "hess_h", positive=True)
    rep = stats.derivative_check(n, mu, params, h=h, hess_h=hess_h)
    _emit(vars(rep).items())
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="opnorm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, r=True, pp=True):
        p.add_argument("--config", help="JSON file with default values for the flags")
        if r:
            p.add_argument("--r", type=float)
        if pp:
            p.add_argument("--p", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)

    p = sub.add_parser("norm", help="compute ||A||_{r->p} of a Matrix Market file")
    common(p)
    p.add_argument("--matrix")
    p.add_argument("--out", help="write gamma and the maximizer as JSON")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("clt", help="Monte Carlo check of the normal limit")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--mode", choices=("hom", "inhom"))
    p.add_argument("--out", help="output directory (replicates.csv, summary.json)")
    p.set_defaults(func=cmd_clt)

    p = sub.add_parser("diagnose", help="regularity, maximizer and spectral reports")
    common(p)
    p.add_argument("--matrix")
    p.add_argument("--mean-matrix", dest="mean_matrix", type=int, metavar="N",
                   help="use mu (J_N - I_N) instead of a file")
    p.add_argument("--seed", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--num-subsets", dest="num_subsets", type=int)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("grothendieck", help="M_r(A) = max x^T A x over the unit r-ball")
    common(p, pp=False)
    p.add_argument("--matrix")
    p.set_defaults(func=cmd_grothendieck)

    p = sub.add_parser("derivcheck", help="finite-difference derivatives of eta at mu (J - I)")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--hess-h", dest="hess_h", type=float)
    p.set_defaults(func=cmd_derivcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ReducibleError as exc:
        _emit([("status", "reducible"), ("kind", exc.kind),
               ("witness", _witness_text(exc.witness))])
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REDUCIBLE
    except OpNormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
