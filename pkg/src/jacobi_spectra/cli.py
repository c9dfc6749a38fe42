"""``jacobi-spectra`` command-line interface.

Every artifact embeds the resolved configuration.  CSV files carry it in
``#`` comment lines; JSON files under a ``"config"`` key.  The only
run-dependent line is the ``generated`` timestamp, which ``--no-header`` drops.

Exit status: 0 on success, 2 on an invalid configuration, 3 on a numerical
failure (the message names the replicate and seed).
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime
import io
import json
import math
import sys

import numpy as np

from . import __version__, kernels
from .coeffs import DecompositionError, coefficients_from_json, decompose, uv_from_jacobi
from .ensemble import EnsembleParams, LimitParams, ParameterDomainError, Regime, ensemble_for
from .experiments import (clt_experiment, convergence_experiment, default_threads,
                          extremal_eigenvalue_check)
from .ldp import rate_of_spectral_measure
from .limits import (density_from_m, jacobi_density, limiting_jacobi, marchenko_pastur_density,
                     modified_wachter_density, semicircle_density, support_of_limit,
                     wachter_density, wachter_support)
from .rng import SeededStream, parse_seed, seed_from_env
from .sampler import sample_rescaled
from .spectra import (ConvergenceError, eigen_decompose, moments_by_recurrence,
                      moments_of_measure)

COMMANDS = ("sample", "eig", "moments", "density", "rate", "converge", "extremal", "clt",
            "decompose")
LAWS = ("modified-wachter", "wachter", "marchenko-pastur", "semicircle", "jacobi", "m-function")
FORMATS = ("json", "csv")

# documented defaults; a config file or flag overrides any of them
DEFAULTS = {
    "beta": 2.0, "n": None, "p1": None, "p2": None, "gamma": None, "sigma": None,
    "seed": None, "reps": 20, "K": 16, "grid": 1001, "law": "modified-wachter",
    "format": "json", "out": None, "threads": None, "no_header": False,
    "coeffs": None, "poly": "0,1", "method": "auto", "reference": "limit",
}

_INT_FIELDS = ("reps", "K", "grid", "threads")
_FLOAT_FIELDS = ("beta", "p1", "p2", "gamma", "sigma")
_CHOICES = {"law": LAWS, "format": FORMATS, "method": ("auto", "recurrence", "eigen"),
            "reference": ("limit", "proxy")}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"invalid config field '{field}': {message}")
        self.field = field


class NumericalFailure(RuntimeError):
    pass


@dataclasses.dataclass
class RunConfig:
    """Fully resolved run configuration.

    ``params`` holds the ensemble and limit parameters exactly as given
    (``n`` as a list); ``options`` holds the command-specific settings.
    """

    command: str
    params: dict
    seed: int
    reps: int
    out_path: str | None
    format: str
    threads: int
    no_header: bool = False
    options: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seed"] = f"0x{self.seed:016x}"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["seed"] = parse_seed(d["seed"])
        return cls(**d)


# ------------------------------------------------------------------ parsing

def _parse_list(field, text, conv):
    if isinstance(text, (list, tuple)):
        items = list(text)
    elif isinstance(text, str):
        items = [t for t in text.split(",") if t.strip()]
    else:
        items = [text]
    try:
        return [conv(t) for t in items]
    except (TypeError, ValueError):
        raise ConfigError(field, f"cannot parse {text!r}") from None


def _int(t):
    f = float(t)
    if not f.is_integer():
        raise ValueError(t)
    return int(f)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jacobi-spectra",
                                 description="Beta-Jacobi ensemble spectra and limit laws.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file of field values (flags take precedence)")
        p.add_argument("--beta", help="Dyson index beta > 0 (default 2)")
        p.add_argument("--n", help="matrix size, or comma-separated grid of sizes")
        p.add_argument("--p1")
        p.add_argument("--p2")
        p.add_argument("--gamma", help="limit ratio n/p1")
        p.add_argument("--sigma", help="limit ratio p1/p2")
        p.add_argument("--seed", help="64-bit master seed (decimal or 0x hex)")
        p.add_argument("--reps", help="replicates per grid cell (default 20)")
        p.add_argument("--K", help="moment order or rate truncation (default 16)")
        p.add_argument("--grid", help="density grid size (default 1001)")
        p.add_argument("--law", help=f"one of {', '.join(LAWS)}")
        p.add_argument("--format", help="json or csv (default json)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--threads", help="worker threads (default: all CPUs)")
        p.add_argument("--no-header", dest="no_header", action="store_const", const=True,
                       help="omit the timestamp line")
        p.add_argument("--coeffs", help="coefficient JSON file with keys a, b")
        p.add_argument("--poly", help="polynomial coefficients c0,c1,... (clt)")
        p.add_argument("--method", help="moments route: auto, recurrence or eigen")
        p.add_argument("--reference", help="extremal reference: limit or proxy")
        p.add_argument("--backend", choices=kernels.available_backends(),
                       help="kernel backend")
    return ap


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and the flags (in that order) and validate."""
    raw = dict(DEFAULTS)
    if ns.config:
        try:
            with open(ns.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(doc, dict):
            raise ConfigError("config", "top level must be an object")
        for key, val in doc.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(key, "unknown field")
            raw[key] = val
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            raw[key] = val

    params = {}
    for key in _FLOAT_FIELDS:
        if raw[key] is not None:
            try:
                params[key] = float(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(key, f"not a number: {raw[key]!r}") from None
            if not math.isfinite(params[key]):
                raise ConfigError(key, "must be finite")
    params["n"] = None if raw["n"] is None else _parse_list("n", raw["n"], _int)
    opts = {}
    for key in _INT_FIELDS:
        if raw[key] is not None:
            try:
                opts[key] = _int(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(key, f"not an integer: {raw[key]!r}") from None
    for key, choices in _CHOICES.items():
        if raw[key] not in choices:
            raise ConfigError(key, f"must be one of {', '.join(choices)}, got {raw[key]!r}")
    try:
        seed = parse_seed(raw["seed"]) if raw["seed"] is not None else seed_from_env()
    except ValueError as exc:
        raise ConfigError("seed", str(exc)) from None
    threads = opts.pop("threads", None) or default_threads()
    if threads < 1:
        raise ConfigError("threads", "must be >= 1")
    reps = opts.pop("reps")
    if reps < 1:
        raise ConfigError("reps", "must be >= 1")
    options = {"K": opts["K"], "grid": opts["grid"], "law": raw["law"],
               "coeffs": raw["coeffs"], "method": raw["method"],
               "reference": raw["reference"]}
    if ns.command == "clt":
        options["poly"] = _parse_list("poly", raw["poly"], float)
    return RunConfig(ns.command, params, seed, reps, raw["out"], raw["format"], threads,
                     bool(raw["no_header"]), options)


def _limit(cfg: RunConfig, required=True) -> LimitParams | None:
    g, s = cfg.params.get("gamma"), cfg.params.get("sigma")
    if g is None or s is None:
        if not required:
            return None
        raise ConfigError("gamma" if g is None else "sigma", "required for this command")
    try:
        return LimitParams(g, s)
    except ParameterDomainError as exc:
        raise ConfigError("gamma", str(exc)) from None


def _ensembles(cfg: RunConfig) -> list:
    ns = cfg.params.get("n")
    if not ns:
        raise ConfigError("n", "required for this command")
    beta = cfg.params["beta"]
    p1, p2 = cfg.params.get("p1"), cfg.params.get("p2")
    out = []
    for n in ns:
        try:
            if p1 is not None and p2 is not None:
                out.append(EnsembleParams(beta, n, p1, p2))
            elif p1 is not None or p2 is not None:
                raise ConfigError("p2" if p2 is None else "p1", "give both p1 and p2")
            else:
                out.append(ensemble_for(_limit(cfg), n, beta))
        except ParameterDomainError as exc:
            raise ConfigError("n", str(exc)) from None
    return out


def _single_ensemble(cfg: RunConfig) -> EnsembleParams:
    ens = _ensembles(cfg)
    if len(ens) != 1:
        raise ConfigError("n", "this command takes a single n")
    return ens[0]


# ------------------------------------------------------------------ commands
# each returns (result, csv_columns, csv_rows, summary)

def _sample_matrix(cfg: RunConfig):
    ens = _single_ensemble(cfg)
    return ens, sample_rescaled(ens, SeededStream(cfg.seed, 0))


def _eig(cfg, J):
    try:
        return eigen_decompose(J)
    except ConvergenceError as exc:
        raise NumericalFailure(f"{exc}; replicate 0, seed 0x{cfg.seed:016x}") from None


def cmd_sample(cfg):
    ens, J = _sample_matrix(cfg)
    b = list(J.offdiag) + [None]
    rows = [[k + 1, J.diag[k], b[k]] for k in range(J.n)]
    res = {"ensemble": ens.to_dict(), "index_base": 1, "a": J.diag.tolist(),
           "b": J.offdiag.tolist()}
    return res, ["k", "a", "b"], rows, f"sampled rescaled {J.n}x{J.n} Jacobi matrix"


def cmd_eig(cfg):
    ens, J = _sample_matrix(cfg)
    mu = _eig(cfg, J)
    rows = [[x, w] for x, w in zip(mu.atoms, mu.weights)]
    res = {"ensemble": ens.to_dict(), "atoms": mu.atoms.tolist(), "weights": mu.weights.tolist()}
    return res, ["lambda", "weight"], rows, \
        f"{mu.n} eigenvalues in [{mu.atoms[0]:.6g}, {mu.atoms[-1]:.6g}]"


def cmd_moments(cfg):
    ens, J = _sample_matrix(cfg)
    K = cfg.options["K"]
    if K < 1:
        raise ConfigError("K", "must be >= 1")
    method = cfg.options["method"]
    if method == "auto":
        # the recurrence touches only K/2 + 2 rows; the eigen route costs O(n^2)
        method = "recurrence" if K < 2 * J.n else "eigen"
    m = moments_by_recurrence(J, K) if method == "recurrence" \
        else moments_of_measure(_eig(cfg, J), K)
    vals = m.moments.tolist()
    res = {"ensemble": ens.to_dict(), "method": method, "moments": vals}
    return res, ["k", "moment"], [[k, v] for k, v in enumerate(vals)], \
        f"moments 0..{K} by {method}"


def _density_fn(cfg):
    law = cfg.options["law"]
    if law == "semicircle":
        s = cfg.params.get("sigma")
        s = 0.0 if s is None else s
        half = 2.0 / math.sqrt(1.0 + s)
        return (lambda x: semicircle_density(x, s)), (-half, half)
    if law == "marchenko-pastur":
        g = cfg.params.get("gamma")
        if g is None or not 0.0 < g <= 1.0:
            raise ConfigError("gamma", "marchenko-pastur needs gamma in (0, 1]")
        rg = math.sqrt(g)
        return (lambda x: marchenko_pastur_density(x, g)), ((rg - 1.0) ** 2, (rg + 1.0) ** 2)
    p = _limit(cfg)
    if law == "wachter":
        if p.regime is not Regime.BULK:
            raise ConfigError("sigma", "wachter needs 0 < sigma*gamma <= 1")
        return (lambda x: wachter_density(x, p.gamma, p.sigma)), wachter_support(p.gamma, p.sigma)
    sup = support_of_limit(p)
    if law == "modified-wachter":
        return (lambda x: modified_wachter_density(x, p)), (sup.lower, sup.upper)
    jp = limiting_jacobi(p)
    if law == "jacobi":
        return (lambda x: jacobi_density(x, jp)), (sup.lower, sup.upper)
    return (lambda x: density_from_m(x, jp)), (sup.lower, sup.upper)


def cmd_density(cfg):
    f, (lo, hi) = _density_fn(cfg)
    n = cfg.options["grid"]
    if n < 2:
        raise ConfigError("grid", "must be >= 2")
    x = np.linspace(lo, hi, n)
    y = np.asarray(f(x), dtype=float)
    rows = [[a, b] for a, b in zip(x, y)]
    res = {"law": cfg.options["law"], "support": [lo, hi], "x": x.tolist(), "density": y.tolist()}
    return res, ["x", "density"], rows, f"{cfg.options['law']} density on {n} points in [{lo:.6g}, {hi:.6g}]"


def _load_coeffs(cfg):
    path = cfg.options.get("coeffs")
    if path is None:
        return None
    try:
        doc = coefficients_from_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError("coeffs", str(exc)) from None
    if "a" not in doc or "b" not in doc:
        raise ConfigError("coeffs", "file must contain arrays 'a' and 'b'")
    return doc["a"], doc["b"]


def cmd_rate(cfg):
    p = _limit(cfg)
    ab = _load_coeffs(cfg)
    if ab is None:
        raise ConfigError("coeffs", "required for rate")
    K = cfg.options["K"]
    if K < 1:
        raise ConfigError("K", "must be >= 1")
    try:
        rv = rate_of_spectral_measure(ab[0], ab[1], p, K)
    except ParameterDomainError as exc:
        raise ConfigError("coeffs", str(exc)) from None
    res = rv.to_dict()
    rows = [[k + 1, t] for k, t in enumerate(res["terms"])]
    return res, ["k", "term"], rows, f"rate = {res['value']} (K = {rv.truncation_K})"


def cmd_decompose(cfg):
    p = _limit(cfg)
    ab = _load_coeffs(cfg)
    if ab is None:
        ens, J = _sample_matrix(cfg)
        ab = (J.diag, J.offdiag)
    a, b = ab
    try:
        if p.regime is Regime.BULK:
            d = decompose(a, b, p)
            res = {"index_base": 1, "a": list(map(float, a)), "b": list(map(float, b)),
                   "z": d.z.tolist(), "p": d.p.tolist(), "u": d.u.tolist(), "v": d.v.tolist()}
        else:
            u, v = uv_from_jacobi(a, b, p)
            res = {"index_base": 1, "a": list(map(float, a)), "b": list(map(float, b)),
                   "u": u.tolist(), "v": v.tolist()}
    except DecompositionError as exc:
        raise NumericalFailure(str(exc)) from None
    except ParameterDomainError as exc:
        raise ConfigError("coeffs", str(exc)) from None
    u, v = res["u"], res["v"] + [None]
    rows = [[k + 1, u[k], v[k]] for k in range(len(u))]
    return res, ["k", "u", "v"], rows, f"decomposed {len(u)} coefficients"


def _report_output(report, columns):
    if report.failures:
        f = report.failures[0]
        raise NumericalFailure(
            f"{len(report.failures)} replicate(s) failed; first: n={f['n']} replicate "
            f"{f['replicate']} seed 0x{report.seed:016x} stream {f['stream_id']}: {f['error']}",
            report)
    return report.to_dict(), columns, report.csv_rows(columns)


def cmd_converge(cfg):
    p = _limit(cfg)
    ns = cfg.params.get("n")
    if not ns:
        raise ConfigError("n", "grid required")
    rep = convergence_experiment(p, ns, cfg.params["beta"], cfg.reps, cfg.seed, cfg.threads)
    cols = ["n", "median_ks_Ln", "median_ks_mun", "spectral_vs_empirical_gap"]
    res, cols, rows = _report_output(rep, cols)
    return res, cols, rows, "median KS(L_n) " + ", ".join(
        f"n={m['n']}: {m['median_ks_Ln']:.4g}" for m in rep.metrics)


def cmd_extremal(cfg):
    p = _limit(cfg)
    ns = cfg.params.get("n")
    if not ns:
        raise ConfigError("n", "grid required")
    rep = extremal_eigenvalue_check(p, ns, cfg.params["beta"], cfg.reps, cfg.seed, cfg.threads,
                                    cfg.options["reference"])
    cols = ["n", "median_min", "median_max", "limit_lower", "limit_upper",
            "deviation_min", "deviation_max"]
    res, cols, rows = _report_output(rep, cols)
    return res, cols, rows, "max-edge deviation " + ", ".join(
        f"n={m['n']}: {m['deviation_max']:.4g}" for m in rep.metrics)


def cmd_clt(cfg):
    ens = _ensembles(cfg)
    try:
        rep = clt_experiment(ens, cfg.options["poly"], cfg.reps, cfg.seed, cfg.threads)
    except ValueError as exc:
        raise ConfigError("reps", str(exc)) from None
    cols = ["n", "variance", "skewness", "excess_kurtosis", "ks_normal"]
    res, cols, rows = _report_output(rep, cols)
    return res, cols, rows, "Var S " + ", ".join(
        f"n={m['n']}: {m['variance']:.4g}" for m in rep.metrics)


HANDLERS = {"sample": cmd_sample, "eig": cmd_eig, "moments": cmd_moments,
            "density": cmd_density, "rate": cmd_rate, "decompose": cmd_decompose,
            "converge": cmd_converge, "extremal": cmd_extremal, "clt": cmd_clt}


# ------------------------------------------------------------------ output

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def render(cfg: RunConfig, result, columns, rows) -> str:
    conf = cfg.to_dict()
    if cfg.format == "csv":
        buf = io.StringIO()
        buf.write(f"# jacobi-spectra {__version__} backend={kernels.backend()}\n")
        buf.write("# config: " + json.dumps(conf, sort_keys=True) + "\n")
        if not cfg.no_header:
            buf.write(f"# generated: {_timestamp()}\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        return buf.getvalue()
    doc = {"config": conf}
    if not cfg.no_header:
        doc["generated"] = _timestamp()
    doc.update(result)
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _write(cfg: RunConfig, text: str):
    if cfg.out_path:
        with open(cfg.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    try:
        result, columns, rows, summary = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"jacobi-spectra: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        # experiment reports are still written so the failure is inspectable
        if len(exc.args) > 1:
            _write(cfg, render(cfg, exc.args[1].to_dict(), [], []))
        print(f"jacobi-spectra: numerical failure: {exc.args[0]}", file=sys.stderr)
        return 3
    _write(cfg, render(cfg, result, columns, rows))
    where = cfg.out_path or "stdout"
    print(f"jacobi-spectra {cfg.command}: {summary} -> {where}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.backend:
        kernels.set_backend(ns.backend)
    try:
        cfg = resolve_config(ns)
    except ConfigError as exc:
        print(f"jacobi-spectra: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
