"""Command-line front end: ``dpcontract {design,verify,audit,reproduce}``.

Runs are driven by an INI-style config file (one section per concern, values
in decimal or scientific notation, vectors as comma-separated lists). Every
run writes ``manifest.json`` echoing the resolved config next to its outputs.

Exit codes: 0 success, 2 config error, 3 verification or audit failure,
4 numerical failure.
"""

import argparse
import configparser
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, _accel
from ._io import write_csv, write_json
from .audit import privacy_loss, worst_pair_search
from .casestudies import (
    ConsensusAgentConfig,
    build_consensus_model,
    consensus_budget,
    consensus_metric,
    reproduce_example1,
    reproduce_section5,
    reproduce_theorem3,
    section5_rows,
)
from .contraction import (
    ContractionCertificate,
    MetricCandidate,
    theorem3_certificate,
    theorem3_grid,
    verify_oib_grid,
)
from .dynamics import parameter_model, rotation, rotation_derivative, scalar_model
from .exceptions import HypothesisError, NumericalError, ScheduleError
from .geometry import augmented_metric, identity_metric
from .mechanism import (
    EpsilonSchedule,
    NoiseSchedule,
    design_noise,
    design_noise_exponential,
    design_noise_theorem3,
    theorem3_alpha,
)

EXIT_OK, EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERICAL = 0, 2, 3, 4

SCHEDULE_COLUMNS = ["k", "lambda_k", "eps_k", "eps_increment", "b_k"]
AUDIT_COLUMNS = ["k", "per_step_loss", "cumulative_loss", "eps_k", "slack"]
SECTION5_COLUMNS = ["k", "r1", "r2", "y", "z", "e", "b_k", "eps_k", "L_k"]
TABLE_COLUMNS = ["quantity", "computed", "paper", "rel_error", "note"]


class ConfigError(Exception):
    """Invalid or missing configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"config error in `{key}`: {message}")
        self.key = key


class Config:
    """Typed accessor over a ConfigParser that records every value it resolves."""

    def __init__(self, parser=None):
        self.parser = parser or configparser.ConfigParser()
        self.resolved = {}

    @classmethod
    def load(cls, path):
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError("config", f"file not found: {path}")
            try:
                parser.read(path, encoding="utf-8")
            except configparser.Error as exc:
                raise ConfigError("config", str(exc).splitlines()[0]) from exc
        return cls(parser)

    def has(self, section, key=None):
        if key is None:
            return self.parser.has_section(section)
        return self.parser.has_option(section, key)

    def _record(self, section, key, value):
        self.resolved.setdefault(section, {})[key] = value
        return value

    def _raw(self, section, key, default):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip(), True
        if default is _REQUIRED:
            if not self.parser.has_section(section):
                raise ConfigError(f"{section}.{key}", f"missing required key (no [{section}] section)")
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default, False

    def str(self, section, key, default=None, choices=None):
        raw, _ = self._raw(section, key, default)
        if choices is not None and raw not in choices:
            raise ConfigError(f"{section}.{key}", f"expected one of {', '.join(choices)}, got {raw!r}")
        return self._record(section, key, raw)

    def float(self, section, key, default=None):
        raw, given = self._raw(section, key, default)
        if raw is None:
            return self._record(section, key, None)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{section}.{key}", f"not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"{section}.{key}", f"not finite: {raw!r}")
        return self._record(section, key, value)

    def int(self, section, key, default=None):
        raw, _ = self._raw(section, key, default)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{section}.{key}", f"not an integer: {raw!r}") from None
        if not value.is_integer():
            raise ConfigError(f"{section}.{key}", f"not an integer: {raw!r}")
        return self._record(section, key, int(value))

    def vector(self, section, key, default=None):
        raw, _ = self._raw(section, key, default)
        if raw is None:
            return self._record(section, key, None)
        if isinstance(raw, str):
            try:
                value = [float(t) for t in raw.replace(";", ",").split(",") if t.strip()]
            except ValueError:
                raise ConfigError(f"{section}.{key}", f"not a list of numbers: {raw!r}") from None
        else:
            value = [float(t) for t in raw]
        if not value or not all(math.isfinite(v) for v in value):
            raise ConfigError(f"{section}.{key}", "expected a non-empty list of finite numbers")
        return self._record(section, key, value)


_REQUIRED = object()


# ---------------------------------------------------------------------------
# shared config blocks
# ---------------------------------------------------------------------------

def _run_block(cfg, args):
    horizon = cfg.int("run", "horizon", 50)
    k0 = cfg.int("run", "k0", 0)
    if horizon < 0:
        raise ConfigError("run.horizon", "must be nonnegative")
    seed = args.seed if args.seed is not None else cfg.int("run", "seed", 0)
    cfg._record("run", "seed", seed)
    tol = args.tol if args.tol is not None else cfg.float("run", "tol", 1e-9)
    cfg._record("run", "tol", tol)
    if tol < 0:
        raise ConfigError("run.tol", "must be nonnegative")
    return horizon, k0, seed, tol


def _epsilon(cfg, horizon, k0):
    if not cfg.has("epsilon"):
        raise ConfigError("epsilon", "missing epsilon schedule (section [epsilon])")
    kind = cfg.str("epsilon", "kind", "geometric", ("geometric", "values", "increments"))
    try:
        if kind == "geometric":
            c = cfg.float("epsilon", "c", _REQUIRED)
            q = cfg.float("epsilon", "q", _REQUIRED)
            if c <= 0 or q <= 0:
                raise ConfigError("epsilon", "geometric schedule needs c > 0 and q > 0")
            return EpsilonSchedule.geometric(c, q, horizon, k0)
        values = cfg.vector("epsilon", kind, _REQUIRED)
        sched = EpsilonSchedule.from_values(values, k0) if kind == "values" else EpsilonSchedule(values, k0)
    except ScheduleError as exc:
        raise ConfigError("epsilon", str(exc)) from None
    if not sched.covers(k0, horizon):
        raise ConfigError("epsilon", f"schedule has {len(sched)} entries, horizon needs {horizon + 1}")
    return sched


def _theorem3_block(cfg):
    p = {
        "n": cfg.int("theorem3", "n", 2),
        "lam": cfg.float("theorem3", "lambda", 1.0),
        "lam_bar": cfg.float("theorem3", "lambda_bar", 1.1),
        "mu": cfg.float("theorem3", "mu", 300.0),
        "theta_bar": cfg.float("theorem3", "theta_bar", 1.0),
        "zeta": cfg.float("theorem3", "zeta", 1.0),
    }
    if not 0 < p["lam"] <= 1:
        raise ConfigError("theorem3.lambda", "must lie in (0, 1]")
    if not p["lam_bar"] > p["lam"]:
        raise ConfigError("theorem3.lambda_bar", "must exceed lambda")
    for key, name in (("mu", "mu"), ("theta_bar", "theta_bar"), ("zeta", "zeta")):
        if not p[key] > 0:
            raise ConfigError(f"theorem3.{name}", "must be positive")
    if p["n"] < 1:
        raise ConfigError("theorem3.n", "must be at least 1")
    return p


def _consensus_block(cfg):
    try:
        return ConsensusAgentConfig(
            tuple(cfg.vector("consensus", "row_weights", "0.2, 0.3")),
            cfg.float("consensus", "zeta", 1.0),
            cfg.float("consensus", "eps_total", 1.0),
            cfg.str("consensus", "chart", "euclidean", ("euclidean", "affine-line")),
        )
    except ValueError as exc:
        raise ConfigError("consensus", str(exc)) from None


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------

def _designed(cfg, horizon, k0):
    """(lambda values, eps schedule, noise, summary) for the configured design mode."""
    mode = cfg.str("design", "mode", "theorem1", ("theorem1", "theorem3", "exponential", "consensus"))
    safety = cfg.float("design", "safety", 1.0)
    if safety < 1:
        raise ConfigError("design.safety", "must be >= 1")
    summary = {"mode": mode, "safety": safety}
    if mode == "theorem1":
        eps = _epsilon(cfg, horizon, k0)
        alpha = cfg.float("theorem1", "alpha", _REQUIRED)
        scale = cfg.float("theorem1", "lambda_scale", 1.0)
        base = cfg.float("theorem1", "lambda_base", 1.0)
        if not alpha > 0:
            raise ConfigError("theorem1.alpha", "must be positive")
        if not (scale > 0 and base > 0):
            raise ConfigError("theorem1.lambda_base", "lambda_k = lambda_scale lambda_base^(k-k0) must be positive")
        lam = scale * base ** np.arange(horizon + 1, dtype=np.float64)
        noise = design_noise(lam, alpha, eps, horizon, safety)
        summary["alpha"] = alpha
    elif mode == "theorem3":
        eps = _epsilon(cfg, horizon, k0)
        p = _theorem3_block(cfg)
        lam = p["lam_bar"] ** np.arange(horizon + 1, dtype=np.float64)
        noise = design_noise_theorem3(p["n"], p["lam"], p["lam_bar"], p["mu"], p["theta_bar"], p["zeta"],
                                      eps, horizon, safety)
        cert = theorem3_certificate(p["n"], p["lam"], p["lam_bar"], p["mu"], p["theta_bar"], k0)
        summary["alpha"] = theorem3_alpha(p["n"], p["lam"], p["lam_bar"], p["mu"], p["theta_bar"], p["zeta"])
        summary["beta"] = cert.params["beta"]
        summary["c2"] = cert.c2
    elif mode == "exponential":
        c_bar = cfg.float("exponential", "c_bar", 1.0)
        lam_bar = cfg.float("exponential", "lambda_bar", _REQUIRED)
        alpha = cfg.float("exponential", "alpha", _REQUIRED)
        if cfg.has("exponential", "eps_total"):
            q = cfg.float("exponential", "q", _REQUIRED)
            c = cfg.float("exponential", "eps_total") * (1.0 - q)
        else:
            if not cfg.has("epsilon"):
                raise ConfigError("epsilon", "missing epsilon schedule (exponential.eps_total or [epsilon] c, q)")
            c = cfg.float("epsilon", "c", _REQUIRED)
            q = cfg.float("epsilon", "q", _REQUIRED)
        try:
            noise, eps = design_noise_exponential(c_bar, lam_bar, alpha, c, q, k0, horizon)
        except ValueError as exc:
            raise ConfigError("exponential", str(exc)) from None
        lam = c_bar * lam_bar ** np.arange(horizon + 1, dtype=np.float64)
        if safety != 1.0:
            noise = noise.scaled(safety)
        summary.update(alpha=alpha, c=c, q=q, eps_sup=c / (1.0 - q) if q < 1 else math.inf)
    else:
        agent = _consensus_block(cfg)
        _, noise = build_consensus_model(agent, horizon, k0)
        eps = consensus_budget(agent, horizon, k0)
        lam = agent.contraction ** np.arange(horizon + 1, dtype=np.float64)
        if safety != 1.0:
            noise = noise.scaled(safety)
        summary.update(alpha=math.sqrt(2.0) * agent.zeta, row_sum=agent.row_sum, chart=agent.metric_chart)
    return lam, eps, noise, summary


def _schedule_rows(lam, eps, noise, k0, horizon):
    for j in range(horizon + 1):
        k = k0 + j
        yield {
            "k": k,
            "lambda_k": float(lam[j]),
            "eps_k": eps.eps(k),
            "eps_increment": eps.increment(k),
            "b_k": noise.b(k),
        }


def cmd_design(cfg, args, out):
    horizon, k0, _, _ = _run_block(cfg, args)
    try:
        lam, eps, noise, summary = _designed(cfg, horizon, k0)
    except ScheduleError as exc:
        raise ConfigError("epsilon", str(exc)) from None
    write_csv(out / "schedule.csv", _schedule_rows(lam, eps, noise, k0, horizon), SCHEDULE_COLUMNS)
    b = noise.window(k0, horizon)
    summary.update(
        k0=k0,
        horizon=horizon,
        b_first=float(b[0]),
        b_last=float(b[-1]),
        b_min=float(b.min()),
        b_max=float(b.max()),
        eps_final=float(eps.eps(k0 + horizon)),
    )
    write_json(out / "design.json", {"command": "design", "summary": summary})
    print(f"design[{summary['mode']}]: b_k in [{b.min():.6g}, {b.max():.6g}] over k={k0}..{k0 + horizon}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _scalar_certificate(cfg, k0):
    gain = cfg.float("verify", "gain", 0.5)
    c1 = cfg.float("verify", "c1", 1.0)
    c2 = cfg.float("verify", "c2", 1.0)
    base = cfg.float("verify", "lambda_base", 0.5)
    P = cfg.float("verify", "P", 1.0)
    if not (c1 > 0 and c2 > 0):
        raise ConfigError("verify.c1", "c1 and c2 must be positive")
    if not (base > 0 and P > 0):
        raise ConfigError("verify.lambda_base", "lambda_base and P must be positive")
    model = scalar_model(gain)
    cert = ContractionCertificate(
        c1=c1,
        c2=c2,
        lambda_schedule=lambda k: base ** (k - k0),
        metric_candidate=MetricCandidate(lambda k, x: [[P]]),
        ambient_metric=identity_metric(1),
        k0=k0,
    )
    x_min = cfg.float("verify", "x_min", -1.0)
    x_max = cfg.float("verify", "x_max", 1.0)
    n_x = cfg.int("verify", "n_x", 21)
    n_k = cfg.int("verify", "n_k", 6)
    if n_x < 1 or n_k < 1:
        raise ConfigError("verify.n_x", "grid sizes must be positive")
    grid = [(k, [x]) for k in range(k0, k0 + n_k) for x in np.linspace(x_min, x_max, n_x)]
    return model, cert, grid


def _family(cfg, n):
    family = cfg.str("theorem3", "family", "rotation" if n == 2 else "scalar", ("scalar", "rotation"))
    if family == "rotation":
        if n != 2:
            raise ConfigError("theorem3.n", "the rotation family needs n = 2")
        return parameter_model(rotation, rotation_derivative, 2, name="rotation")
    if n != 1:
        raise ConfigError("theorem3.n", "the scalar family needs n = 1")
    return parameter_model(lambda t: [[t]], lambda t: [[1.0]], 1, name="scalar-theta")


def cmd_verify(cfg, args, out):
    _, k0, seed, tol = _run_block(cfg, args)
    which = cfg.str("verify", "model", "theorem3", ("theorem3", "scalar", "consensus"))
    if which == "scalar":
        model, cert, grid = _scalar_certificate(cfg, k0)
    elif which == "consensus":
        from .casestudies import consensus_certificate, consensus_dynamics

        agent = _consensus_block(cfg)
        model, cert = consensus_dynamics(agent), consensus_certificate(agent, k0)
        n_x, n_k = cfg.int("verify", "n_x", 11), cfg.int("verify", "n_k", 6)
        axis = np.linspace(-1.0, 1.0, n_x)
        pts = [[a, b] for a in axis for b in axis] if model.state_dim == 2 else [[a] for a in axis]
        grid = [(k, x) for k in range(k0, k0 + n_k) for x in pts]
    else:
        p = _theorem3_block(cfg)
        model = _family(cfg, p["n"])
        cert = theorem3_certificate(p["n"], p["lam"], p["lam_bar"], p["mu"], p["theta_bar"], k0)
        grid = theorem3_grid(
            cert,
            cfg.int("verify", "n_z", 50),
            cfg.int("verify", "n_theta", 50),
            cfg.int("verify", "n_k", 20),
            seed,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = verify_oib_grid(model, cert, grid, tol)
    payload = {"command": "verify", "model": which, "backend": _accel.BACKEND, **report.to_dict()}
    write_json(out / "verify.json", payload)
    status = "PASS" if report.passed else "FAIL"
    print(f"verify[{which}]: {status} on {report.points_checked} points, {len(report.violations)} violations")
    return EXIT_OK if report.passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def _audit_setup(cfg, horizon, k0):
    which = cfg.str("audit", "model", "theorem3", ("theorem3", "scalar", "consensus"))
    if which == "consensus":
        agent = _consensus_block(cfg)
        model, noise = build_consensus_model(agent, horizon, k0)
        return model, consensus_metric(agent), noise, consensus_budget(agent, horizon, k0)
    if which == "scalar":
        model = scalar_model(cfg.float("audit", "gain", 0.5))
        metric = identity_metric(1)
    else:
        p = _theorem3_block(cfg)
        model = _family(cfg, p["n"])
        metric = augmented_metric(p["n"])
    source = cfg.str("audit", "noise", "design", ("design", "constant"))
    if source == "constant":
        eps = _epsilon(cfg, horizon, k0)
        b = cfg.float("audit", "b", _REQUIRED)
        if not b > 0:
            raise ConfigError("audit.b", "must be positive")
        noise = NoiseSchedule.constant(b, horizon, k0)
    else:
        _, eps, noise, _ = _designed(cfg, horizon, k0)
    return model, metric, noise, eps


def cmd_audit(cfg, args, out):
    horizon, k0, seed, _ = _run_block(cfg, args)
    model, metric, noise, eps = _audit_setup(cfg, horizon, k0)
    pairs = cfg.str("audit", "pairs", "explicit", ("explicit", "ball"))
    if pairs == "explicit":
        xa = np.array(cfg.vector("audit", "xa", _REQUIRED))
        xb = np.array(cfg.vector("audit", "xb", _REQUIRED))
        for key, x in (("audit.xa", xa), ("audit.xb", xb)):
            if x.shape != (model.state_dim,):
                raise ConfigError(key, f"expected {model.state_dim} coordinates, got {x.size}")
        report = privacy_loss(model, xa, xb, noise, k0, horizon, eps)
    else:
        center = np.array(cfg.vector("audit", "center", _REQUIRED))
        if center.shape != (model.state_dim,):
            raise ConfigError("audit.center", f"expected {model.state_dim} coordinates, got {center.size}")
        zeta = cfg.float("audit", "zeta", 1.0)
        n_samples = cfg.int("audit", "n_samples", 64)
        try:
            report = worst_pair_search(model, metric, center, zeta, noise, eps, k0, horizon, n_samples, seed)
        except ValueError as exc:
            raise ConfigError("audit.center", str(exc)) from None
    write_csv(out / "audit.csv", report.rows(), AUDIT_COLUMNS)
    write_json(out / "audit.json", {"command": "audit", "pairs": pairs, **report.to_dict()})
    status = "PASS" if report.satisfied else "FAIL"
    print(f"audit: {status}, final L = {report.cumulative_loss[-1]:.6g}, margin = {report.margin:.6g}")
    return EXIT_OK if report.satisfied else EXIT_FAILED


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------

def _reproduce_section5(cfg, args, out, seed):
    horizon = cfg.int("section5", "horizon", 100)
    n_seeds = cfg.int("section5", "n_seeds", 20)
    r0 = tuple(cfg.vector("section5", "r0", "100, 0"))
    if len(r0) != 2:
        raise ConfigError("section5.r0", "expected two coordinates")
    if horizon < 1 or n_seeds < 1:
        raise ConfigError("section5.horizon", "horizon and n_seeds must be positive")
    try:
        rep = reproduce_section5(args.paper_constants, horizon, n_seeds, seed, r0)
    except HypothesisError as exc:
        raise ConfigError("section5.r0", str(exc)) from None
    write_csv(out / "table.csv", rep.table, TABLE_COLUMNS)
    for key in ("b", "b_tilde"):
        write_csv(out / f"section5_{key}.csv", section5_rows(rep, key), SECTION5_COLUMNS)
    fig = rep.figure3
    write_csv(
        out / "figure3.csv",
        ({"k": j, "y_a1": fig["y_a"][j, 0], "y_a2": fig["y_a"][j, 1], "y_b1": fig["y_b"][j, 0], "y_b2": fig["y_b"][j, 1]}
         for j in range(len(fig["y_a"]))),
        ["k", "y_a1", "y_a2", "y_b1", "y_b2"],
    )
    summary = {
        "constants": rep.constants,
        "flags": rep.flags,
        "tradeoff": rep.tradeoff,
        "privacy": {key: rep.losses[key].to_dict() for key in rep.losses},
        "figure3_omega": list(fig["omega"]),
    }
    return rep.table, summary, all(rep.flags.values())


def _reproduce_example1(cfg):
    res = reproduce_example1(
        cfg.float("example1", "zeta", 1.0),
        cfg.float("example1", "eps_total", 1.0),
        tuple(cfg.vector("example1", "row_weights", "0.2, 0.3")),
        cfg.int("example1", "horizon", 50),
    )
    table = [{**r, "note": ""} for r in res["rows"]]
    audits = {chart: rep.to_dict() for chart, rep in res["audits"].items()}
    ok = all(rep.satisfied for rep in res["audits"].values())
    return table, {"audits": audits}, ok


def _reproduce_theorem3(cfg, tol):
    cert, report = reproduce_theorem3(
        cfg.float("theorem3", "lambda", 0.9),
        cfg.float("theorem3", "lambda_bar", 1.0),
        cfg.float("theorem3", "mu", 1.0),
        cfg.float("theorem3", "theta_bar", 0.9),
        cfg.int("verify", "n_z", 50),
        cfg.int("verify", "n_theta", 50),
        cfg.int("verify", "n_k", 20),
        tol,
    )
    table = [
        {"quantity": "beta", "computed": cert.params["beta"], "paper": None, "rel_error": None, "note": ""},
        {"quantity": "c2", "computed": cert.c2, "paper": None, "rel_error": None, "note": "max(theta_bar beta, 1)"},
        {"quantity": "grid points checked", "computed": report.points_checked, "paper": None, "rel_error": None,
         "note": "passed" if report.passed else "failed"},
    ]
    return table, {"grid": report.to_dict()}, report.passed


def cmd_reproduce(cfg, args, out):
    _, _, seed, tol = _run_block(cfg, args)
    which = args.which
    cfg._record("reproduce", "which", which)
    cfg._record("reproduce", "paper_constants", bool(args.paper_constants))
    if which == "section5":
        table, summary, ok = _reproduce_section5(cfg, args, out, seed)
    elif which == "example1":
        table, summary, ok = _reproduce_example1(cfg)
        write_csv(out / "table.csv", table, TABLE_COLUMNS)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table, summary, ok = _reproduce_theorem3(cfg, tol)
        write_csv(out / "table.csv", table, TABLE_COLUMNS)
    write_json(out / "reproduce.json", {"command": "reproduce", "which": which, "all_checks_passed": ok,
                                        "table": table, **summary})
    for r in table:
        paper = "" if r["paper"] is None else f" (paper {r['paper']:.6g})"
        print(f"{r['quantity']}: {r['computed']:.6g}{paper}")
    print(f"reproduce[{which}]: {'all checks passed' if ok else 'some checks failed'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _common(suppress):
    # subcommand copies use SUPPRESS so they do not clobber flags given first
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file", **kw)
    common.add_argument("--seed", type=int, metavar="N", help="override run.seed", **kw)
    common.add_argument("--out", metavar="DIR", help="output directory (default: results)", **kw)
    common.add_argument("--paper-constants", action="store_true",
                        help="use the printed case-study constants instead of recomputed ones", **kw)
    common.add_argument("--tol", type=float, metavar="FLOAT", help="override run.tol", **kw)
    return common


def build_parser():
    parser = argparse.ArgumentParser(prog="dpcontract", description=__doc__.splitlines()[0], parents=[_common(False)])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(True)
    sub.add_parser("design", parents=[common], help="design a Laplace noise schedule")
    sub.add_parser("verify", parents=[common], help="check a contraction certificate on a grid")
    sub.add_parser("audit", parents=[common], help="exact privacy-loss audit")
    rep = sub.add_parser("reproduce", parents=[common], help="reproduce a case study")
    rep.add_argument("which", choices=("example1", "theorem3", "section5"))
    return parser


COMMANDS = {"design": cmd_design, "verify": cmd_verify, "audit": cmd_audit, "reproduce": cmd_reproduce}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out or "results")
    try:
        cfg = Config.load(args.config)
        code = COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScheduleError, HypothesisError) as exc:
        print(f"error: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest = {
        "command": args.command,
        "argv": argv,
        "version": __version__,
        "backend": _accel.BACKEND,
        "config_file": args.config,
        "config": cfg.resolved,
        "exit_code": code,
    }
    if args.command == "reproduce":
        manifest["which"] = args.which
    write_json(out / "manifest.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
