"""Command-line front end: ``zeno-dephase run | recipe | oracle-check``.

A run is described by one JSON document (see ``DEFAULTS``); ``--set``
flags override individual keys with dotted paths, e.g.
``--set bath.beta=0.25 --set schedule.tau.points=100``. Output is a table
(CSV or JSON) with ``tau`` as the first column plus a metadata block that
records the fully resolved config, so feeding the metadata back through
``--config`` reproduces the same bytes.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata as importlib_metadata

from . import oracle_checks
from .bath import OHMIC, BathSpec, KernelSet, QuadratureOptions
from .collective import coherent_weights, gamma_rate_collective, survival_chi_modulus, survival_collective
from .correlated import survival_with_backaction
from .crossover import GridSpec, default_jobs, find_crossovers
from .errors import ConfigError, ZenoError
from .master_equation import DissipativeRateCurve
from .single_spin import PreparedState, decay_rate_rwa, gamma_rate, survival_one_interval

MODES = ("single", "collective", "correlated", "master", "crossover", "oracle-check", "rwa", "interaction")
CURVES = ("single", "collective", "correlated", "master")

DEFAULTS = {
    "mode": "single",
    "label": "",
    "bath": None,  # required except for oracle-check and interaction
    "system": {"J": 0.5, "theta": math.pi / 2, "phi": 0.0, "omega0": 0.0, "delta": 0.0, "rotation": True},
    "schedule": {"tau": {"start": 0.01, "stop": 5.0, "points": 200, "kind": "geometric"}, "N": 1},
    "output": {"path": None, "format": "csv"},
    "numerics": {
        "abs_tol": 1e-10,
        "rel_tol": 1e-8,
        "me_step": None,
        "term_budget": 100_000_000,
        "symmetric": False,
        "include_delta": True,
    },
    "crossover": {"curve": "single", "refine": True, "rel_tol": 1e-4},
    "interaction": {"chi": 1.0},
}

COLUMNS = {
    "single": ["tau", "gamma_rate", "N", "J", "survival"],
    "collective": ["tau", "gamma_rate", "N", "J", "survival"],
    "correlated": ["tau", "gamma_rate", "N", "J", "survival", "term_count"],
    "master": ["tau", "gamma_rate", "N", "J", "survival", "delta"],
    "rwa": ["tau", "gamma_rate", "N", "J", "omega0"],
    "interaction": ["tau", "survival", "J", "chi"],
    "crossover": ["tau", "gamma_rate", "kind", "curve"],
    "oracle-check": ["tau", "check", "N", "J", "beta", "error", "tolerance", "passed"],
}


# ---------------------------------------------------------------------------
# config handling


def _merge(defaults, given, prefix=""):
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError(f"invalid value for {prefix or 'config'}: expected an object")
    out = {}
    for key in given:
        if key not in defaults:
            raise ConfigError(f"unknown key: {prefix}{key}")
    for key, default in defaults.items():
        value = given.get(key, default) if key in given else copy.deepcopy(default)
        if isinstance(default, dict) and key != "bath":
            value = _merge(default, given.get(key), f"{prefix}{key}.")
        out[key] = value
    return out


def set_key(config, dotted, raw):
    """Apply one ``--set key=value``; the value is parsed as JSON when possible."""
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = dotted.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def _number(section, key, prefix, positive=False, integer=False, allow_none=False):
    value = section[key]
    name = f"{prefix}.{key}"
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"invalid value for {name}: {value!r} is not a number")
    if integer and int(value) != value:
        raise ConfigError(f"invalid value for {name}: {value!r} is not an integer")
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"invalid value for {name}: {value!r}")
    return int(value) if integer else float(value)


def resolve(raw) -> dict:
    """Fill defaults and validate; every rejection names the offending key."""
    cfg = _merge(DEFAULTS, raw or {})
    mode = cfg["mode"]
    if mode not in MODES:
        raise ConfigError(f"invalid value for mode: {mode!r} (valid: {', '.join(MODES)})")
    if mode not in ("oracle-check", "interaction"):
        if cfg["bath"] is None:
            raise ConfigError("missing key: bath.kind")
    if cfg["bath"] is not None:
        cfg["bath"] = BathSpec.from_dict(cfg["bath"]).to_dict()
    system = cfg["system"]
    for key in ("J", "theta", "phi", "omega0", "delta"):
        system[key] = _number(system, key, "system")
    tau = cfg["schedule"]["tau"]
    tau["start"] = _number(tau, "start", "schedule.tau")
    tau["stop"] = _number(tau, "stop", "schedule.tau", positive=True)
    tau["points"] = _number(tau, "points", "schedule.tau", positive=True, integer=True)
    if tau["kind"] not in ("geometric", "linear"):
        raise ConfigError(f"invalid value for schedule.tau.kind: {tau['kind']!r}")
    if tau["start"] > tau["stop"] or (tau["kind"] == "geometric" and tau["start"] <= 0):
        raise ConfigError(f"invalid value for schedule.tau.start: {tau['start']!r} "
                          f"(needs {'0 < ' if tau['kind'] == 'geometric' else ''}start <= stop)")
    cfg["schedule"]["N"] = _number(cfg["schedule"], "N", "schedule", positive=True, integer=True)
    if cfg["output"]["format"] not in ("csv", "json"):
        raise ConfigError(f"invalid value for output.format: {cfg['output']['format']!r}")
    num = cfg["numerics"]
    _number(num, "abs_tol", "numerics", positive=True)
    _number(num, "rel_tol", "numerics", positive=True)
    _number(num, "me_step", "numerics", positive=True, allow_none=True)
    _number(num, "term_budget", "numerics", positive=True)
    if cfg["crossover"]["curve"] not in CURVES:
        raise ConfigError(f"invalid value for crossover.curve: {cfg['crossover']['curve']!r}")
    _number(cfg["interaction"], "chi", "interaction")
    return cfg


def load_config(path):
    """Read a config file; run metadata (from a previous output) is accepted too."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "metadata" in doc:
        doc = doc["metadata"]
    if isinstance(doc, dict) and "config" in doc and "package" in doc:
        doc = doc["config"]
    return doc


# ---------------------------------------------------------------------------
# computation


class Run:
    def __init__(self, cfg, jobs=1):
        self.cfg = cfg
        self.jobs = jobs
        num = cfg["numerics"]
        self.options = QuadratureOptions(abs_tol=num["abs_tol"], rel_tol=num["rel_tol"])
        sysc = cfg["system"]
        self.J = sysc["J"]
        self.state = PreparedState(sysc["theta"], sysc["phi"])
        if cfg["bath"] is not None:
            self.bath = BathSpec.from_dict(cfg["bath"])
            self.kernels = KernelSet(self.bath, self.options, num["include_delta"])

    def grid(self):
        t = self.cfg["schedule"]["tau"]
        return GridSpec(t["start"], t["stop"], t["points"], t["kind"]).values()

    def _map(self, fn, items):
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def curve(self, kind):
        """(rate_curve, row_builder) for one of the rate-producing modes."""
        sysc, num = self.cfg["system"], self.cfg["numerics"]
        N = self.cfg["schedule"]["N"]
        if kind == "single":
            def rate(tau):
                return gamma_rate(tau, self.state, self.kernels)

            def row(tau):
                return [tau, rate(tau), 1, 0.5, survival_one_interval(tau, self.state, self.kernels)]
            return rate, row
        if kind == "collective":
            w = coherent_weights(self.J, sysc["theta"], sysc["phi"])

            def rate(tau):
                return gamma_rate_collective(tau, w, self.kernels)

            def row(tau):
                return [tau, rate(tau), 1, self.J, survival_collective(tau, w, self.kernels)]
            return rate, row
        if kind == "correlated":
            w = coherent_weights(self.J, sysc["theta"], sysc["phi"])

            def result(tau):
                return survival_with_backaction(tau, N, w, self.kernels, budget=num["term_budget"],
                                                symmetric=num["symmetric"])

            def row(tau):
                r = result(tau)
                return [tau, r.rate, N, self.J, r.survival, r.term_count]
            return (lambda tau: result(tau).rate), row
        if kind == "master":
            curve = DissipativeRateCurve(self.J, sysc["omega0"], sysc["delta"], self.bath,
                                         float(self.grid().max()), step=num["me_step"],
                                         theta=sysc["theta"], phi=sysc["phi"],
                                         rotation=sysc["rotation"], options=self.options)

            def row(tau):
                r = curve(tau)
                return [tau, r, 1, self.J, math.exp(-r * tau), sysc["delta"]]
            return curve, row
        raise ConfigError(f"invalid value for crossover.curve: {kind!r}")

    def rows(self):
        mode = self.cfg["mode"]
        sysc = self.cfg["system"]
        if mode == "oracle-check":
            rows = [r.as_row() for r in oracle_checks.run_all()]
            return [[r[c] for c in COLUMNS[mode]] for r in rows]
        taus = [float(t) for t in self.grid()]
        if mode == "rwa":
            def row(tau):
                return [tau, decay_rate_rwa(tau, sysc["omega0"], self.bath, self.options), 1, 0.5, sysc["omega0"]]
            return self._map(row, taus)
        if mode == "interaction":
            w = coherent_weights(self.J, sysc["theta"], sysc["phi"])
            chi = self.cfg["interaction"]["chi"]
            return [[tau, survival_chi_modulus(tau, w, chi), self.J, chi] for tau in taus]
        if mode == "crossover":
            cc = self.cfg["crossover"]
            rate, _ = self.curve(cc["curve"])
            t = self.cfg["schedule"]["tau"]
            report = find_crossovers(rate, t["start"], t["stop"], samples=t["points"], grid=t["kind"],
                                     rel_tol=cc["rel_tol"], refine=cc["refine"], jobs=self.jobs)
            return [[e.tau, e.rate, e.kind, cc["curve"]] for e in report.extrema]
        _, row = self.curve(mode)
        return self._map(row, taus)


def _package_version():
    try:
        return importlib_metadata.version("zeno-dephase")
    except importlib_metadata.PackageNotFoundError:
        return "unknown"


def metadata(cfg):
    return {
        "package": "zeno-dephase",
        "version": _package_version(),
        "config": cfg,
        "quadrature": {
            "abs_tol": cfg["numerics"]["abs_tol"],
            "rel_tol": cfg["numerics"]["rel_tol"],
            "order": QuadratureOptions().order,
            "cutoffs": QuadratureOptions().cutoffs,
        },
    }


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def render(cfg, rows):
    """(main text, metadata text or None) for the configured format."""
    columns = COLUMNS[cfg["mode"]]
    meta = metadata(cfg)
    if cfg["output"]["format"] == "json":
        doc = {"metadata": meta, "columns": columns,
               "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1) + "\n", None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue(), json.dumps(meta, indent=1) + "\n"


def execute(cfg, jobs=1):
    """Compute and write the output; returns the process exit status."""
    rows = Run(cfg, jobs).rows()
    text, meta = render(cfg, rows)
    path = cfg["output"]["path"]
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if meta is not None:
            with open(path + ".meta.json", "w", encoding="utf-8") as fh:
                fh.write(meta)
    if cfg["mode"] == "oracle-check":
        failed = [r for r in rows if not r[-1]]
        for r in failed:
            print(f"oracle check failed: {r[1]} N={r[2]} J={r[3]} error={r[5]:.3e} > {r[6]:g}",
                  file=sys.stderr)
        return 2 if failed else 0
    return 0


# ---------------------------------------------------------------------------
# figure recipes


def _ohmic(G, omega_c, beta):
    return {"kind": OHMIC, "G": G, "omega_c": omega_c, "beta": None if math.isinf(beta) else beta}


def _linear(stop, points):
    return {"start": stop / points, "stop": stop, "points": points, "kind": "linear"}


def _geometric(start, stop, points):
    return {"start": start, "stop": stop, "points": points, "kind": "geometric"}


def _config(label, mode, bath, tau, J=0.5, N=1, **system):
    cfg = {"label": label, "mode": mode, "bath": bath, "schedule": {"tau": tau, "N": N},
           "system": {"J": J, **system}}
    return resolve(cfg)


def _recipes():
    fig1_tau = _geometric(1e-3, 5.0, 400)
    supp_tau = _geometric(0.01, 20.0, 300)
    supp = _ohmic(0.2, 1.0, math.inf)
    fig3 = _linear(0.4, 200)
    fig3b = _linear(1.2, 120)
    return {
        "fig1": [
            _config("solid", "single", _ohmic(0.01, 15, 1.0), fig1_tau),
            _config("omega_c=10", "single", _ohmic(0.01, 10, 1.0), fig1_tau),
            _config("beta=0.25", "single", _ohmic(0.01, 15, 0.25), fig1_tau),
            _config("G=0.005", "single", _ohmic(0.005, 15, 1.0), fig1_tau),
        ],
        "fig2a": [
            _config(f"J={J}", "collective", _ohmic(0.01, 50, 1.0), _linear(2.0, 400), J=J)
            for J in (1, 2, 50)
        ],
        "fig2b": [
            _config(f"delta={d}", "master", _ohmic(0.01, 50, 1.0), _linear(1.0, 400), J=2,
                    omega0=0.1, delta=d)
            for d in (0.0, 0.1, 1.0)
        ],
        "fig3a": [
            cfg
            for G, tag in ((0.5, "main"), (0.05, "inset"))
            for cfg in (
                _config(f"{tag} uncorrelated", "single", _ohmic(G, 15, 1.0), fig3),
                _config(f"{tag} N=3", "correlated", _ohmic(G, 15, 1.0), fig3, N=3),
                _config(f"{tag} N=5", "correlated", _ohmic(G, 15, 1.0), fig3, N=5),
            )
        ],
        "fig3b": [
            _config("uncorrelated", "collective", _ohmic(0.05, 15, 1.0), fig3b, J=5),
            _config("N=3", "correlated", _ohmic(0.05, 15, 1.0), fig3b, J=5, N=3),
        ],
        "supp1": [
            _config("rwa", "rwa", supp, supp_tau),
            _config("dephasing", "single", supp, supp_tau),
        ],
        "supp2": [
            _config("rwa", "rwa", _ohmic(0.2, 1.0, 1.0), supp_tau),
            _config("dephasing", "single", _ohmic(0.2, 1.0, 1.0), supp_tau),
        ],
        "supp3": [
            _config("rwa", "rwa", _ohmic(0.5, 1.0, math.inf), supp_tau),
            _config("N=3", "correlated", _ohmic(0.5, 1.0, math.inf), supp_tau, N=3),
        ],
        "supp4": [
            _config("rwa", "rwa", supp, supp_tau, omega0=1.0),
            _config("dephasing", "single", supp, supp_tau, omega0=1.0),
        ],
        "supp5": [
            _config("rwa", "rwa", supp, supp_tau, theta=math.pi / 4),
            _config("dephasing", "single", supp, supp_tau, theta=math.pi / 4),
        ],
        "supp6": [
            _config(f"J={J}", "interaction", None, _linear(2 * math.pi, 400), J=J)
            for J in (1, 2)
        ],
    }


RECIPE_NAMES = ("fig1", "fig2a", "fig2b", "fig3a", "fig3b", "supp1", "supp2", "supp3", "supp4", "supp5", "supp6")


def figure_recipe(name):
    """Configs that reproduce every curve of one figure, one per curve."""
    if name not in RECIPE_NAMES:
        raise ConfigError(f"unknown recipe {name!r}; valid names: {', '.join(RECIPE_NAMES)}")
    return _recipes()[name]


# ---------------------------------------------------------------------------
# entry point


def _parser():
    p = argparse.ArgumentParser(prog="zeno-dephase", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON run config (or metadata of a previous run)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key, dotted path; repeatable")
        sp.add_argument("--output", metavar="PATH", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--jobs", type=int, default=None,
                        help="parallel workers (default: $ZENO_DEPHASE_JOBS or 1)")

    common(sub.add_parser("run", help="compute one table from a config"))
    common(sub.add_parser("oracle-check", help="compare against the truncated Fock-space oracle"))
    rp = sub.add_parser("recipe", help="emit the configs behind a figure")
    rp.add_argument("name", help=f"one of {', '.join(RECIPE_NAMES)}")
    rp.add_argument("--output", metavar="DIR", help="write one config file per curve into DIR")
    return p


def _build_config(args):
    raw = load_config(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw = copy.deepcopy(raw)
    if args.command == "oracle-check":
        raw["mode"] = "oracle-check"
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        set_key(raw, key.strip(), value)
    if args.output is not None:
        raw.setdefault("output", {})["path"] = args.output
    if args.format is not None:
        raw.setdefault("output", {})["format"] = args.format
    return resolve(raw)


def _recipe(args):
    configs = figure_recipe(args.name)
    if args.output is None:
        sys.stdout.write(json.dumps(configs, indent=1) + "\n")
        return 0
    os.makedirs(args.output, exist_ok=True)
    for i, cfg in enumerate(configs):
        slug = "".join(c if c.isalnum() or c in "-." else "_" for c in cfg["label"])
        path = os.path.join(args.output, f"{args.name}-{i}-{slug}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(cfg, indent=1) + "\n")
        print(path)
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "recipe":
            return _recipe(args)
        jobs = args.jobs if args.jobs is not None else default_jobs()
        if jobs < 1:
            raise ConfigError("invalid value for --jobs: must be at least 1")
        return execute(_build_config(args), jobs)
    except ZenoError as exc:
        print(f"zeno-dephase: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
