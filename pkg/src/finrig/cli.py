"""Command-line experiment runner.

Each subcommand builds maps from a JSON config, runs one pipeline and writes
CSV tables, a plain-text log and ``summary.json`` (written last, so its
presence marks a complete run). Exit codes: 0 success, 2 invalid config,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .circle_map import conjugate_map, map_from_spec
from .cones import certified_decay_table, contraction_certificate, theta_seminorm
from .conjugacy import (
    build_hN,
    c0_distance,
    c1_distance,
    cdf_error,
    conjugacy_point,
    conjugacy_residual,
    conjugated_map,
    equidistribution_error,
    fit_rate,
    periodic_data_defect,
)
from .errors import ENUMERATION_BUDGET, ConvergenceError, ValidationError
from .periodic import bowen_measure, periodic_points
from .symbolic import (
    CylinderFunction,
    cylinder_decomposition_sum,
    equilibrium_data,
    periodic_sum,
)
from .transfer import DENSITY_BAND, cdf, invariant_density, pressure

KINDS = ("density", "periodic", "equidist", "conjugacy", "cones", "shift-exact", "suite")
EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENT = 0, 2, 3

TEST_FUNCTIONS = {
    "x": lambda x: np.asarray(x, dtype=np.float64),
    "sin": lambda x: np.sin(2 * np.pi * np.asarray(x)),
    "cos": lambda x: np.cos(2 * np.pi * np.asarray(x)),
    "one": lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
}

#: Every CSV column the runner may emit, with its meaning.
COLUMNS = {
    "node": "grid node i/G",
    "value": "function value at the node",
    "word": "itinerary word of the periodic point",
    "point": "periodic point in [0, 1)",
    "birkhoff": "Birkhoff sum S_N psi at the point",
    "weight": "Bowen-measure weight exp(S_N psi)/Z_N",
    "N": "period / word length",
    "count": "number of distinct period-N points",
    "Z": "partition function Z_N",
    "Z_scaled": "Z_N exp(-N P)",
    "error": "equidistribution error |int phi d mu^N - int phi d mu|",
    "cdf_error": "sup-norm CDF discrepancy of mu^N",
    "cdf_error_f": "CDF discrepancy for f",
    "cdf_error_g": "CDF discrepancy for g",
    "c0_h": "C^0 distance between h and h_N",
    "c1_f": "C^1 distance between f and f_N",
    "defect": "max periodic multiplier mismatch at period N",
    "n": "iterate / word length",
    "lhs": "exact ||L^n phi - int phi||_theta",
    "bound": "certified bound 2 C tau^n (...)",
    "periodic_sum": "sum over period-n words of exp(S_n psi) phi",
    "cylinder_sum": "cylinder-decomposition side of the same sum",
    "relative_gap": "|periodic_sum - cylinder_sum| / max(1, |periodic_sum|)",
}


@dataclass
class ExperimentConfig:
    """Everything a run depends on; round-trips through JSON."""

    kind: str = "suite"
    map: dict = field(default_factory=lambda: {"family": "trig", "degree": 2, "coeffs": [0.5]})
    base: dict = field(default_factory=lambda: {"family": "trig", "degree": 2, "coeffs": []})
    a: float | None = 0.2
    n_min: int = 3
    n_max: int = 10
    grid: int = 1 << 12
    tol: float = 1e-12
    threads: int = 1
    phi: str = "x"
    theta: float = 0.5
    xi: float = 0.75
    M: float = 0.0
    psi: list = field(default_factory=lambda: [math.log(1 / 3), math.log(2 / 3)])
    shift_phi: dict = field(default_factory=lambda: {"s": 2, "depth": 2, "values": [1.0, 0.0, 0.0, 0.0]})
    density_band: float = DENSITY_BAND
    gnuplot: bool = False
    out: str = "finrig-out"

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - names)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        return cls(**obj)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def _uses_enumeration(kind):
    return kind in ("periodic", "equidist", "conjugacy", "shift-exact", "suite")


def _map_violations(spec, label):
    out = []
    try:
        map_from_spec(spec)
    except ValidationError as exc:
        code = "not-expanding" if "not expanding" in str(exc) else "bad-map"
        if "diffeomorphism" in str(exc):
            code = "not-diffeomorphism"
        out.append(Violation(code, f"{label}: {exc}"))
    except (KeyError, TypeError, ValueError) as exc:
        out.append(Violation("bad-map", f"{label}: malformed spec ({exc})"))
    return out


def _degree(spec):
    while spec.get("family") == "conjugated":
        spec = spec["base"]
    return int(spec.get("degree", 0))


def validate(config):
    """All budget and parameter violations of ``config``; never raises."""
    v = []
    try:
        if config.kind not in KINDS:
            v.append(Violation("unknown-kind", f"kind must be one of {KINDS}, got {config.kind!r}"))
        v += _map_violations(config.map, "map")
        v += _map_violations(config.base, "base")
        if config.a is not None and not abs(config.a) < 1:
            v.append(Violation("not-diffeomorphism", f"conjugation parameter |a| must be < 1, got {config.a}"))
        if config.n_min < 1 or config.n_max < config.n_min:
            v.append(Violation("bad-range", f"need 1 <= n_min <= n_max, got {config.n_min}..{config.n_max}"))
        if _uses_enumeration(config.kind):
            for label in ("map", "base"):
                d = _degree(getattr(config, label))
                if d >= 2 and d ** config.n_max > ENUMERATION_BUDGET:
                    v.append(Violation(
                        "enumeration-budget",
                        f"{label}: {d}**{config.n_max} words exceeds the budget of 2**24",
                    ))
            s = len(config.psi)
            if config.kind in ("shift-exact", "suite") and s >= 2 and s ** config.n_max > ENUMERATION_BUDGET:
                v.append(Violation("enumeration-budget", f"shift: {s}**{config.n_max} words exceeds 2**24"))
        if config.grid < 256:
            v.append(Violation("grid-too-small", f"grid must be >= 256, got {config.grid}"))
        if config.tol < 1e-13:
            v.append(Violation("tolerance", f"tolerance must be >= 1e-13, got {config.tol}"))
        if config.threads < 1:
            v.append(Violation("threads", f"threads must be >= 1, got {config.threads}"))
        if config.phi not in TEST_FUNCTIONS:
            v.append(Violation("unknown-test-function", f"phi must be one of {sorted(TEST_FUNCTIONS)}"))
        if not 0 < config.theta < config.xi < 1:
            v.append(Violation("cone-parameters", f"need 0 < theta < xi < 1, got {config.theta}, {config.xi}"))
        if config.M < 0:
            v.append(Violation("cone-parameters", f"M must be >= 0, got {config.M}"))
        if config.kind in ("cones", "suite") and config.n_max > 30:
            v.append(Violation("certificate-range", "certified decay is checked for n <= 30"))
        if len(config.psi) < 2:
            v.append(Violation("bad-potential", "psi needs one value per symbol (>= 2 symbols)"))
        try:
            phi = CylinderFunction.from_json(config.shift_phi)
            if phi.s != len(config.psi):
                v.append(Violation("bad-potential", "shift_phi and psi use different alphabets"))
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            v.append(Violation("bad-shift-function", str(exc)))
        if config.kind in ("conjugacy", "suite") and not any(x.code == "bad-map" for x in v):
            if _degree(config.base) != _degree(config.map) and config.a is None:
                v.append(Violation("degree-mismatch", "map and base have different degrees"))
    except Exception as exc:  # validation must never throw
        v.append(Violation("malformed-config", repr(exc)))
    return v


class Table:
    def __init__(self, name, columns, rows):
        self.name, self.columns, self.rows = name, list(columns), rows

    def check_schema(self):
        missing = [c for c in self.columns if c not in COLUMNS]
        if missing:
            raise ValidationError(f"table {self.name}: undocumented columns {missing}")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError(f"table {self.name}: row width {len(row)} != {len(self.columns)}")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fit(rows, col, ncol=0):
    try:
        return fit_rate([(r[ncol], r[col]) for r in rows]).as_dict()
    except ValidationError as exc:
        return {"fit": None, "reason": str(exc)}


def _map_N(config, fn):
    Ns = list(range(config.n_min, config.n_max + 1))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(fn, Ns))
    return [fn(N) for N in Ns]


def _conjugated_pair(config):
    """``(f, g)``: ``f`` is ``base`` conjugated by ``a``, or ``map`` when ``a`` is None."""
    g = map_from_spec(config.base)
    if config.a is None:
        return map_from_spec(config.map), g
    return conjugate_map(g, config.a), g


def run_density(config, log):
    f = map_from_spec(config.map)
    rho, it = invariant_density(f, config.grid, config.tol)
    I = cdf(rho)
    band = rho.band(config.density_band)
    log(f"density: G={config.grid} iterations={it} min={band['min']:.6g} max={band['max']:.6g}")
    if not band["ok"]:
        log(f"density: outside the diagnostic band [1/{config.density_band}, {config.density_band}]")
    tables = [
        Table("density", ["node", "value"], list(zip(rho.grid.nodes, rho.values))),
        Table("cdf", ["node", "value"], list(zip(I.nodes, I.values))),
    ]
    summary = {
        "map": f.to_spec(),
        "iterations": it,
        "pressure": pressure(f, None, config.grid, config.tol),
        "band": band,
        "holder_quotient": rho.holder_quotient(),
    }
    return tables, summary


def run_periodic(config, log):
    f = map_from_spec(config.map)

    def one(N):
        mu = bowen_measure(f, None, N)
        return N, mu

    results = _map_N(config, one)
    tables, rows = [], []
    for N, mu in results:
        rows.append((N, mu.atoms.size, mu.Z, mu.Z))
        tables.append(Table(f"periodic_N{N}", ["word", "point", "birkhoff", "weight"], [
            ("".join(str(int(c)) for c in w), x, s, wt)
            for w, x, s, wt in zip(mu.words, mu.atoms, mu.birkhoff, mu.weights)
        ]))
        log(f"periodic: N={N} count={mu.atoms.size} Z={mu.Z!r}")
    tables.insert(0, Table("partition", ["N", "count", "Z", "Z_scaled"], rows))
    scaled = np.array([r[3] for r in rows])
    summary = {"map": f.to_spec(), "partition_bound": float(max(scaled.max(), (1 / scaled).max()))}
    return tables, summary


def run_equidist(config, log):
    f = map_from_spec(config.map)
    phi = TEST_FUNCTIONS[config.phi]

    def one(N):
        mu = bowen_measure(f, None, N)
        return (N, equidistribution_error(f, phi, N, grid=config.grid, mu=mu),
                cdf_error(f, N, grid=config.grid, mu=mu))

    rows = _map_N(config, one)
    for r in rows:
        log(f"equidist: N={r[0]} error={r[1]:.6e} cdf_error={r[2]:.6e}")
    summary = {"map": f.to_spec(), "phi": config.phi, "fit_error": _fit(rows, 1), "fit_cdf_error": _fit(rows, 2)}
    return [Table("equidist", ["N", "error", "cdf_error"], rows)], summary


def run_conjugacy(config, log):
    f, g = _conjugated_pair(config)
    hN = build_hN(f, g, config.grid)
    fN = conjugated_map(g, hN)
    c0_h = c0_distance(lambda x: conjugacy_point(f, g, x, 40), hN.h, config.grid)
    c1_f = c1_distance(f, fN, config.grid)
    log(f"conjugacy: c0(h, h_N)={c0_h:.3e} c1(f, f_N)={c1_f:.3e}")

    def one(N):
        return (N, cdf_error(f, N, grid=config.grid), cdf_error(g, N, grid=config.grid),
                c0_h, c1_f, periodic_data_defect(f, g, N))

    rows = _map_N(config, one)
    for r in rows:
        log(f"conjugacy: N={r[0]} cdf_f={r[1]:.3e} cdf_g={r[2]:.3e} defect={r[5]:.3e}")
    summary = {
        "f": f.to_spec(),
        "g": g.to_spec(),
        "c0_h": c0_h,
        "c1_f": c1_f,
        "max_defect": max(r[5] for r in rows),
        "conjugacy_residual": conjugacy_residual(f, g, 40),
        "fit_cdf_error_f": _fit(rows, 1),
        "fit_cdf_error_g": _fit(rows, 2),
    }
    table = Table("conjugacy", ["N", "cdf_error_f", "cdf_error_g", "c0_h", "c1_f", "defect"], rows)
    return [table, Table("h_N", ["node", "value"], list(zip(hN.h.nodes, hN.h.values)))], summary


def run_cones(config, log):
    cert = contraction_certificate(config.theta, config.M, config.xi)
    log(f"cones: Delta={cert.Delta!r} tau={cert.tau!r} C={cert.C!r}")
    psi = CylinderFunction(len(config.psi), 1, config.psi)
    phi = CylinderFunction.from_json(config.shift_phi)
    M_psi = theta_seminorm(psi, config.theta)
    lhs, rhs = certified_decay_table(psi, phi, config.n_max, theta=config.theta, xi=config.xi)
    rows = [(n, lhs[n - 1], rhs[n - 1]) for n in range(1, config.n_max + 1)]
    summary = {
        "certificate": json.loads(cert.to_json()),
        "decay": {"psi_seminorm": M_psi, "holds": bool(np.all(lhs <= rhs))},
    }
    return [Table("certified_decay", ["n", "lhs", "bound"], rows)], summary


def run_shift(config, log):
    psi = CylinderFunction(len(config.psi), 1, config.psi)
    phi = CylinderFunction.from_json(config.shift_phi)
    eq = equilibrium_data(psi)
    mean = eq.integrate(phi)

    def one(n):
        w, Z = periodic_sum(psi, phi, n)
        c = cylinder_decomposition_sum(psi, phi, n)
        return n, w, c, Z, abs(w / Z - mean), abs(w - c) / max(1.0, abs(w))

    rows = _map_N(config, one)
    for r in rows:
        log(f"shift-exact: n={r[0]} error={r[4]:.3e} gap={r[5]:.3e}")
    summary = {"pressure": eq.pressure, "integral": mean, "fit_error": _fit(rows, 4),
               "max_relative_gap": max(r[5] for r in rows)}
    cols = ["n", "periodic_sum", "cylinder_sum", "Z", "error", "relative_gap"]
    return [Table("shift", cols, rows)], summary


RUNNERS = {
    "density": run_density,
    "periodic": run_periodic,
    "equidist": run_equidist,
    "conjugacy": run_conjugacy,
    "cones": run_cones,
    "shift-exact": run_shift,
}


class _Writer:
    """Tracks written files so a failed run can be rolled back."""

    def __init__(self, out, gnuplot):
        self.out, self.gnuplot, self.written, self.created_dirs = out, gnuplot, [], []

    def _dir(self, path):
        path = os.path.normpath(path)
        if not os.path.isdir(path):
            self._dir(os.path.dirname(path) or ".")
            os.mkdir(path)
            self.created_dirs.append(path)

    def table(self, t, sub=""):
        t.check_schema()
        base = os.path.join(self.out, sub)
        self._dir(base)
        path = os.path.join(base, t.name + ".csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([_fmt(v) for v in row])
        self.written.append(path)
        if self.gnuplot:
            dat = os.path.join(base, t.name + ".dat")
            with open(dat, "w") as fh:
                fh.write("# " + " ".join(t.columns) + "\n")
                for row in t.rows:
                    fh.write(" ".join(_fmt(v) for v in row) + "\n")
            self.written.append(dat)
        return os.path.relpath(path, self.out)

    def text(self, name, content):
        self._dir(self.out)
        path = os.path.join(self.out, name)
        with open(path, "w") as fh:
            fh.write(content)
        self.written.append(path)

    def rollback(self):
        for p in reversed(self.written):
            if os.path.exists(p):
                os.remove(p)
        for d in reversed(self.created_dirs):
            if os.path.isdir(d) and not os.listdir(d):
                os.rmdir(d)


def run(config):
    """Execute an experiment; returns the process exit code."""
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"invalid config [{p.code}]: {p.message}", file=sys.stderr)
        return EXIT_INVALID
    lines = []
    log = lines.append
    writer = _Writer(config.out, config.gnuplot)
    kinds = [k for k in KINDS if k != "suite"] if config.kind == "suite" else [config.kind]
    try:
        sections, schema = {}, {}
        for kind in kinds:
            sub = kind if config.kind == "suite" else ""
            tables, summary = RUNNERS[kind](config, log)
            files = []
            for t in tables:
                rel = writer.table(t, sub)
                files.append(rel)
                schema[rel] = {c: COLUMNS[c] for c in t.columns}
            summary["tables"] = files
            sections[kind] = summary
        writer.text("log.txt", "\n".join(lines) + "\n")
        result = {"config": config.to_dict(), "schema": schema, "results": sections}
        writer.text("summary.json", json.dumps(_jsonable(result), sort_keys=True, indent=2) + "\n")
    except ValidationError as exc:
        writer.rollback()
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, FloatingPointError) as exc:
        writer.rollback()
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    except BaseException:
        writer.rollback()
        raise
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="finrig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads for independent N values")
        p.add_argument("--grid", type=int, help="grid resolution G")
        p.add_argument("--nmax", type=int, help="largest period / word length")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    obj = {}
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_INVALID
    obj["kind"] = args.kind
    for key, attr in (("out", "out"), ("threads", "threads"), ("grid", "grid"), ("n_max", "nmax")):
        val = getattr(args, attr)
        if val is not None:
            obj[key] = val
    try:
        config = ExperimentConfig.from_dict(obj)
    except (ValidationError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
