"""Command-line entry point and file formats.

State arguments are either a family shorthand (``werner:p=0.3``,
``bell:index=3``, ``tstate:t1=0.9,t2=0.8,t3=0.7``) or the path of a JSON file
holding exactly one of::

    {"format": 1, "dense": [[[re, im], ...4 entries], ...4 rows]}
    {"format": 1, "theta": [[...4 reals], ...4 rows]}
    {"format": 1, "family": "werner", "params": {"p": 0.3}}

Measure files are plain text, one atom per line as ``weight x y z``
(``#`` starts a comment), or a JSON object ``{"format": 1, "atoms": [[w, x, y, z], ...]}``
when the file name ends in ``.json``.

``analyze`` exits with 0 when unsteerability is certified, 1 when
steerability is certified, 2 when the result is marginal or inconclusive,
and a code above 2 on errors.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import ansatz, lhs_sim, qstate, radius
from .errors import InvalidState, NotTState, OutcomeOutsideBox, SteeringError

FORMAT = 1
EXIT_UNSTEERABLE, EXIT_STEERABLE, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_INVALID_STATE, EXIT_OUTSIDE_BOX, EXIT_FAILURE = 3, 4, 5, 6

VERDICT_EXIT = {
    radius.UNSTEERABLE: EXIT_UNSTEERABLE,
    radius.STEERABLE: EXIT_STEERABLE,
    radius.MARGINAL: EXIT_INCONCLUSIVE,
    radius.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}

FAMILY_PARAMS = {
    "werner": ("p",),
    "bell": ("index",),
    "tstate": ("t1", "t2", "t3"),
}


class SpecError(SteeringError, ValueError):
    """Unparseable state, measure or scan description."""


@dataclass(frozen=True)
class StateSpec:
    kind: str  # "dense" | "theta" | "family"
    data: object
    params: dict | None = None

    def build(self):
        if self.kind == "dense":
            return qstate.from_matrix(self.data)
        if self.kind == "theta":
            return qstate.from_theta(self.data)
        return family_state(self.data, self.params)


@dataclass(frozen=True)
class ScanSpec:
    family: str
    parameter: str
    start: float
    stop: float
    step: float
    fixed: dict
    out: str | None = None

    def __post_init__(self):
        if not self.step > 0:
            raise SpecError(f"scan step must be positive, got {self.step}")
        if self.start > self.stop:
            raise SpecError(f"empty scan range: start {self.start} > stop {self.stop}")
        if self.family not in FAMILY_PARAMS:
            raise SpecError(f"unknown family {self.family!r}")
        if self.parameter not in FAMILY_PARAMS[self.family]:
            raise SpecError(f"family {self.family!r} has no parameter {self.parameter!r}")

    def values(self):
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + k * self.step, 12) for k in range(n)]


def family_state(name, params):
    if name not in FAMILY_PARAMS:
        raise SpecError(f"unknown family {name!r}; expected one of {sorted(FAMILY_PARAMS)}")
    missing = [p for p in FAMILY_PARAMS[name] if p not in params]
    extra = sorted(set(params) - set(FAMILY_PARAMS[name]))
    if missing or extra:
        raise SpecError(f"family {name!r} takes parameters {FAMILY_PARAMS[name]}; "
                        f"missing {missing}, unexpected {extra}")
    if name == "werner":
        p = float(params["p"])
        if not 0.0 <= p <= 1.0:
            raise InvalidState(f"werner parameter p = {p} outside [0, 1]")
        return qstate.werner(p)
    if name == "bell":
        index = params["index"]
        if float(index) != int(float(index)):
            raise SpecError(f"bell index must be an integer, got {index}")
        return qstate.bell(int(float(index)))
    return qstate.tstate(*(float(params[k]) for k in ("t1", "t2", "t3")))


def parse_family(text):
    """Parse ``name:key=value,key=value``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise SpecError(f"in {text!r}: expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise SpecError(f"in {text!r}: field {key!r} is not a number: {value!r}") from exc
    return StateSpec("family", name.strip(), params)


def _matrix(value, field, width, complex_pairs=False):
    if not isinstance(value, list) or len(value) != 4:
        raise SpecError(f"field {field!r}: expected 4 rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != width:
            raise SpecError(f"field {field!r} row {i}: expected {width} entries")
        if complex_pairs:
            entries = []
            for j, pair in enumerate(row):
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise SpecError(f"field {field!r} row {i} column {j}: expected [re, im]")
                entries.append(complex(float(pair[0]), float(pair[1])))
            rows.append(entries)
        else:
            rows.append([float(x) for x in row])
    return np.array(rows, dtype=complex if complex_pairs else float)


def spec_from_json(obj):
    if not isinstance(obj, dict):
        raise SpecError("state file must hold a JSON object")
    if obj.get("format", FORMAT) != FORMAT:
        raise SpecError(f"unsupported format {obj.get('format')!r}; expected {FORMAT}")
    present = [k for k in ("dense", "theta", "family") if k in obj]
    if len(present) != 1:
        raise SpecError(f"state needs exactly one of dense/theta/family, found {present}")
    kind = present[0]
    if kind == "dense":
        return StateSpec("dense", _matrix(obj["dense"], "dense", 4, complex_pairs=True))
    if kind == "theta":
        return StateSpec("theta", _matrix(obj["theta"], "theta", 4))
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("field 'params': expected an object")
    return StateSpec("family", str(obj["family"]), {k: float(v) for k, v in params.items()})


def parse_state(text):
    """Family shorthand or path to a JSON state file."""
    if ":" in text and text.split(":", 1)[0] in FAMILY_PARAMS:
        return parse_family(text)
    try:
        with open(text) as fh:
            raw = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read state {text!r}: {exc.strerror}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{text}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_json(obj)


def state_to_json(state):
    dense = [[[float(z.real), float(z.imag)] for z in row] for row in state.rho]
    return {"format": FORMAT, "dense": dense}


def write_measure(measure, path):
    if str(path).endswith(".json"):
        atoms = np.column_stack([measure.weights, measure.points]).tolist()
        with open(path, "w") as fh:
            json.dump({"format": FORMAT, "atoms": atoms}, fh)
            fh.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(f"# format {FORMAT}: weight x y z\n")
        for w, n in zip(measure.weights, measure.points):
            fh.write(f"{float(w)!r} {float(n[0])!r} {float(n[1])!r} {float(n[2])!r}\n")


def read_measure(path, barycenter_target=None):
    if str(path).endswith(".json"):
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if obj.get("format") != FORMAT or "atoms" not in obj:
            raise SpecError(f"{path}: expected {{'format': 1, 'atoms': [...]}}")
        rows = obj["atoms"]
    else:
        rows = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 4:
                    raise SpecError(f"{path}: line {lineno}: expected 'weight x y z', got {len(parts)} fields")
                try:
                    rows.append([float(p) for p in parts])
                except ValueError as exc:
                    raise SpecError(f"{path}: line {lineno}: {exc}") from exc
    return ansatz.measure_from_atoms(rows, barycenter_target)


def read_axes(spec, seed):
    """``random:K`` or a file with one ``x y z`` per line."""
    if spec.startswith("random:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise SpecError(f"bad measurement count in {spec!r}") from exc
        return lhs_sim.random_axes(k, seed)
    axes = []
    with open(spec) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise SpecError(f"{spec}: line {lineno}: expected 'x y z'")
            v = np.array([float(p) for p in parts])
            axes.append(v / np.linalg.norm(v))
    return np.array(axes)


def build_ansatz(choice, state, grid=4096):
    """Resolve ``jevtic``, ``uniform``, ``grid:N`` or a measure file for a state."""
    emap = qstate.epr_map(state)
    if choice == "jevtic":
        form = qstate.canonicalize_tstate(emap)
        measure = ansatz.jevtic_grid(form.t_diag, grid)
        # canonical Bob coordinates y' = Rb y, so n = Rb^T n'
        return ansatz.SphereMeasure(measure.weights, measure.points @ form.bob_rotation,
                                    True, emap.bob_bloch, label=measure.label)
    if choice == "uniform":
        return ansatz.fibonacci_grid(grid, barycenter_target=emap.bob_bloch)
    if choice.startswith("grid:"):
        try:
            n = int(choice.split(":", 1)[1])
        except ValueError as exc:
            raise SpecError(f"bad grid size in {choice!r}") from exc
        return ansatz.fibonacci_grid(n, barycenter_target=emap.bob_bloch)
    return read_measure(choice, emap.bob_bloch)


def state_summary(state, tol):
    emap = qstate.epr_map(state)
    out = {
        "theta": state.theta.tolist(),
        "alice_bloch": emap.alice_bloch.tolist(),
        "bob_bloch": emap.bob_bloch.tolist(),
        "degenerate": emap.degenerate,
    }
    if not emap.degenerate:
        try:
            form = qstate.canonicalize_tstate(emap, tol)
            out["t_diag"] = form.t_diag.tolist()
        except (NotTState, SteeringError):
            out["t_diag"] = None
    return out


def cmd_analyze(spec, tol=radius.TSTATE_TOL, grid=1024, iters=200, seed=0, directions=2048):
    state = spec.build()
    budget = radius.OptimizerBudget(grid=grid, iters=iters, seed=seed, directions=directions,
                                    tstate_tol=tol)
    result = radius.critical_radius(state, budget)
    report = {"format": FORMAT, "command": "analyze", **state_summary(state, tol),
              "result": result.to_dict()}
    return report, VERDICT_EXIT[result.verdict]


def cmd_radius(spec, ansatz_choice="jevtic", grid=4096, directions=radius.DEFAULT_DIRECTIONS):
    state = spec.build()
    measure = build_ansatz(ansatz_choice, state, grid)
    result = radius.principal_radius(measure, qstate.epr_map(state), directions=directions)
    return {"format": FORMAT, "command": "radius", "ansatz": ansatz_choice,
            "atoms": measure.size, "result": result.to_dict()}


def cmd_optimize(spec, grid=1024, iters=200, seed=0, directions=2048,
                 final_directions=radius.DEFAULT_DIRECTIONS, measure_out=None):
    state = spec.build()
    measure, result = radius.optimize_ansatz(qstate.epr_map(state), grid, iters, seed,
                                             directions=directions,
                                             final_directions=final_directions)
    if measure_out:
        write_measure(measure, measure_out)
    return {"format": FORMAT, "command": "optimize", "grid": grid, "iters": iters, "seed": seed,
            "measure_file": measure_out, "result": result.to_dict()}


def cmd_simulate(spec, measurements="random:20", shots=10**6, seed=0, ansatz_choice="uniform",
                 grid=4096):
    state = spec.build()
    emap = qstate.epr_map(state)
    axes = read_axes(measurements, seed)
    if shots <= 0:
        return {"format": FORMAT, "shots": 0, "measurements": []}
    measure = build_ansatz(ansatz_choice, state, grid)
    models = [lhs_sim.build_response(measure, emap, x) for x in axes]
    report = lhs_sim.simulate(models, emap, shots, seed)
    report["command"] = "simulate"
    return report


SCAN_COLUMNS = ("parameter", "value", "radius", "error_estimate", "verdict", "method")


def cmd_scan(scan, **budget):
    """One CSV row per parameter value, columns ``SCAN_COLUMNS``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for value in scan.values():
        params = dict(scan.fixed, **{scan.parameter: value})
        try:
            report, _ = cmd_analyze(StateSpec("family", scan.family, params), **budget)
            res = report["result"]
            r = "inf" if res["value"] is None else repr(res["value"])
            writer.writerow([scan.parameter, repr(value), r, repr(res["error_estimate"]),
                             res["verdict"], res["method"]])
        except InvalidState:
            writer.writerow([scan.parameter, repr(value), "", "", "invalid", ""])
    text = buf.getvalue()
    if scan.out:
        with open(scan.out, "w") as fh:
            fh.write(text)
    return text


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_default) + "\n"


def _default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def _emit(obj, out):
    text = _dump(_finite(obj))
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def make_parser():
    parser = _Parser(prog="qsteer", description="Steerability of two-qubit states "
                     "under projective measurements via the critical radius of local models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, grid_default):
        p.add_argument("state", help="family shorthand (werner:p=0.3) or JSON state file")
        p.add_argument("--grid", type=int, default=grid_default, help="number of grid atoms")
        p.add_argument("--directions", type=int, default=None, help="directions in the coarse sweep")
        p.add_argument("--out", default=None, help="write the result here instead of stdout")

    p = sub.add_parser("analyze", help="critical radius and verdict")
    common(p, 1024)
    p.add_argument("--tol", type=float, default=radius.TSTATE_TOL, help="T-state marginal tolerance")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("radius", help="principal radius of one ansatz")
    common(p, 4096)
    p.add_argument("--ansatz", default="jevtic", help="jevtic | uniform | grid:N | measure file")

    p = sub.add_parser("optimize", help="ascend the principal radius over grid weights")
    common(p, 1024)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure-out", default=None, help="write the optimized measure here")

    p = sub.add_parser("simulate", help="Monte Carlo of the local hidden state strategy")
    common(p, 4096)
    p.add_argument("--ansatz", default="uniform", help="jevtic | uniform | grid:N | measure file")
    p.add_argument("--measurements", default="random:20", help="random:K or a file of axes")
    p.add_argument("--shots", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("scan", help="critical radius over a family parameter; CSV with columns "
                       + ",".join(SCAN_COLUMNS))
    p.add_argument("--family", required=True, choices=sorted(FAMILY_PARAMS))
    p.add_argument("--param", required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--fixed", default="", help="other parameters, e.g. t1=0.9,t2=0.8")
    p.add_argument("--tol", type=float, default=radius.TSTATE_TOL)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command == "scan":
            fixed = parse_family("x:" + args.fixed).params if args.fixed else {}
            scan = ScanSpec(args.family, args.param, args.start, args.stop, args.step, fixed, args.out)
            text = cmd_scan(scan, tol=args.tol)
            if not args.out:
                sys.stdout.write(text)
            return 0
        spec = parse_state(args.state)
        dirs = args.directions
        if args.command == "analyze":
            report, code = cmd_analyze(spec, args.tol, args.grid, args.iters, args.seed,
                                       dirs or 2048)
            _emit(report, args.out)
            return code
        if args.command == "radius":
            _emit(cmd_radius(spec, args.ansatz, args.grid, dirs or radius.DEFAULT_DIRECTIONS), args.out)
        elif args.command == "optimize":
            _emit(cmd_optimize(spec, args.grid, args.iters, args.seed,
                               measure_out=args.measure_out,
                               final_directions=dirs or radius.DEFAULT_DIRECTIONS), args.out)
        elif args.command == "simulate":
            _emit(cmd_simulate(spec, args.measurements, args.shots, args.seed, args.ansatz, args.grid),
                  args.out)
        return 0
    except OutcomeOutsideBox as exc:
        sys.stderr.write(f"qsteer: OutcomeOutsideBox: {exc}\n")
        return EXIT_OUTSIDE_BOX
    except InvalidState as exc:
        sys.stderr.write(f"qsteer: invalid state: {exc}\n")
        return EXIT_INVALID_STATE
    except SpecError as exc:
        sys.stderr.write(f"qsteer: {exc}\n")
        return EXIT_USAGE
    except (SteeringError, ValueError, OSError) as exc:
        sys.stderr.write(f"qsteer: {type(exc).__name__}: {exc}\n")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
