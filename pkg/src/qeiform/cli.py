"""Command line interface: characteristic functions, verdicts, bounds, witnesses.

Exit codes: 0 Holds (or success), 1 Fails, 2 Marginal, 3 invalid input,
4 unmet mathematical precondition, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .charfct import FitUnstableError, NonIntegrableError, charfct_numeric
from .minsol import DivergentIntegralError, StripError, UnknownModelError, assemble_minimal
from .numerics import GaussianTestFunction, QuadratureError
from .qei_engine import (HypothesisError, PreconditionError, build_witness_sequence,
                         constant_s_bound, decide_qei, prefactor_for_constant)
from .smodel import ConstantMatrix, SpecError, spec_from_dict
from .stress_tensor import NormalizationError, StressTensorSpec, stress_spec_from_dict

COMMANDS = ("charfct", "verdict", "bound", "witness")
EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERIC = 3, 4, 5


class ConfigError(ValueError):
    pass


def _num(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {x!r}")
    return float(x)


def _coeffs(v, path: str):
    if isinstance(v, dict):
        extra = set(v) - {"num", "den"}
        if extra:
            raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
        return {k: [_num(x, f"{path}.{k}[{i}]") for i, x in enumerate(v[k])] for k in v}
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a non-empty list of coefficients")
    return [_num(x, f"{path}[{i}]") for i, x in enumerate(v)]


@dataclass
class RunConfig:
    command: str
    model: dict
    q: dict = field(default_factory=dict)
    g: dict = field(default_factory=lambda: {"tau": 1.0, "amplitude": 1.0})
    output: str = "json"
    grid: dict = field(default_factory=dict)
    seed: int = 0
    channel: Optional[str] = None
    method: str = "auto"
    tune: Optional[dict] = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: expected an object")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"config: unknown fields {sorted(extra)}")
        cmd = data.get("command")
        if cmd not in COMMANDS:
            raise ConfigError(f"command: must be one of {COMMANDS}, got {cmd!r}")
        model = data.get("model")
        if not isinstance(model, dict) or "variant" not in model:
            raise ConfigError("model: expected {'variant': ..., 'parameters': {...}}")
        q = data.get("q", {})
        if isinstance(q, list):
            q = {"q": q}
        if not isinstance(q, dict):
            raise ConfigError("q: expected an object of coefficient lists")
        q = {k: _coeffs(v, f"q.{k}") for k, v in q.items()}
        g = {"tau": 1.0, "amplitude": 1.0}
        for k, v in dict(data.get("g", {})).items():
            if k not in g:
                raise ConfigError(f"g.{k}: unknown field")
            g[k] = _num(v, f"g.{k}")
        if not g["tau"] > 0:
            raise ConfigError("g.tau: must be positive")
        output = data.get("output", "json")
        if output not in ("json", "csv"):
            raise ConfigError("output: must be json or csv")
        grid = data.get("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("grid: expected an object")
        for k, v in grid.items():
            if k == "taus":
                if not isinstance(v, list):
                    raise ConfigError("grid.taus: expected a list")
                [_num(x, f"grid.taus[{i}]") for i, x in enumerate(v)]
            elif k in ("t_min", "t_max", "n", "j_max", "numeric"):
                _num(v, f"grid.{k}")
            else:
                raise ConfigError(f"grid.{k}: unknown field")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("seed: expected an integer")
        method = data.get("method", "auto")
        if method not in ("auto", "analytic", "generic"):
            raise ConfigError("method: must be auto, analytic or generic")
        tune = data.get("tune")
        if tune is not None:
            if not isinstance(tune, dict) or set(tune) != {"degree", "c"}:
                raise ConfigError("tune: expected {'degree': int, 'c': number}")
            _num(tune["c"], "tune.c")
            if not isinstance(tune["degree"], int) or tune["degree"] < 0:
                raise ConfigError("tune.degree: expected a non-negative integer")
        return cls(cmd, {"variant": model["variant"], "parameters": dict(model.get("parameters", {}))},
                   q, g, output, dict(grid), seed, data.get("channel"), method, tune)

    def to_dict(self) -> dict:
        out = {"command": self.command, "model": self.model, "q": self.q, "g": self.g,
               "output": self.output, "grid": self.grid, "seed": self.seed,
               "channel": self.channel, "method": self.method}
        if self.tune is not None:
            out["tune"] = self.tune
        return out

    def test_function(self) -> GaussianTestFunction:
        return GaussianTestFunction(self.g["tau"], self.g.get("amplitude", 1.0))

    def stress_spec(self) -> StressTensorSpec:
        spec = stress_spec_from_dict({"model": self.model, "q": self.q})
        if self.tune is not None:
            q = prefactor_for_constant(spec.model, self.tune["degree"], float(self.tune["c"]))
            spec = StressTensorSpec(spec.model, {"q": q}, spec.pole_factors)
        return spec


# ---------------------------------------------------------------------------
# output

def _clean(x):
    """Round floats to 15 significant digits and make the tree JSON-ready."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        if z.imag == 0.0:
            return _clean(z.real)
        return {"re": _clean(z.real), "im": _clean(z.imag)}
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.15g}")
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return str(x)


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _csv(header: dict, columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_clean(header), sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(f"{float(v):.15g}" for v in r) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands

def cmd_charfct(cfg: RunConfig) -> tuple:
    model = spec_from_dict(cfg.model)
    ch = cfg.channel
    if isinstance(model, ConstantMatrix) and model.dim > 1 and ch is None:
        ch = "+"
    msol = assemble_minimal(model, ch)
    t = np.linspace(float(cfg.grid.get("t_min", 0.0)), float(cfg.grid.get("t_max", 10.0)),
                    int(cfg.grid.get("n", 201)))
    f = msol.charfct
    if cfg.grid.get("numeric"):
        if msol.s_eval is None:
            raise UnknownModelError("no scalar S available for the numeric transform")
        f = charfct_numeric(msol.s_eval)
    header = {"model": cfg.model, "channel": ch, "f0": float(np.real(f.f0)),
              "f1": float(np.real(f.f1)), "decay_rate": float(f.decay_rate), "seed": cfg.seed,
              "kind": f.kind}
    vals = np.real(np.asarray(f(t), dtype=complex))
    if cfg.output == "csv":
        return _csv(header, ("t", "f"), zip(t, vals)), 0
    return dumps({"header": header, "t": t, "f": vals}), 0


def _bound_or_none(spec, g):
    if not isinstance(spec.model, ConstantMatrix):
        return None
    try:
        return constant_s_bound(spec, g)
    except HypothesisError:
        return None


def cmd_verdict(cfg: RunConfig) -> tuple:
    spec = cfg.stress_spec()
    v = decide_qei(spec, cfg.method)
    b = _bound_or_none(spec, cfg.test_function()) if v.status == "Holds" else None
    out = {"model": cfg.model, "q": {k: list(q.numerator_coeffs) for k, q in spec.q_factors.items()},
           **v.to_dict(), "bound_constant": None if b is None else b.constant,
           "per_mass_terms": None if b is None else b.to_dict()["per_mass_terms"],
           "witness": [], "seed": cfg.seed}
    return dumps(out), v.exit_code


def cmd_bound(cfg: RunConfig) -> tuple:
    spec = cfg.stress_spec()
    if not isinstance(spec.model, ConstantMatrix):
        raise HypothesisError(f"{cfg.model['variant']}: the explicit bound needs a constant S-function")
    g = cfg.test_function()
    b = constant_s_bound(spec, g)
    taus = [float(x) for x in cfg.grid.get("taus", [])]
    curve = [(tau, constant_s_bound(spec, GaussianTestFunction(tau, g.amplitude)).constant)
             for tau in taus]
    if cfg.output == "csv":
        header = {"model": cfg.model, **b.to_dict(), "seed": cfg.seed}
        return _csv(header, ("tau", "bound"), curve), 0
    out = {"model": cfg.model, **b.to_dict(), "tau": g.tau, "seed": cfg.seed,
           "curve": [{"tau": a, "bound": c} for a, c in curve]}
    return dumps(out), 0


def cmd_witness(cfg: RunConfig) -> tuple:
    spec = cfg.stress_spec()
    g = cfg.test_function()
    j_max = int(cfg.grid.get("j_max", 5))
    v = decide_qei(spec, cfg.method)
    if v.status != "Fails":
        raise PreconditionError(f"witness sequences need a failing QEI; verdict is {v.status}")
    seq = build_witness_sequence(spec, g, j_max, verdict=v) if j_max > 0 else []
    rows = [(w.j, w.expectation) for w in seq]
    if cfg.output == "csv":
        header = {"model": cfg.model, "status": v.status, "exponent": v.growth_exponent,
                  "seed": cfg.seed}
        return _csv(header, ("j", "expectation"), rows), 0
    out = {"model": cfg.model, "status": v.status, "exponent": v.growth_exponent, "seed": cfg.seed,
           "witness": [{"j": w.j, "expectation": w.expectation, "rho": w.packet.label["rho"],
                        "s": w.packet.label["s"]} for w in seq]}
    return dumps(out), 0


_HANDLERS = {"charfct": cmd_charfct, "verdict": cmd_verdict, "bound": cmd_bound,
             "witness": cmd_witness}


def run(cfg: RunConfig) -> tuple:
    return _HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# argument parsing

def _value(text: str):
    items = [s.strip() for s in text.split(",")] if "," in text else [text.strip()]
    out = []
    for s in items:
        try:
            out.append(json.loads(s))
        except json.JSONDecodeError:
            try:
                z = complex(s.replace(" ", ""))
            except ValueError:
                out.append(s)
                continue
            out.append(f"{z.real!r}{z.imag:+}j")
    return out if len(out) > 1 else out[0]


def _floats(text: str, flag: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


_SHORTCUTS = ("n", "b", "eps", "lam", "m1", "m2", "mass")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qeiform", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration; flags override its fields")
    p.add_argument("--model", help="free_boson, free_fermion, ising, sinh_gordon, gbd, federbush, nls")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="model parameter, repeatable; lists are comma separated")
    for name in _SHORTCUTS:
        p.add_argument(f"--{name}", help=f"shorthand for --param {name}=...")
    p.add_argument("--q", action="append", default=[], metavar="[CH=]C0,C1,...",
                   help="prefactor coefficients ascending in ch z, optionally for channel CH")
    p.add_argument("--qs", help="the same coefficients for both Federbush symmetric channels")
    p.add_argument("--channel", help="eigenchannel for charfct (+, -, 0)")
    p.add_argument("--method", choices=("auto", "analytic", "generic"))
    p.add_argument("--tune-c", type=float, help="tune the leading q coefficient to this constant")
    p.add_argument("--tune-degree", type=int, help="degree of the tuned q")
    p.add_argument("--tau", type=float, help="Gaussian width of g")
    p.add_argument("--grid", action="append", default=[], metavar="K=V",
                   help="t_min, t_max, n, numeric (charfct); j_max (witness); taus (bound)")
    p.add_argument("--jmax", type=int, help="shorthand for --grid j_max=...")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: {exc}") from None
    base["command"] = ns.command
    model = dict(base.get("model", {}))
    params = dict(model.get("parameters", {}))
    if ns.model:
        if ns.model != model.get("variant"):
            params = {}
        model["variant"] = ns.model
    for kv in ns.param:
        if "=" not in kv:
            raise ConfigError(f"--param: expected K=V, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k.strip()] = _value(v)
    for name in _SHORTCUTS:
        v = getattr(ns, name)
        if v is not None:
            params[name] = _value(v)
    if "b" in params and not isinstance(params["b"], list):
        params["b"] = [params["b"]]
    if model:
        model["parameters"] = params
        base["model"] = model
    q = base.get("q", {})
    q = {"q": q} if isinstance(q, list) else dict(q)
    for text in ns.q:
        if "=" in text:
            k, v = text.split("=", 1)
            q[k.strip()] = _floats(v, "--q")
        else:
            q["q"] = _floats(text, "--q")
    if ns.qs:
        q["s1"] = q["s2"] = _floats(ns.qs, "--qs")
    if q:
        base["q"] = q
    grid = dict(base.get("grid", {}))
    for kv in ns.grid:
        if "=" not in kv:
            raise ConfigError(f"--grid: expected K=V, got {kv!r}")
        k, v = kv.split("=", 1)
        val = _value(v)
        grid[k.strip()] = val if k.strip() != "taus" or isinstance(val, list) else [val]
    if ns.jmax is not None:
        grid["j_max"] = ns.jmax
    if grid:
        base["grid"] = grid
    if ns.tau is not None:
        base["g"] = {**dict(base.get("g", {})), "tau": ns.tau}
    if ns.tune_c is not None or ns.tune_degree is not None:
        if ns.tune_c is None or ns.tune_degree is None:
            raise ConfigError("--tune-c and --tune-degree go together")
        base["tune"] = {"degree": ns.tune_degree, "c": ns.tune_c}
    for key, attr in (("channel", "channel"), ("method", "method"), ("output", "format"),
                      ("seed", "seed")):
        v = getattr(ns, attr)
        if v is not None:
            base[key] = v
    return RunConfig.from_dict(base)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text, code = run(cfg)
    except (ConfigError, SpecError, NormalizationError, UnknownModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HypothesisError, PreconditionError, DivergentIntegralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (QuadratureError, NonIntegrableError, FitUnstableError, StripError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
