"""Scenario files, presets, and the command-line sweep runner.

A scenario is a JSON file describing a graph (inline or by preset), the
channel layout, the sweep grids and the port selection:

    {
      "preset": {"name": "kerr", "U": 10.0},          # or "graph": {...}
      "channels": {"mode": "local", "omega_ref": 0.0,
                   "ports": [{"id": "in",  "couplings": [{"site": 0, "gamma": 1.0}]},
                             {"id": "out", "couplings": [{"site": 0, "gamma": 1.0}]}],
                   "decay": []},
      "sweep": {"delta": [-10.0, 10.0, 201], "tau": [0.0, 5.0, 51],
                "delta_relative_to_mean_epsilon": true},
      "ports": {"in": "in", "out": "out"},
      "flux": 1.0
    }

`channels` is optional when a preset is used (presets ship their coupling
geometry).  Detunings are referenced to the mean site energy unless the
sweep flag says otherwise.  Results are written as CSV (or a gnuplot
variant) with one row per (delta, tau) grid point; rows carry the resolved
delta/tau values plus a semicolon-separated flag list, so they stand alone.

Exit codes: 0 success, 2 scenario/schema error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import FewPhotonError, ScenarioParseError, ScenarioSchemaError
from .lattice import (
    Graph,
    make_graph,
    preset_chain,
    preset_kerr,
    preset_ring,
    preset_square_flux,
)
from .coupling import ChannelSet, make_channelset
from .scattering import CorrelationSweep, finalize, sweep

__all__ = ["Scenario", "load_scenario", "scenario_from_dict", "run",
           "list_presets", "write_table", "main"]


@dataclass(frozen=True)
class Scenario:
    """Validated, fully resolved inputs for one sweep run."""

    graph: Graph
    channelset: ChannelSet
    delta_grid: np.ndarray
    tau_grid: np.ndarray | None
    sigma_in: str
    sigma_out: str
    sigma_out2: str | None
    flux: float
    label: str = "scenario"
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# presets: graph plus coupling geometry for each figure-style setup
# ---------------------------------------------------------------------------

def _ports_json(*entries):
    return [{"id": cid, "couplings": [dict(c) for c in cpls]} for cid, cpls in entries]


def _preset_kerr(p):
    g = preset_kerr(p.get("epsilon", 0.0), p.get("U", 1.0))
    gamma = p.get("gamma", 1.0)
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": 0, "gamma": gamma}]),
                             ("out", [{"site": 0, "gamma": gamma}])),
    }
    return g, channels


def _preset_dimer_parallel(p):
    g = preset_chain(2, p.get("epsilon", 0.0), p.get("U", 1.0), p.get("t", 1.0))
    gamma = p.get("gamma", 1.0)
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": 0, "gamma": gamma}]),
                             ("out", [{"site": 1, "gamma": gamma}])),
    }
    return g, channels


def _preset_dimer_perpendicular(p):
    g = preset_chain(2, p.get("epsilon", 0.0), p.get("U", 1.0), p.get("t", 1.0))
    gamma = p.get("gamma", 1.0)
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": 0, "gamma": gamma}]),
                             ("out", [{"site": 0, "gamma": gamma}])),
    }
    return g, channels


def _preset_dimer_quasilocal(p):
    """Side-coupled dimer: each channel passes both sites, phase shift phi.

    The input channel meets site 0 first and accumulates +phi towards
    site 1; the counter-propagating output channel meets site 1 first and
    accumulates -phi towards site 0, which reproduces the non-diagonal
    self-energy -2i Gamma (M + b2^dag b1 e^{i phi} + b1^dag b2 e^{-i phi}).
    """
    g = preset_chain(2, p.get("epsilon", 0.0), p.get("U", 1.0), p.get("t", 1.0))
    gamma = p.get("gamma", 1.0)
    phi = p.get("phi", math.pi / 10.0)
    channels = {
        "mode": "quasilocal-phases",
        "ports": _ports_json(
            ("in", [{"site": 0, "gamma": gamma, "phi": 0.0, "order": 0},
                    {"site": 1, "gamma": gamma, "phi": phi, "order": 1}]),
            ("out", [{"site": 1, "gamma": gamma, "phi": 0.0, "order": 0},
                     {"site": 0, "gamma": gamma, "phi": -phi, "order": 1}])),
    }
    return g, channels


def _preset_chain(p):
    n = int(p.get("n", 10))
    g = preset_chain(n, p.get("epsilon", 0.0), p.get("U", 1.0), p.get("t", 1.0))
    gamma = p.get("gamma", 1.0)
    decay_gamma = p.get("decay_gamma", 0.0)
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": 0, "gamma": gamma}]),
                             ("out", [{"site": n - 1, "gamma": gamma}])),
    }
    if decay_gamma > 0:
        channels["decay"] = [{"site": i, "gamma": decay_gamma} for i in range(n)]
    return g, channels


def _preset_ring(p):
    n = int(p.get("n", 6))
    g = preset_ring(n, p.get("epsilon", 0.0), p.get("U", 1.0), p.get("t", 1.0))
    gamma = p.get("gamma", 1.0)
    sites = p.get("sites", [0, 2])
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": int(sites[0]), "gamma": gamma}]),
                             ("out", [{"site": int(sites[1]), "gamma": gamma}])),
    }
    return g, channels


def _preset_plane(p):
    w, h = int(p.get("width", 8)), int(p.get("height", 8))
    g = preset_square_flux(w, h, p.get("epsilon", 0.0), p.get("U", 1.0),
                           p.get("t", 1.0), p.get("phi", 2.0 * math.pi / 5.0))
    gamma = p.get("gamma", 1.0)
    decay_gamma = p.get("decay_gamma", 0.01)
    channels = {
        "mode": "local",
        "ports": _ports_json(("in", [{"site": 0, "gamma": gamma}]),
                             ("out", [{"site": w * h - 1, "gamma": gamma}])),
    }
    if decay_gamma > 0:
        channels["decay"] = [{"site": i, "gamma": decay_gamma}
                             for i in range(w * h)]
    return g, channels


PRESETS = {
    "kerr": (_preset_kerr, "epsilon=0, U=1, gamma=1"),
    "dimer-parallel": (_preset_dimer_parallel, "epsilon=0, U=1, t=1, gamma=1"),
    "dimer-perpendicular": (_preset_dimer_perpendicular, "epsilon=0, U=1, t=1, gamma=1"),
    "dimer-quasilocal": (_preset_dimer_quasilocal,
                         "epsilon=0, U=1, t=1, gamma=1, phi=pi/10"),
    "chain": (_preset_chain, "n=10, epsilon=0, U=1, t=1, gamma=1, decay_gamma=0"),
    "ring": (_preset_ring, "n=6, epsilon=0, U=1, t=1, gamma=1, sites=[0,2]"),
    "plane": (_preset_plane,
              "width=8, height=8, epsilon=0, U=1, t=1, gamma=1, phi=2pi/5, "
              "decay_gamma=0.01"),
}


def list_presets(stream=None) -> None:
    """Print the preset names and their parameters, in stable order."""
    stream = stream or sys.stdout
    for name in sorted(PRESETS):
        stream.write(f"{name:22s} {PRESETS[name][1]}\n")


# ---------------------------------------------------------------------------
# scenario validation
# ---------------------------------------------------------------------------

def _need(mapping, key, where, types=None):
    if key not in mapping:
        raise ScenarioSchemaError(f"missing required field {where}.{key}")
    value = mapping[key]
    if types is not None and not isinstance(value, types):
        raise ScenarioSchemaError(
            f"field {where}.{key} has wrong type {type(value).__name__}")
    return value


def _number(mapping, key, where, default=None):
    if key not in mapping:
        if default is None:
            raise ScenarioSchemaError(f"missing required field {where}.{key}")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioSchemaError(f"field {where}.{key} must be a number")
    return float(value)


def _grid(spec, where):
    if (not isinstance(spec, list) or len(spec) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in spec)):
        raise ScenarioSchemaError(f"field {where} must be [min, max, count]")
    lo, hi, count = float(spec[0]), float(spec[1]), int(spec[2])
    if count < 1:
        raise ScenarioSchemaError(f"field {where} needs count >= 1")
    if count > 1 and not hi > lo:
        raise ScenarioSchemaError(f"field {where} needs max > min")
    return np.linspace(lo, hi, count)


def _validate_coupling(c, where, mode):
    if not isinstance(c, dict):
        raise ScenarioSchemaError(f"{where} must be an object")
    site = _need(c, "site", where)
    if isinstance(site, bool) or not isinstance(site, int):
        raise ScenarioSchemaError(f"{where}.site must be an integer")
    gamma = _number(c, "gamma", where)
    if gamma < 0:
        raise ScenarioSchemaError(f"{where}.gamma must be >= 0")
    if "x" in c and "phi" in c:
        raise ScenarioSchemaError(f"{where}: fields x and phi are mutually exclusive")
    if mode == "quasilocal-phases" and "x" in c:
        raise ScenarioSchemaError(
            f"{where}: position field x is not allowed in quasilocal-phases mode")
    if mode == "quasilocal-positions" and "phi" in c:
        raise ScenarioSchemaError(
            f"{where}: phase field phi is not allowed in quasilocal-positions mode")
    allowed = {"site", "gamma", "g_phase", "x", "phi", "order"}
    unknown = set(c) - allowed
    if unknown:
        raise ScenarioSchemaError(f"{where}: unknown fields {sorted(unknown)}")
    out = {"site": site, "gamma": gamma}
    for key in ("g_phase", "x", "phi"):
        if key in c:
            out[key] = _number(c, key, where)
    if "order" in c:
        if isinstance(c["order"], bool) or not isinstance(c["order"], int):
            raise ScenarioSchemaError(f"{where}.order must be an integer")
        out["order"] = c["order"]
    return out


def _build_channelset(channels, where="channels") -> tuple[ChannelSet, float]:
    if not isinstance(channels, dict):
        raise ScenarioSchemaError(f"field {where} must be an object")
    mode = channels.get("mode", "local")
    if mode not in ("local", "quasilocal-positions", "quasilocal-phases"):
        raise ScenarioSchemaError(f"field {where}.mode has unknown value {mode!r}")
    omega_ref = _number(channels, "omega_ref", where, default=0.0)
    ports_spec = _need(channels, "ports", where, types=list)
    if not ports_spec:
        raise ScenarioSchemaError(f"field {where}.ports must not be empty")
    ports = []
    for k, entry in enumerate(ports_spec):
        pwhere = f"{where}.ports[{k}]"
        if not isinstance(entry, dict):
            raise ScenarioSchemaError(f"{pwhere} must be an object")
        pid = _need(entry, "id", pwhere, types=str)
        couplings = _need(entry, "couplings", pwhere, types=list)
        if not couplings:
            raise ScenarioSchemaError(f"{pwhere}.couplings must not be empty")
        cpls = [_validate_coupling(c, f"{pwhere}.couplings[{i}]", mode)
                for i, c in enumerate(couplings)]
        ports.append((pid, cpls))
    decay = []
    for k, entry in enumerate(channels.get("decay", [])):
        dwhere = f"{where}.decay[{k}]"
        if not isinstance(entry, dict):
            raise ScenarioSchemaError(f"{dwhere} must be an object")
        site = _need(entry, "site", dwhere)
        decay.append((int(site), _number(entry, "gamma", dwhere)))
    try:
        cs = make_channelset(ports, decay=decay, mode=mode, omega_ref=omega_ref)
    except FewPhotonError as exc:
        raise ScenarioSchemaError(f"invalid {where}: {exc}") from exc
    return cs, omega_ref


def scenario_from_dict(doc: dict, label="scenario") -> Scenario:
    """Validate a parsed scenario document and resolve it into a Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("scenario root must be a JSON object")
    if ("preset" in doc) == ("graph" in doc):
        raise ScenarioSchemaError("scenario needs exactly one of 'preset' or 'graph'")

    preset_channels = None
    if "preset" in doc:
        pspec = doc["preset"]
        if not isinstance(pspec, dict):
            raise ScenarioSchemaError("field preset must be an object")
        name = _need(pspec, "name", "preset", types=str)
        if name not in PRESETS:
            raise ScenarioSchemaError(
                f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
        params = {k: v for k, v in pspec.items() if k != "name"}
        try:
            graph, preset_channels = PRESETS[name][0](params)
        except FewPhotonError as exc:
            raise ScenarioSchemaError(f"invalid preset parameters: {exc}") from exc
    else:
        gspec = doc["graph"]
        if not isinstance(gspec, dict):
            raise ScenarioSchemaError("field graph must be an object")
        sites_spec = _need(gspec, "sites", "graph", types=list)
        sites = []
        for k, s in enumerate(sites_spec):
            where = f"graph.sites[{k}]"
            if not isinstance(s, dict):
                raise ScenarioSchemaError(f"{where} must be an object")
            sites.append((_number(s, "epsilon", where), _number(s, "U", where)))
        links = []
        for k, ln in enumerate(gspec.get("links", [])):
            where = f"graph.links[{k}]"
            if not isinstance(ln, dict):
                raise ScenarioSchemaError(f"{where} must be an object")
            t = complex(_number(ln, "t_re", where),
                        _number(ln, "t_im", where, default=0.0))
            links.append((int(_need(ln, "i", where)), int(_need(ln, "j", where)), t))
        try:
            graph = make_graph(sites, links)
        except FewPhotonError as exc:
            raise ScenarioSchemaError(f"invalid graph: {exc}") from exc

    if "channels" in doc:
        channelset, omega_ref = _build_channelset(doc["channels"])
    elif preset_channels is not None:
        channelset, omega_ref = _build_channelset(preset_channels)
    else:
        raise ScenarioSchemaError("missing required field channels")

    sweep_spec = _need(doc, "sweep", "scenario", types=dict)
    delta_grid = _grid(_need(sweep_spec, "delta", "sweep"), "sweep.delta")
    tau_grid = None
    if sweep_spec.get("tau") is not None:
        tau_grid = _grid(sweep_spec["tau"], "sweep.tau")
        if tau_grid[0] < 0:
            raise ScenarioSchemaError("sweep.tau must start at >= 0")
    relative = sweep_spec.get("delta_relative_to_mean_epsilon", True)
    if not isinstance(relative, bool):
        raise ScenarioSchemaError(
            "sweep.delta_relative_to_mean_epsilon must be a boolean")
    if relative:
        omega_ref = omega_ref + graph.mean_epsilon
        channelset = ChannelSet(channels=channelset.channels,
                                points=channelset.points,
                                mode=channelset.mode, omega_ref=omega_ref)

    ports_doc = _need(doc, "ports", "scenario", types=dict)
    sigma_in = _need(ports_doc, "in", "ports", types=str)
    sigma_out = _need(ports_doc, "out", "ports", types=str)
    sigma_out2 = ports_doc.get("out2")
    declared = channelset.port_ids
    for label_, sid in (("in", sigma_in), ("out", sigma_out), ("out2", sigma_out2)):
        if sid is not None and sid not in declared:
            raise ScenarioSchemaError(
                f"ports.{label_} references undeclared port {sid!r}")

    flux = _number(doc, "flux", "scenario", default=1.0)
    return Scenario(graph=graph, channelset=channelset, delta_grid=delta_grid,
                    tau_grid=tau_grid, sigma_in=sigma_in, sigma_out=sigma_out,
                    sigma_out2=sigma_out2, flux=flux, label=label,
                    metadata={"relative_delta": relative})


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return scenario_from_dict(doc, label=str(path))


# ---------------------------------------------------------------------------
# running and output
# ---------------------------------------------------------------------------

def run(scenario: Scenario, threads: int = 1,
        run_markov_check: bool = True) -> CorrelationSweep:
    """Finalize the scenario's model and evaluate the sweep.

    Prints a warning to stderr when the Markovianity check fails (never a
    hard error: the approximation quality is the user's call).
    """
    model = finalize(scenario.graph, scenario.channelset)
    result = sweep(model, (scenario.sigma_in, scenario.sigma_out),
                   scenario.delta_grid, scenario.tau_grid, flux=scenario.flux,
                   threads=threads, run_markov_check=run_markov_check)
    if run_markov_check and not result.markov.passed:
        print(f"warning: Markov conditions violated "
              f"(worst D = {result.markov.worst_d:.3g}, "
              f"worst |lambda - M w0| dx = {result.markov.worst_lambda_dx:.3g}, "
              f"threshold {result.markov.threshold})", file=sys.stderr)
    return result


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def write_table(result: CorrelationSweep, stream, fmt: str = "csv") -> None:
    """Emit one row per (delta, tau) point; bit-stable across runs/threads."""
    header = ["delta", "tau", "g1", "g2", "t_abs2", "flags"]
    if fmt == "csv":
        stream.write(",".join(header) + "\n")
    elif fmt == "gnuplot":
        stream.write("# " + " ".join(header) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    sep = "," if fmt == "csv" else " "
    for i, d in enumerate(result.delta):
        flags = ";".join(result.flags[i])
        for k, tau in enumerate(result.tau):
            row = [_fmt(float(d)), _fmt(float(tau)), _fmt(float(result.g1[i])),
                   _fmt(float(result.g2[i, k])), _fmt(float(result.t_abs2[i])),
                   flags]
            stream.write(sep.join(row) + "\n")
        if fmt == "gnuplot" and len(result.tau) > 1:
            stream.write("\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fewphoton",
        description="Few-photon transport observables on Bose-Hubbard graphs")
    parser.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    parser.add_argument("--out", metavar="PATH", default="-",
                        help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "gnuplot"), default="csv")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweep evaluation")
    parser.add_argument("--no-markov-check", action="store_true",
                        help="skip the quasi-local Markovianity diagnostics")
    parser.add_argument("--list-presets", action="store_true",
                        help="print available presets and exit")
    args = parser.parse_args(argv)

    if args.list_presets:
        list_presets()
        return 0
    if not args.scenario:
        parser.print_usage(sys.stderr)
        print("error: --scenario is required unless --list-presets is given",
              file=sys.stderr)
        return 2

    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioParseError, ScenarioSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        result = run(scenario, threads=max(1, args.threads),
                     run_markov_check=not args.no_markov_check)
    except FewPhotonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    try:
        if args.out == "-":
            write_table(result, sys.stdout, args.format)
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                write_table(result, fh, args.format)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
