"""Scenario files: an INI-style, line-oriented format.

Grammar (``#`` or ``;`` start comments; every section except ``graph`` and
``controller`` is optional)::

    [scenario]
    name = strong_6agent

    [graph]
    nodes = 6
    edges = 2 1, 1 3, 4 2          # initial terminal pairs, comma separated
    file = graphs/ring.graph       # alternative to nodes/edges, relative path

    [tree]
    edges = 1, 2, 3, 4, 7          # forced spanning tree (edge numbers)

    [dynamics]
    kind = chua                    # zero | linear | chua
    state_dim = 3
    zeta = 10
    chi = 18
    a = -1.3333333333333333
    b = -0.75
    matrix = 0 1 0; -1 0 0; 0 0 0  # linear only, rows separated by ';'

    [controller]
    mode = strong                  # strong | quasi | off
    eta = 4.3871
    xi = auto                      # auto = noise.bound * sqrt(state_dim)
    sigma = 1                      # one value, or one per edge (comma separated)
    gain = 0.9487
    edge_gains = 2->1: 0.5, 4->1: 0.8
    cotree_gain = 0.175
    alpha_lower = 1
    alpha_upper = 1
    epsilon = 1e-6

    [noise]
    bound = 0.25
    seed = 0

    [integrator]
    dt = 0.001
    t_final = 20
    method = rk4
    record_every = 1

    [initial]
    low = -5
    high = 5
    seed = 3                       # defaults to the noise seed
    states = 1 0 0; 0 1 0; ...     # explicit, one vector per agent

    [output]
    path = run.csv
    format = csv                   # csv | json
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .controller import ConfigError, ControllerConfig
from .graph import Digraph, GraphError, load_graph, parse_digraph
from .simulator import DynamicsSpec, InitialSpec, IntegratorSpec, NoiseSpec, Scenario, prepare

SCHEMA = {
    "scenario": {"name"},
    "graph": {"nodes", "edges", "file"},
    "tree": {"edges"},
    "dynamics": {"kind", "state_dim", "zeta", "chi", "a", "b", "matrix"},
    "controller": {"mode", "eta", "xi", "sigma", "gain", "edge_gains", "cotree_gain",
                   "alpha_lower", "alpha_upper", "epsilon"},
    "noise": {"bound", "seed"},
    "integrator": {"dt", "t_final", "method", "record_every"},
    "initial": {"low", "high", "seed", "states"},
    "output": {"path", "format"},
}
REQUIRED = ("graph", "controller")
FORMATS = ("csv", "json")


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the file, line and field."""


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    output: OutputSpec
    source: Optional[Path] = None


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines: dict[tuple[str, str], int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"^([A-Za-z_][\w]*)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).lower()), lineno)
    return lines


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, lines, source: str):
        self.cp = cp
        self.lines = lines
        self.source = source

    def fail(self, section, key, msg) -> ScenarioError:
        where = f"{self.source}"
        line = self.lines.get((section, key))
        if line is not None:
            where += f", line {line}"
        return ScenarioError(f"{where}: {section}.{key}: {msg}")

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.has(section, key):
            return default
        return self.cp.get(section, key).strip()

    def float(self, section, key, default=None):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            x = float(v)
        except ValueError:
            raise self.fail(section, key, f"expected a number, got {v!r}") from None
        if not math.isfinite(x):
            raise self.fail(section, key, f"must be finite, got {v!r}")
        return x

    def int(self, section, key, default=None):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise self.fail(section, key, f"expected an integer, got {v!r}") from None

    def floats(self, section, key, sep=","):
        v = self.raw(section, key)
        try:
            out = tuple(float(p) for p in v.replace(sep, " ").split())
        except ValueError:
            raise self.fail(section, key, f"expected numbers, got {v!r}") from None
        if not all(math.isfinite(x) for x in out):
            raise self.fail(section, key, "values must be finite")
        return out

    def rows(self, section, key):
        v = self.raw(section, key)
        rows = []
        for chunk in v.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                row = tuple(float(p) for p in chunk.replace(",", " ").split())
            except ValueError:
                raise self.fail(section, key, f"expected numbers, got {chunk!r}") from None
            if not all(math.isfinite(x) for x in row):
                raise self.fail(section, key, "values must be finite")
            rows.append(row)
        return tuple(rows)


def _parse_edges(r: _Reader, section: str, key: str) -> list[tuple[int, int]]:
    pairs = []
    for chunk in r.raw(section, key).split(","):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise r.fail(section, key, f"expected 'initial terminal' pairs, got {chunk.strip()!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise r.fail(section, key, f"expected integers, got {chunk.strip()!r}") from None
    return pairs


def _parse_edge_gains(r: _Reader) -> dict[tuple[int, int], float]:
    text = r.raw("controller", "edge_gains", "")
    out = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = re.fullmatch(r"(\d+)\s*->\s*(\d+)\s*:\s*(\S+)", chunk)
        if not m:
            raise r.fail("controller", "edge_gains", f"expected 'l->k: c', got {chunk!r}")
        try:
            c = float(m.group(3))
        except ValueError:
            raise r.fail("controller", "edge_gains", f"expected a number in {chunk!r}") from None
        out[(int(m.group(1)), int(m.group(2)))] = c
    return out


def parse_scenario(text: str, source: str = "<scenario>", base: Optional[Path] = None) -> ScenarioFile:
    """Parse and fully validate scenario text."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   comment_prefixes=("#", ";"), strict=True)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}".replace("\n", " ")) from None
    lines = _key_lines(text)
    r = _Reader(cp, lines, source)
    for section in cp.sections():
        if section not in SCHEMA:
            raise ScenarioError(f"{source}: unknown section [{section}]")
        for key in cp.options(section):
            if key not in SCHEMA[section]:
                raise r.fail(section, key, "unknown key")
    for section in REQUIRED:
        if not cp.has_section(section):
            raise ScenarioError(f"{source}: missing section [{section}]")

    # graph
    try:
        if r.has("graph", "file"):
            if r.has("graph", "edges") or r.has("graph", "nodes"):
                raise r.fail("graph", "file", "give either file or nodes/edges, not both")
            path = Path(r.raw("graph", "file"))
            if not path.is_absolute() and base is not None:
                path = base / path
            try:
                graph = load_graph(path)
            except GraphError as exc:
                raise r.fail("graph", "file", f"{path}: {exc}") from None
        else:
            if not (r.has("graph", "nodes") and r.has("graph", "edges")):
                raise ScenarioError(f"{source}: [graph] needs nodes and edges (or file)")
            graph = parse_digraph(r.int("graph", "nodes"), _parse_edges(r, "graph", "edges"))
    except GraphError as exc:
        raise r.fail("graph", "edges", str(exc)) from None
    except OSError as exc:
        raise r.fail("graph", "file", str(exc)) from None

    tree = None
    if cp.has_section("tree"):
        if not r.has("tree", "edges"):
            raise ScenarioError(f"{source}: [tree] needs edges")
        v = r.raw("tree", "edges")
        try:
            tree = tuple(int(x) for x in v.replace(",", " ").split())
        except ValueError:
            raise r.fail("tree", "edges", f"expected edge numbers, got {v!r}") from None

    dyn_kw = {}
    for key in ("zeta", "chi", "a", "b"):
        v = r.float("dynamics", key)
        if v is not None:
            dyn_kw[key] = v
    try:
        dynamics = DynamicsSpec(kind=r.raw("dynamics", "kind", "zero"),
                                state_dim=r.int("dynamics", "state_dim", 3),
                                matrix=r.rows("dynamics", "matrix") if r.has("dynamics", "matrix") else None,
                                **dyn_kw)
    except ConfigError as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    noise = NoiseSpec(bound=r.float("noise", "bound", 0.0), seed=r.int("noise", "seed", 0))

    xi_raw = r.raw("controller", "xi", "auto")
    if xi_raw == "auto":
        xi = noise.bound * math.sqrt(dynamics.state_dim)
    else:
        xi = r.float("controller", "xi")
    sigma = 1.0
    if r.has("controller", "sigma"):
        vals = r.floats("controller", "sigma")
        sigma = vals[0] if len(vals) == 1 else vals
    cotree = r.float("controller", "cotree_gain")
    try:
        controller = ControllerConfig(
            mode=r.raw("controller", "mode", "strong"),
            eta=r.float("controller", "eta", 0.0),
            xi=xi,
            sigma=sigma,
            gain=r.float("controller", "gain", 0.9487),
            edge_gains=_parse_edge_gains(r),
            cotree_gain=cotree,
            alpha_lower=r.float("controller", "alpha_lower", 1.0),
            alpha_upper=r.float("controller", "alpha_upper", 1.0),
            epsilon=r.float("controller", "epsilon", 1e-6),
        )
        integrator = IntegratorSpec(dt=r.float("integrator", "dt", 1e-3),
                                    t_final=r.float("integrator", "t_final", 20.0),
                                    method=r.raw("integrator", "method", "rk4"),
                                    record_every=r.int("integrator", "record_every", 1))
        initial = InitialSpec(states=r.rows("initial", "states") if r.has("initial", "states") else None,
                              low=r.float("initial", "low", -5.0),
                              high=r.float("initial", "high", 5.0),
                              seed=r.int("initial", "seed"))
    except ConfigError as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    output = OutputSpec(path=r.raw("output", "path"), format=r.raw("output", "format", "csv"))
    if output.format not in FORMATS:
        raise r.fail("output", "format", f"must be one of {FORMATS}")

    name = r.raw("scenario", "name", Path(source).stem if source else "")
    scenario = Scenario(graph, controller, dynamics, noise, integrator, initial, tree, name)
    try:
        prepare(scenario)
    except GraphError as exc:
        raise r.fail("tree", "edges", str(exc)) if tree is not None else ScenarioError(f"{source}: {exc}")
    except ConfigError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    return ScenarioFile(scenario, output, Path(source) if source else None)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("edgecons") / "data" / name))


def resolve(name_or_path: str, suffix: str) -> Path:
    """A path on disk, or the name of a bundled file (``strong_6agent``)."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = bundled_path(name_or_path if name_or_path.endswith(suffix) else name_or_path + suffix)
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no such file or bundled {suffix} file: {name_or_path}")


def load_scenario_file(path) -> ScenarioFile:
    path = resolve(str(path), ".ini")
    return parse_scenario(path.read_text(), source=str(path), base=path.parent)


def load_scenario(path) -> Scenario:
    return load_scenario_file(path).scenario


def _num(x: float) -> str:
    return repr(float(x))


def dump_scenario(scenario: Scenario, output: Optional[OutputSpec] = None) -> str:
    """Serialise a scenario so that :func:`parse_scenario` reproduces it exactly."""
    c, d, g = scenario.controller, scenario.dynamics, scenario.graph
    out = ["[scenario]", f"name = {scenario.name}", "",
           "[graph]", f"nodes = {g.node_count}",
           "edges = " + ", ".join(f"{a} {b}" for a, b in g.edges), ""]
    if scenario.tree is not None:
        out += ["[tree]", "edges = " + ", ".join(map(str, scenario.tree)), ""]
    out += ["[dynamics]", f"kind = {d.kind}", f"state_dim = {d.state_dim}",
            f"zeta = {_num(d.zeta)}", f"chi = {_num(d.chi)}", f"a = {_num(d.a)}", f"b = {_num(d.b)}"]
    if d.matrix is not None:
        out.append("matrix = " + "; ".join(" ".join(_num(v) for v in row) for row in d.matrix))
    sigma = (", ".join(_num(v) for v in c.sigma) if isinstance(c.sigma, tuple) else _num(c.sigma))
    out += ["", "[controller]", f"mode = {c.mode}", f"eta = {_num(c.eta)}", f"xi = {_num(c.xi)}",
            f"sigma = {sigma}", f"gain = {_num(c.gain)}"]
    if c.edge_gains:
        out.append("edge_gains = " + ", ".join(f"{l}->{k}: {_num(v)}" for (l, k), v in sorted(c.edge_gains.items())))
    if c.cotree_gain is not None:
        out.append(f"cotree_gain = {_num(c.cotree_gain)}")
    out += [f"alpha_lower = {_num(c.alpha_lower)}", f"alpha_upper = {_num(c.alpha_upper)}",
            f"epsilon = {_num(c.epsilon)}", "",
            "[noise]", f"bound = {_num(scenario.noise.bound)}", f"seed = {scenario.noise.seed}", "",
            "[integrator]", f"dt = {_num(scenario.integrator.dt)}",
            f"t_final = {_num(scenario.integrator.t_final)}", f"method = {scenario.integrator.method}",
            f"record_every = {scenario.integrator.record_every}", "",
            "[initial]", f"low = {_num(scenario.initial.low)}", f"high = {_num(scenario.initial.high)}"]
    if scenario.initial.seed is not None:
        out.append(f"seed = {scenario.initial.seed}")
    if scenario.initial.states is not None:
        out.append("states = " + "; ".join(" ".join(_num(v) for v in row) for row in scenario.initial.states))
    if output is not None:
        out += ["", "[output]"]
        if output.path:
            out.append(f"path = {output.path}")
        out.append(f"format = {output.format}")
    return "\n".join(out) + "\n"


def with_overrides(scenario: Scenario, seed: Optional[int] = None, dt: Optional[float] = None,
                   t_final: Optional[float] = None) -> Scenario:
    noise, integ = scenario.noise, scenario.integrator
    if seed is not None:
        noise = replace(noise, seed=seed)
    if dt is not None:
        integ = replace(integ, dt=dt)
    if t_final is not None:
        integ = replace(integ, t_final=t_final)
    return replace(scenario, noise=noise, integrator=integ)


def scale_noise(scenario: Scenario, factor: float) -> Scenario:
    """Scale the disturbance bound and the controller's ``xi`` together."""
    return replace(scenario, noise=replace(scenario.noise, bound=scenario.noise.bound * factor),
                   controller=replace(scenario.controller, xi=scenario.controller.xi * factor))


__all__ = ["ScenarioError", "OutputSpec", "ScenarioFile", "parse_scenario", "load_scenario",
           "load_scenario_file", "dump_scenario", "resolve", "bundled_path", "with_overrides",
           "scale_noise", "Digraph"]
