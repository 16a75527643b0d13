"""Scenario files (JSON) and result serialization."""

import csv
import json
import os
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConsensusError, ScenarioParseError
from .graph import Topology
from .model import AgentModel, LeaderModel, Scenario, Weights

BUILTIN_PACKAGE = "ffconsensus.scenarios"


def builtin_scenarios():
    return sorted(
        p.name[:-5] for p in resources.files(BUILTIN_PACKAGE).iterdir() if p.name.endswith(".json")
    )


def resolve_path(path_or_name):
    """Accept a filesystem path or the name of a shipped scenario."""
    p = Path(path_or_name)
    if p.exists():
        return p
    name = p.stem if p.suffix == ".json" else str(path_or_name)
    if p.parent == Path(".") or p.parent.name in ("examples", "scenarios"):
        candidate = resources.files(BUILTIN_PACKAGE) / f"{name}.json"
        if candidate.is_file():
            return Path(str(candidate))
    raise ScenarioParseError(f"scenario file not found: {path_or_name}")


def _matrix(value, what):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"{what}: not a numeric matrix ({exc})") from None
    if arr.ndim == 1 and arr.size:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ScenarioParseError(f"{what}: expected nested row arrays, got {arr.ndim}-D data")
    return arr


def _vector(value, what):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"{what}: not a numeric vector ({exc})") from None
    if arr.ndim != 1:
        raise ScenarioParseError(f"{what}: expected a flat array")
    return arr


def scenario_from_dict(d) -> Scenario:
    try:
        topo = d["topology"]
        edges = [(e["from"], e["to"], e.get("weight", 1.0)) for e in topo["edges"]]
        topology = Topology.from_edges(int(topo["node_count"]), edges)
        agents = [
            AgentModel(
                _matrix(a["A"], f"agents[{k}].A"),
                _matrix(a["B"], f"agents[{k}].B"),
                _matrix(a["C"], f"agents[{k}].C") if a.get("C") is not None else None,
            )
            for k, a in enumerate(d["agents"])
        ]
        ld = d["leader"]
        leader = LeaderModel(
            _matrix(ld["A0"], "leader.A0"),
            _vector(ld["x0_init"], "leader.x0_init"),
            _matrix(ld["C0"], "leader.C0") if ld.get("C0") is not None else None,
        )
        w = d["weights"]
        weights = Weights(_matrix(w["Q"], "weights.Q"), tuple(_matrix(r, f"weights.R[{k}]") for k, r in enumerate(w["R"])))
        initial = tuple(_vector(x, f"initial_states[{k}]") for k, x in enumerate(d["initial_states"]))
        return Scenario(
            topology=topology,
            agents=tuple(agents),
            leader=leader,
            weights=weights,
            initial_states=initial,
            horizon=int(d.get("horizon", 50)),
            mode=str(d.get("mode", "state")),
            observer_init=str(d.get("observer_init", "zero")),
            optimizer_seed=int(d.get("optimizer_seed", 0)),
            name=str(d.get("name", "")),
            tolerances=dict(d.get("tolerances", {})),
        )
    except KeyError as exc:
        raise ScenarioParseError(f"missing field {exc.args[0]!r}") from None
    except ScenarioParseError:
        raise
    except ConsensusError as exc:
        raise ScenarioParseError(str(exc)) from None
    except (TypeError, ValueError, AttributeError) as exc:
        raise ScenarioParseError(f"malformed scenario: {exc}") from None


def scenario_to_dict(s: Scenario) -> dict:
    d = {
        "name": s.name,
        "mode": s.mode,
        "topology": {
            "node_count": s.topology.node_count,
            "edges": [{"from": j, "to": i, "weight": w} for j, i, w in s.topology.edges()],
        },
        "agents": [
            {"A": a.A.tolist(), "B": a.B.tolist(), **({"C": a.C.tolist()} if a.C is not None else {})}
            for a in s.agents
        ],
        "leader": {
            "A0": s.leader.A0.tolist(),
            "x0_init": s.leader.x0.tolist(),
            **({"C0": s.leader.C0.tolist()} if s.leader.C0 is not None else {}),
        },
        "weights": {"Q": s.weights.Q.tolist(), "R": [r.tolist() for r in s.weights.R]},
        "initial_states": [x.tolist() for x in s.initial_states],
        "horizon": s.horizon,
        "observer_init": s.observer_init,
        "optimizer_seed": s.optimizer_seed,
    }
    if s.tolerances:
        d["tolerances"] = dict(s.tolerances)
    return d


def load_scenario(path_or_name) -> Scenario:
    path = resolve_path(path_or_name)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload):
    write_atomic(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def write_csv(path, columns, rows):
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v) for v in row])
    write_atomic(path, buf.getvalue())


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data.reshape(-1, len(header))
