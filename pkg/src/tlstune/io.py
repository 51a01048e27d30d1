"""Serialization: schema-validated JSON documents and hash-stamped CSVs.

Every JSON output validates against a shipped schema. Run records are an
envelope {schema, tool_version, command, config, config_hash, metadata,
result}; only the metadata block carries wall-clock facts, so two runs of
the same config differ in nothing else. Non-finite floats (failed fits,
no-limit sentinels) serialize as null. CSVs start with a comment line
carrying the config hash and tool version, then a header row.
"""

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .environment import Fluctuator, QubitEnvironment, TlsDefect

ENVIRONMENT_SCHEMA = "tlstune.environment/1"
RUN_RECORD_SCHEMA = "tlstune.run_record/1"

_validators = {}


def _validator(name):
    if name not in _validators:
        text = (resources.files("tlstune") / "schemas" / f"{name}.schema.json") \
            .read_text()
        _validators[name] = jsonschema.Draft202012Validator(json.loads(text))
    return _validators[name]


def validate_document(doc, schema_name):
    """Raise ValueError with the offending field path on schema violation."""
    errors = sorted(_validator(schema_name).iter_errors(doc),
                    key=lambda e: e.json_path)
    if errors:
        detail = "; ".join(f"{e.json_path}: {e.message}" for e in errors[:5])
        raise ValueError(f"document does not match {schema_name}: {detail}")


def jsonable(obj):
    """Recursively convert to JSON-clean types; nan/inf become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    return obj


def canonical_json(doc):
    """Key-sorted, fixed-format rendering; basis of hashing and file bytes."""
    return json.dumps(jsonable(doc), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def config_hash(config):
    """12-hex digest of a config dict, stable under key order."""
    compact = json.dumps(jsonable(config), sort_keys=True,
                         separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(compact.encode()).hexdigest()[:12]


def dump_json(path, doc):
    with open(path, "w") as fh:
        fh.write(canonical_json(doc))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


# -- environment documents ---------------------------------------------------

def env_to_dict(env, include_rng_state=True):
    doc = {
        "schema": ENVIRONMENT_SCHEMA,
        "background_gamma": env.background_gamma,
        "field": env.field,
        "clock": env.clock,
        "rng_seed": int(env.rng_seed),
        "defects": [{
            "asymmetry0": d.asymmetry0,
            "tunneling": d.tunneling,
            "dipole_projection": d.dipole_projection,
            "coupling": d.coupling,
            "linewidth": d.linewidth,
            "fluctuator_links": [[i, s] for i, s in d.fluctuator_links],
        } for d in env.defects],
        "fluctuators": [{
            "id": f.id,
            "kind": f.kind,
            "state": f.state,
            "rate_up": f.rate_up,
            "rate_down": f.rate_down,
            "field_threshold_up": f.field_threshold_up,
            "field_threshold_down": f.field_threshold_down,
        } for f in env.fluctuators],
    }
    if include_rng_state:
        # Mid-trajectory generator state, so a round trip resumes exactly.
        doc["rng_state"] = env.rng.bit_generator.state
    return doc


def env_from_dict(doc):
    validate_document(doc, "environment")
    defects = [TlsDefect(
        asymmetry0=d["asymmetry0"], tunneling=d["tunneling"],
        dipole_projection=d["dipole_projection"], coupling=d["coupling"],
        linewidth=d["linewidth"],
        fluctuator_links=[tuple(link) for link in d.get("fluctuator_links", [])])
        for d in doc["defects"]]
    fluctuators = [Fluctuator(
        id=f["id"], kind=f["kind"], state=f["state"],
        rate_up=f.get("rate_up", 0.0), rate_down=f.get("rate_down", 0.0),
        field_threshold_up=f.get("field_threshold_up", 0.0),
        field_threshold_down=f.get("field_threshold_down", 0.0))
        for f in doc["fluctuators"]]
    env = QubitEnvironment(defects, fluctuators,
                           background_gamma=doc["background_gamma"],
                           field=doc["field"], clock=doc["clock"],
                           rng_seed=doc["rng_seed"])
    state = doc.get("rng_state")
    if state is not None:
        env.rng.bit_generator.state = state
    return env


def save_environment(path, env, include_rng_state=True):
    doc = env_to_dict(env, include_rng_state)
    validate_document(doc, "environment")
    dump_json(path, doc)


def load_environment(path):
    return env_from_dict(load_json(path))


# -- run records -------------------------------------------------------------

def make_run_record(command, config, result, elapsed_s=None):
    config = jsonable(config)
    record = {
        "schema": RUN_RECORD_SCHEMA,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "metadata": {
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "elapsed_s": elapsed_s,
        },
        "result": jsonable(result),
    }
    validate_document(record, "run_record")
    return record


def write_run_record(path, command, config, result, elapsed_s=None):
    record = make_run_record(command, config, result, elapsed_s)
    dump_json(path, record)
    return record


# -- CSV ---------------------------------------------------------------------

def write_csv(path, header, rows, cfg_hash=""):
    """CSV with a `# tlstune config_hash=... version=...` first line."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# tlstune config_hash={cfg_hash} version={__version__}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if isinstance(v, float) and not math.isfinite(v)
                             else v for v in row])


def read_csv(path):
    """Read back a tlstune CSV; returns (comment, header, rows of strings)."""
    with open(path, newline="") as fh:
        comment = fh.readline().rstrip("\n")
        reader = csv.reader(fh)
        header = next(reader)
        return comment, header, [row for row in reader]
