"""JSON model files: validation, loading and dumping."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .channels import LcsRule, LcsSystem, product_from_json, product_to_json
from .core import Alphabet, Dfa, DRabin, ModelError, System, _jsonable_state, _state_from_json
from .counters import AffineTransition, CounterSystem, NetTransition, compile_net

_name = {"type": "string", "minLength": 1}
_nat = {"type": "integer", "minimum": 0}
_int = {"type": "integer"}
_weights = {"type": "object", "additionalProperties": _nat}

_NET_T = {
    "type": "object",
    "required": ["label"],
    "additionalProperties": False,
    "properties": {
        "label": _name,
        "pre": _weights,
        "post": _weights,
        "reads": {"type": "array", "items": _name},
        "resets": {"type": "array", "items": _name},
        "transfers": {"type": "object", "additionalProperties": _name},
    },
}

SCHEMAS = {
    "net": {
        "type": "object",
        "required": ["kind", "places", "transitions", "initial"],
        "properties": {
            "kind": {"enum": ["petri", "reset", "transfer"]},
            "name": {"type": "string"},
            "places": {"type": "array", "items": _name, "minItems": 1},
            "transitions": {"type": "array", "items": _NET_T, "minItems": 1},
            "initial": {"oneOf": [{"type": "array", "items": _nat}, _weights]},
        },
    },
    "affine": {
        "type": "object",
        "required": ["kind", "transitions", "initial"],
        "properties": {
            "kind": {"const": "affine"},
            "name": {"type": "string"},
            "places": {"type": "array", "items": _name},
            "transitions": {"type": "array", "minItems": 1, "items": {
                "type": "object",
                "required": ["label", "guard", "A", "b"],
                "additionalProperties": False,
                "properties": {
                    "label": _name,
                    "guard": {"type": "array", "items": _nat},
                    "A": {"type": "array", "items": {"type": "array", "items": _nat}},
                    "b": {"type": "array", "items": _int},
                },
            }},
            "initial": {"type": "array", "items": _nat},
        },
    },
    "lcs": {
        "type": "object",
        "required": ["kind", "states", "initial", "channels", "messages", "transitions"],
        "properties": {
            "kind": {"const": "lcs"},
            "name": {"type": "string"},
            "states": {"type": "array", "items": _name, "minItems": 1},
            "initial": _name,
            "channels": {"type": "array", "items": _name},
            "messages": {"type": "array", "items": _name},
            "transitions": {"type": "array", "minItems": 1, "items": {
                "type": "object",
                "required": ["from", "to", "op", "label"],
                "additionalProperties": False,
                "properties": {
                    "from": _name, "to": _name, "label": _name,
                    "op": {"enum": ["!", "?", "nop"]},
                    "channel": {"type": ["string", "null"]},
                    "msg": {"type": ["string", "null"]},
                },
            }},
            "initial_contents": {"type": "object"},
        },
    },
    "automaton": {
        "type": "object",
        "required": ["kind", "states", "initial", "alphabet", "delta"],
        "properties": {
            "kind": {"enum": ["dfa", "rabin"]},
            "name": {"type": "string"},
            "states": {"type": "array", "minItems": 1},
            "alphabet": {"type": "array", "items": _name, "minItems": 1},
            "delta": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
            "accepting": {"type": "array"},
            "pairs": {"type": "array", "items": {
                "type": "object", "required": ["E", "F"],
                "properties": {"E": {"type": "array"}, "F": {"type": "array"}},
            }},
        },
    },
}

KINDS = {"petri": "net", "reset": "net", "transfer": "net", "affine": "affine", "lcs": "lcs",
         "dfa": "automaton", "rabin": "automaton"}


def _validate(doc, schema):
    try:
        jsonschema.validate(doc, SCHEMAS[schema])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ModelError(f"invalid model at {where}: {exc.message}") from None


def model_from_json(doc) -> System:
    if not isinstance(doc, dict) or doc.get("kind") not in KINDS:
        raise ModelError(f"model kind must be one of {sorted(KINDS)}")
    kind = doc["kind"]
    _validate(doc, KINDS[kind])
    name = doc.get("name", kind)
    if KINDS[kind] == "net":
        ts = []
        for t in doc["transitions"]:
            if t.get("resets") and kind == "petri":
                raise ModelError(f"transition {t['label']!r}: resets need kind 'reset' or 'transfer'")
            if t.get("transfers") and kind != "transfer":
                raise ModelError(f"transition {t['label']!r}: transfers need kind 'transfer'")
            ts.append(NetTransition(t["label"], dict(t.get("pre", {})), dict(t.get("post", {})),
                                    frozenset(t.get("resets", ())), dict(t.get("transfers", {})),
                                    frozenset(t.get("reads", ()))))
        places = doc["places"]
        init = doc["initial"]
        if isinstance(init, dict):
            unknown = set(init) - set(places)
            if unknown:
                raise ModelError(f"initial marking names unknown places {sorted(unknown)}")
            init = [init.get(p, 0) for p in places]
        if len(init) != len(places):
            raise ModelError("initial marking does not match the places")
        return compile_net(places, ts, tuple(init), name=name)
    if kind == "affine":
        ts = [AffineTransition(t["label"], t["guard"], t["A"], t["b"]) for t in doc["transitions"]]
        return CounterSystem(ts, doc["initial"], places=doc.get("places"), name=name)
    if kind == "lcs":
        rules = [LcsRule(t["from"], t["to"], t.get("channel"), t["op"], t.get("msg"), t["label"])
                 for t in doc["transitions"]]
        contents = None
        if "initial_contents" in doc:
            ic = doc["initial_contents"]
            contents = [product_from_json(ic.get(c, [])) for c in doc["channels"]]
        return LcsSystem(doc["states"], doc["initial"], doc["channels"], doc["messages"], rules,
                         contents, name=name)
    states = [_state_from_json(q) for q in doc["states"]]
    delta = {}
    for q, a, r in doc["delta"]:
        key = (_state_from_json(q), a)
        if key in delta:
            raise ModelError(f"two moves from {q!r} on {a!r}")
        delta[key] = _state_from_json(r)
    alphabet = Alphabet(tuple(doc["alphabet"]))
    init = _state_from_json(doc["initial"])
    if kind == "dfa":
        acc = [_state_from_json(q) for q in doc.get("accepting", doc["states"])]
        return Dfa(states, init, alphabet, delta, acc)
    pairs = [([_state_from_json(q) for q in p["E"]], [_state_from_json(q) for q in p["F"]])
             for p in doc.get("pairs", [])]
    return DRabin(states, init, alphabet, delta, pairs)


def model_to_json(sys: System) -> dict:
    if isinstance(sys, CounterSystem):
        if sys.net_transitions is not None:
            ts = []
            kind = "petri"
            for t in sys.net_transitions:
                d = {"label": t.label}
                if t.pre:
                    d["pre"] = dict(t.pre)
                if t.post:
                    d["post"] = dict(t.post)
                if t.reads:
                    d["reads"] = sorted(t.reads)
                if t.resets:
                    d["resets"] = sorted(t.resets)
                    kind = "reset" if kind == "petri" else kind
                if t.transfers:
                    d["transfers"] = dict(t.transfers)
                    kind = "transfer"
                ts.append(d)
            return {"kind": kind, "name": sys.name, "places": list(sys.places), "transitions": ts,
                    "initial": list(sys.initial)}
        return {"kind": "affine", "name": sys.name, "places": list(sys.places),
                "transitions": [{"label": t.label, "guard": list(t.guard), "A": [list(r) for r in t.A],
                                 "b": list(t.b)} for t in sys.transitions],
                "initial": list(sys.initial)}
    if isinstance(sys, LcsSystem):
        doc = {"kind": "lcs", "name": sys.name, "states": list(sys.states), "initial": sys.initial[0],
               "channels": list(sys.channels), "messages": list(sys.messages),
               "transitions": [{"from": r.src, "to": r.dst, "channel": r.channel, "op": r.op,
                                "msg": r.msg, "label": r.label} for r in sys.rules]}
        if any(sys.initial[1]):
            doc["initial_contents"] = {c: product_to_json(p) for c, p in zip(sys.channels, sys.initial[1])}
        return doc
    if isinstance(sys, Dfa):
        doc = {"kind": "rabin" if isinstance(sys, DRabin) else "dfa",
               "states": [_jsonable_state(q) for q in sys.states],
               "initial": _jsonable_state(sys.initial),
               "alphabet": list(sys.alphabet),
               "delta": [[_jsonable_state(q), a, _jsonable_state(r)] for (q, a), r in sys.delta.items()]}
        if isinstance(sys, DRabin):
            doc["pairs"] = [{"E": sorted((_jsonable_state(q) for q in e), key=repr),
                             "F": sorted((_jsonable_state(q) for q in f), key=repr)} for e, f in sys.pairs]
        else:
            doc["accepting"] = [_jsonable_state(q) for q in sys.states if q in sys.accepting]
        return doc
    raise ModelError(f"cannot serialize {type(sys).__name__}")


def load_model(spec: str) -> System:
    """``FILE`` or ``fixture:NAME[:k=v,...]``."""
    if spec.startswith("fixture:"):
        from .fixtures import load_fixture

        parts = spec[len("fixture:"):].split(":", 1)
        params = {}
        if len(parts) > 1 and parts[1]:
            for item in parts[1].split(","):
                k, sep, v = item.partition("=")
                if not sep:
                    raise ModelError(f"fixture parameter {item!r} is not k=v")
                params[k.strip()] = _param(v.strip())
        return load_fixture(parts[0], **params)
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model {spec!r}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{spec}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return model_from_json(doc)


def _param(v: str):
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    try:
        return int(v)
    except ValueError:
        return v


def dump_model(sys: System) -> str:
    return json.dumps(model_to_json(sys), indent=2, ensure_ascii=False) + "\n"
