"""JSON encoding of the library objects.

Rationals travel as strings ``"p/q"`` (plain integers are also accepted on
input, floats never are). ``w_max`` of ``null`` marks an exact polynomial.
Every decoder validates against a JSON schema first and raises
``MalformedInput`` with the schema message on failure.
"""

import json
from fractions import Fraction

import jsonschema

from . import symplectic as sy
from .densities import LinDensity, Prefactor
from .errors import MalformedInput
from .formal import INF, FormalFunction
from .graded import GradedSpace, Subspace

RATIONAL = {
    "oneOf": [
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
        {"type": "integer"},
    ]
}

SCHEMAS = {
    "rational": RATIONAL,
    "space": {
        "type": "object",
        "required": ["degrees"],
        "properties": {"degrees": {"type": "array", "items": {"type": "integer"}}},
    },
    "subspace": {
        "type": "object",
        "required": ["ambient", "basis"],
        "properties": {
            "ambient": {"$ref": "#/$defs/space"},
            "basis": {"type": "array", "items": {"type": "array", "items": {"$ref": "#/$defs/rational"}}},
        },
    },
    "symp": {
        "type": "object",
        "required": ["degrees", "omega"],
        "properties": {
            "degrees": {"type": "array", "items": {"type": "integer"}},
            "omega": {"type": "array", "items": {"type": "array", "items": {"$ref": "#/$defs/rational"}}},
        },
    },
    "relation": {
        "type": "object",
        "required": ["source", "target", "graph"],
        "properties": {
            "source": {"$ref": "#/$defs/symp"},
            "target": {"$ref": "#/$defs/symp"},
            "graph": {
                "oneOf": [
                    {"$ref": "#/$defs/subspace"},
                    {"type": "array", "items": {"type": "array", "items": {"$ref": "#/$defs/rational"}}},
                ]
            },
        },
    },
    "function": {
        "type": "object",
        "required": ["space", "terms"],
        "properties": {
            "space": {"$ref": "#/$defs/space"},
            "terms": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["indices", "coeff"],
                    "properties": {
                        "indices": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "g": {"type": "integer"},
                        "coeff": {"$ref": "#/$defs/rational"},
                    },
                    "additionalProperties": False,
                },
            },
            "w_max": {"type": ["integer", "null"], "minimum": 0},
        },
    },
    "prefactor": {
        "type": "object",
        "required": ["q"],
        "properties": {
            "q": {"$ref": "#/$defs/rational"},
            "sqrt": {"$ref": "#/$defs/rational"},
            "two_pi_half": {"type": "integer"},
            "hbar_half": {"type": "integer"},
        },
        "additionalProperties": False,
    },
    "action": {
        "type": "object",
        "required": ["space", "S"],
        "properties": {"space": {"$ref": "#/$defs/symp"}, "S": {"$ref": "#/$defs/function"}},
    },
    "genlag": {
        "type": "object",
        "required": ["relation", "f", "s_free"],
        "properties": {
            "relation": {"$ref": "#/$defs/relation"},
            "f": {"$ref": "#/$defs/function"},
            "rho": {"$ref": "#/$defs/prefactor"},
            "s_free": {"$ref": "#/$defs/function"},
            "reduced_space": {"$ref": "#/$defs/symp"},
        },
    },
}


def schema_for(name):
    return {"$ref": f"#/$defs/{name}", "$defs": SCHEMAS}


def validate(obj, name):
    try:
        jsonschema.validate(obj, schema_for(name))
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path)
        raise MalformedInput(f"{name} at '{path}': {e.message}") from None


# ----------------------------------------------------------- scalars


def rat(x):
    if isinstance(x, bool) or isinstance(x, float):
        raise MalformedInput(f"not an exact rational: {x!r}")
    try:
        return Fraction(str(x).replace(" ", ""))
    except (ValueError, ZeroDivisionError):
        raise MalformedInput(f"not a rational: {x!r}") from None


def rat_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------ spaces


def encode_space(V):
    return {"degrees": list(V.degrees)}


def decode_space(obj):
    validate(obj, "space")
    return GradedSpace(tuple(obj["degrees"]))


def encode_subspace(S):
    return {"ambient": encode_space(S.ambient), "basis": [[rat_str(x) for x in v] for v in S.basis]}


def _vectors(rows, n, what):
    out = []
    for v in rows:
        if len(v) != n:
            raise MalformedInput(f"{what}: vector of length {len(v)} in a space of dimension {n}")
        out.append(tuple(rat(x) for x in v))
    return out


def decode_subspace(obj, ambient=None):
    validate(obj, "subspace")
    V = decode_space(obj["ambient"])
    if ambient is not None and V != ambient:
        raise MalformedInput("subspace lives in a different ambient space")
    return Subspace.span(V, _vectors(obj["basis"], V.dim, "subspace"))


def encode_symp(V):
    return {"degrees": list(V.degrees), "omega": [[rat_str(x) for x in r] for r in V.omega]}


def decode_symp(obj):
    validate(obj, "symp")
    degs = tuple(obj["degrees"])
    om = _vectors(obj["omega"], len(degs), "omega")
    if len(om) != len(degs):
        raise MalformedInput("omega has the wrong number of rows")
    return sy.OddSympSpace(GradedSpace(degs), tuple(om))


def encode_relation(L):
    return {"source": encode_symp(L.source), "target": encode_symp(L.target), "graph": encode_subspace(L.graph)}


def decode_relation(obj):
    validate(obj, "relation")
    U, W = decode_symp(obj["source"]), decode_symp(obj["target"])
    amb = GradedSpace(U.degrees + W.degrees)
    g = obj["graph"]
    if isinstance(g, dict):
        G = decode_subspace(g, amb)
    else:
        G = Subspace.span(amb, _vectors(g, amb.dim, "graph"))
    return sy.Relation(U, W, G)


# --------------------------------------------------------- functions


def encode_function(f):
    terms = [
        {"indices": list(idx), "g": g, "coeff": rat_str(c)}
        for (idx, g), c in sorted(f.terms.items(), key=lambda kv: (2 * kv[0][1] + len(kv[0][0]), kv[0][1], kv[0][0]))
    ]
    return {"space": encode_space(f.space), "terms": terms, "w_max": None if f.w_max == INF else f.w_max}


def decode_function(obj, space=None, w_max=None):
    """Decode a function, truncating it at ``w_max`` when one is given.

    Terms of weight below ``-2 w_max`` are refused: they would need more
    than the requested order to be meaningful after a division by hbar.
    """
    validate(obj, "function")
    V = decode_space(obj["space"])
    if space is not None and V != space:
        raise MalformedInput(f"function lives on {list(V.degrees)}, expected {list(space.degrees)}")
    w = obj.get("w_max")
    w = INF if w is None else w
    if w_max is not None:
        w = min(w, w_max)
    terms = []
    for t in obj["terms"]:
        idx = tuple(t["indices"])
        if any(i >= V.dim for i in idx):
            raise MalformedInput(f"coordinate index out of range in {idx}")
        g = t.get("g", 0)
        if w_max is not None and 2 * g + len(idx) < -2 * w_max:
            raise MalformedInput("term weight is below -2 * max-weight")
        terms.append(((idx, g), rat(t["coeff"])))
    return FormalFunction(V, terms, w)


def encode_prefactor(p):
    return {"q": rat_str(p.q), "sqrt": str(p.r), "two_pi_half": p.two_pi_half, "hbar_half": p.hbar_half}


def decode_prefactor(obj):
    validate(obj, "prefactor")
    r = rat(obj.get("sqrt", 1))
    if r.denominator != 1 or r <= 0:
        raise MalformedInput("sqrt must be a positive integer")
    return Prefactor(rat(obj["q"]), r.numerator, obj.get("two_pi_half", 0), obj.get("hbar_half", 0))


# ------------------------------------------------------ quantum data


def encode_action(S):
    return {"space": encode_symp(S.space), "S": encode_function(S.action)}


def decode_action(obj, w_max=None):
    from .quantum import QuantumLInfty

    validate(obj, "action")
    V = decode_symp(obj["space"])
    f = decode_function(obj["S"], V.space, w_max)
    return QuantumLInfty(V, f)


def encode_genlag(G):
    return {
        "relation": encode_relation(G.relation),
        "reduced_space": encode_symp(G.reduced),
        "f": encode_function(G.function),
        "rho": encode_prefactor(G.density.coefficient),
        "s_free": encode_function(G.s_free),
    }


def decode_genlag(obj, w_max=None):
    from .quantum import GeneralizedLagrangian

    validate(obj, "genlag")
    C = decode_relation(obj["relation"])
    R = sy.reduced_space(C)
    if "reduced_space" in obj and decode_symp(obj["reduced_space"]) != R:
        raise MalformedInput("reduced_space does not match the reduction of the coisotrope")
    f = decode_function(obj["f"], R.space, w_max)
    s = decode_function(obj["s_free"], R.space)
    rho = decode_prefactor(obj["rho"]) if "rho" in obj else Prefactor.one()
    return GeneralizedLagrangian(C, f, LinDensity(R.space, rho, Fraction(1, 2)), s)


def encode_cospan(c):
    return {"middle": encode_symp(c.middle), "left": encode_relation(c.left), "right": encode_relation(c.right)}


def encode_certificate(cert):
    out = {
        "relation": encode_relation(cert.relation),
        "cospan": encode_cospan(cert.cospan),
        "conditions": {
            "nondegenerate_kernels": cert.nondegenerate,
            "equal_differentials": cert.differentials_equal,
            "proportional_densities": cert.densities_proportional,
        },
        "verdict": cert.verdict,
        "w_max": None if cert.w_max in (None, INF) else cert.w_max,
    }
    if cert.ratio is not None:
        out["ratio"] = encode_prefactor(cert.ratio)
        out["vacuum_ratio"] = encode_function(cert.vacuum_ratio)
    if cert.source_side is not None:
        out["transferred"] = {
            "from_source": encode_action(cert.source_side.action),
            "from_target": encode_action(cert.target_side.action),
        }
    if cert.notes:
        out["notes"] = list(cert.notes)
    return out


def dumps(obj):
    """Byte-stable JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
