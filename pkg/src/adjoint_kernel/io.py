"""Instance files: strict JSON with every rational written as a "p/q" string.

Quadratic irrationals are written ``"a+b*sqrt(d)"`` (``a``, ``b`` rational
strings). Unknown fields are errors, and so are floats and decimal strings.
Error messages name the offending field, e.g. ``system.B[1].divisor``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cones import Cone, ConeDecomposition
from .divisors import CharacteristicSystem, Divisor
from .exact import QuadNumber, format_rational, parse_rational
from .toric import ToricVariety, hirzebruch, projective_space

__all__ = ["FORMAT_VERSION", "InstanceError", "InstanceDoc", "parse_instance", "load_instance",
           "parse_exact", "format_exact", "dump_json", "to_wire", "from_wire", "bundled_instance"]

FORMAT_VERSION = 1

_RAT = r"\d+(?:/\d+)?"
_QUAD = re.compile(rf"^(?P<a>[+-]?{_RAT})?(?:(?P<s>[+-])?(?P<b>{_RAT})?\*?sqrt\((?P<d>\d+)\))$")


class InstanceError(ValueError):
    pass


def parse_exact(value, where: str = "value"):
    """A JSON scalar as a Fraction or QuadNumber; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(f"{where}: rationals must be strings like \"1/2\", got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise InstanceError(f"{where}: expected a rational string, got {type(value).__name__}")
    try:
        if "sqrt" in value:
            m = _QUAD.match("".join(value.split()))
            if not m:
                raise ValueError(f"malformed quadratic number {value!r}")
            a, sign, b = m.group("a"), m.group("s"), m.group("b")
            if a is not None and sign is None and b is None:
                a, b = None, a          # "c*sqrt(d)" has no rational part
            a = parse_rational(a) if a else Fraction(0)
            b = parse_rational(b) if b else Fraction(1)
            if sign == "-":
                b = -b
            q = QuadNumber(a, b, int(m.group("d")))
            return q.a if q.b == 0 else q
        return parse_rational(value)
    except ValueError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def format_exact(x) -> str:
    if isinstance(x, QuadNumber):
        if x.b == 0:
            return format_rational(x.a)
        if x.a == 0:
            return f"{format_rational(x.b)}*sqrt({x.d})"
        sign = "-" if x.b < 0 else "+"
        return f"{format_rational(x.a)}{sign}{format_rational(abs(x.b))}*sqrt({x.d})"
    return format_rational(x)


def to_wire(obj):
    """Replace exact scalars by strings, recursively (tuples become lists)."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (Fraction, QuadNumber)):
        return format_exact(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Divisor):
        return {n: format_exact(v) for n, v in sorted(obj.coeffs.items()) if v != 0}
    if isinstance(obj, dict):
        return {str(k): to_wire(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_wire(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


_RATIONAL_STR = re.compile(r"^-?\d+(/\d+)?$|sqrt\(")


def from_wire(obj):
    """Inverse of :func:`to_wire` on reports: rational strings become exact numbers."""
    if isinstance(obj, dict):
        return {k: from_wire(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_wire(v) for v in obj]
    if isinstance(obj, str) and _RATIONAL_STR.search(obj):
        try:
            return parse_exact(obj)
        except InstanceError:
            return obj
    return obj


def dump_json(obj) -> str:
    return json.dumps(to_wire(obj), sort_keys=True, indent=2, ensure_ascii=False)


# -- instance documents --------------------------------------------------------------

@dataclass
class InstanceDoc:
    version: int
    label: str = ""
    variety: ToricVariety | None = None
    divisors: dict = field(default_factory=dict)
    system: CharacteristicSystem | None = None
    cone: Cone | None = None
    chop: dict | None = None
    lifting: list = field(default_factory=list)
    certificate: object = None
    certificate_S: str | None = None
    dioph: dict | None = None
    raw: dict = field(default_factory=dict)


_TOP = {"version", "label", "variety", "divisors", "system", "cone", "chop", "lifting", "certificate",
        "dioph", "comment"}


def _keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise InstanceError(f"{where}: expected an object")
    for k in d:
        if k not in allowed:
            raise InstanceError(f"{where}: unknown field {k!r}")
    for k in required:
        if k not in d:
            raise InstanceError(f"{where}: missing field {k!r}")


def _int_vec(v, where):
    if not isinstance(v, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in v):
        raise InstanceError(f"{where}: expected a list of integers")
    return tuple(v)


def _int(v, where, minimum=None):
    if not isinstance(v, int) or isinstance(v, bool):
        raise InstanceError(f"{where}: expected an integer")
    if minimum is not None and v < minimum:
        raise InstanceError(f"{where}: must be at least {minimum}")
    return v


def _variety(d, where="variety"):
    _keys(d, {"preset", "rays", "max_cones", "names", "label"}, where)
    names = d.get("names")
    if "preset" in d:
        if "rays" in d or "max_cones" in d:
            raise InstanceError(f"{where}: give either preset or rays/max_cones")
        p = d["preset"]
        m = re.fullmatch(r"(P|F)(\d+)", p) if isinstance(p, str) else None
        if not m:
            raise InstanceError(f"{where}.preset: expected 'Pn' or 'Fa', got {p!r}")
        k = int(m.group(2))
        try:
            return projective_space(k, names) if m.group(1) == "P" else hirzebruch(k, names)
        except ValueError as exc:
            raise InstanceError(f"{where}: {exc}") from None
    _keys(d, {"rays", "max_cones", "names", "label"}, where, ("rays", "max_cones"))
    rays = [_int_vec(r, f"{where}.rays[{i}]") for i, r in enumerate(d["rays"])]
    cones = [_int_vec(c, f"{where}.max_cones[{i}]") for i, c in enumerate(d["max_cones"])]
    try:
        return ToricVariety(rays, cones, names, label=d.get("label", ""))
    except ValueError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def _divisor(x: ToricVariety, spec, divisors, where):
    """An inline coefficient map, a name from ``divisors``, ``"K"`` or a prime name."""
    if isinstance(spec, str):
        if spec in divisors:
            return divisors[spec]
        if spec == "K":
            return x.K
        if spec in x.names:
            return x.prime(spec)
        raise InstanceError(f"{where}: unknown divisor {spec!r}")
    if not isinstance(spec, dict):
        raise InstanceError(f"{where}: expected a divisor")
    coeffs = {}
    for n, v in spec.items():
        if n not in x.names:
            raise InstanceError(f"{where}: {n!r} is not a prime divisor of the variety")
        c = parse_exact(v, f"{where}.{n}")
        if isinstance(c, QuadNumber):
            raise InstanceError(f"{where}.{n}: divisor coefficients must be rational")
        coeffs[n] = c
    return x.divisor(coeffs)


def _rays(v, where):
    if not isinstance(v, list) or not v:
        raise InstanceError(f"{where}: expected a nonempty list of integer vectors")
    return [_int_vec(g, f"{where}[{i}]") for i, g in enumerate(v)]


def _system(x, d, divisors, where="system"):
    _keys(d, {"cone", "pieces", "K", "A", "r", "B", "boundary", "names", "maps"}, where, ("cone",))
    gens = _rays(d["cone"], f"{where}.cone")
    dim = len(gens[0])
    cone = Cone(gens, dim)
    dec = None
    if "pieces" in d:
        dec = ConeDecomposition(cone, [Cone(_rays(p, f"{where}.pieces[{k}]"), dim)
                                       for k, p in enumerate(d["pieces"])])
    try:
        if "maps" in d:
            _keys(d, {"cone", "pieces", "names", "maps"}, where)
            names = d.get("names", list(x.names))
            maps = [[[parse_exact(t, f"{where}.maps[{k}][{i}][{j}]") for j, t in enumerate(row)]
                     for i, row in enumerate(M)] for k, M in enumerate(d["maps"])]
            return CharacteristicSystem(cone, dec, names, maps, registry=x.registry)
        _keys(d, {"cone", "pieces", "K", "A", "r", "B", "boundary"}, where, ("A", "r", "B"))
        K = _divisor(x, d.get("K", "K"), divisors, f"{where}.K")
        A = _divisor(x, d["A"], divisors, f"{where}.A")
        rv, bv = {}, {}
        for i, e in enumerate(d["r"]):
            _keys(e, {"ray", "value"}, f"{where}.r[{i}]", ("ray", "value"))
            rv[_int_vec(e["ray"], f"{where}.r[{i}].ray")] = parse_exact(e["value"], f"{where}.r[{i}].value")
        for i, e in enumerate(d["B"]):
            _keys(e, {"ray", "divisor"}, f"{where}.B[{i}]", ("ray", "divisor"))
            bv[_int_vec(e["ray"], f"{where}.B[{i}].ray")] = _divisor(x, e["divisor"], divisors,
                                                                   f"{where}.B[{i}].divisor")
        return CharacteristicSystem.adjoint(cone, dec, x.registry, K, A, rv, bv, boundary=d.get("boundary"))
    except KeyError as exc:
        raise InstanceError(f"{where}: no value given on ray {exc.args[0]}") from None
    except ValueError as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"{where}: {exc}") from None


def _lifting(x, d, divisors, where):
    from .lifting import LiftingError, LiftingInstance
    _keys(d, {"S", "A", "B", "p", "label"}, where, ("S", "A", "B", "p"))
    if d["S"] not in x.names:
        raise InstanceError(f"{where}.S: unknown prime {d['S']!r}")
    A = _divisor(x, d["A"], divisors, f"{where}.A")
    B = _divisor(x, d["B"], divisors, f"{where}.B")
    try:
        return LiftingInstance(x, d["S"], A, B, _int(d["p"], f"{where}.p", 1))
    except (LiftingError, ValueError) as exc:
        raise InstanceError(f"{where}: {exc}") from None


def _certificate(x, d, where="certificate"):
    from .lifting import Lemma3Certificate
    from .toric import restriction
    _keys(d, {"S", "x", "points", "thetas", "weights", "denominators", "eps", "delta", "C", "M"}, where,
          ("S", "x", "points", "thetas", "weights", "denominators", "eps", "delta", "C"))
    if d["S"] not in x.names:
        raise InstanceError(f"{where}.S: unknown prime {d['S']!r}")
    surf = restriction(x, d["S"]).surface
    pts = [tuple(parse_exact(t, f"{where}.points[{i}][{j}]") for j, t in enumerate(w))
           for i, w in enumerate(d["points"])]
    thetas = []
    for i, th in enumerate(d["thetas"]):
        if not isinstance(th, dict):
            raise InstanceError(f"{where}.thetas[{i}]: expected a divisor on S")
        coeffs = {}
        for n, v in th.items():
            if n not in surf.names:
                raise InstanceError(f"{where}.thetas[{i}]: {n!r} is not a prime of S")
            coeffs[n] = parse_exact(v, f"{where}.thetas[{i}].{n}")
        thetas.append(surf.divisor(coeffs))
    cert = Lemma3Certificate(
        tuple(parse_exact(t, f"{where}.x[{j}]") for j, t in enumerate(d["x"])),
        pts, thetas,
        [parse_exact(t, f"{where}.weights[{i}]") for i, t in enumerate(d["weights"])],
        [_int(p, f"{where}.denominators[{i}]", 1) for i, p in enumerate(d["denominators"])],
        parse_exact(d["eps"], f"{where}.eps"), parse_exact(d["delta"], f"{where}.delta"),
        parse_exact(d["C"], f"{where}.C"), _int(d.get("M", 1), f"{where}.M", 1))
    return cert, d["S"]


def certificate_to_wire(cert, S) -> dict:
    return to_wire({"S": S, "x": list(cert.x), "points": [list(w) for w in cert.points],
                    "thetas": list(cert.thetas), "weights": list(cert.weights),
                    "denominators": list(cert.denominators), "eps": cert.eps, "delta": cert.delta,
                    "C": cert.C, "M": cert.M})


def load_instance(data: dict, origin: str = "<data>") -> InstanceDoc:
    _keys(data, _TOP, origin, ("version",))
    v = data["version"]
    if v != FORMAT_VERSION:
        raise InstanceError(f"{origin}: unsupported version {v!r} (expected {FORMAT_VERSION})")
    doc = InstanceDoc(v, data.get("label", ""), raw=data)
    if "cone" in data:
        c = data["cone"]
        _keys(c, {"generators"}, "cone", ("generators",))
        gens = _rays(c["generators"], "cone.generators")
        doc.cone = Cone(gens, len(gens[0]))
    if "variety" in data:
        doc.variety = _variety(data["variety"])
    x = doc.variety
    needs_x = [k for k in ("divisors", "system", "chop", "lifting", "certificate") if k in data]
    if needs_x and x is None:
        raise InstanceError(f"{origin}: {needs_x[0]} needs a variety")
    if "divisors" in data:
        if not isinstance(data["divisors"], dict):
            raise InstanceError("divisors: expected an object")
        for name, spec in data["divisors"].items():
            doc.divisors[name] = _divisor(x, spec, doc.divisors, f"divisors.{name}")
    if "system" in data:
        doc.system = _system(x, data["system"], doc.divisors)
    if "chop" in data:
        c = data["chop"]
        _keys(c, {"A", "K", "boundary", "b"}, "chop", ("A", "b"))
        boundary = c.get("boundary", list(x.names))
        for n in boundary:
            if n not in x.names:
                raise InstanceError(f"chop.boundary: unknown prime {n!r}")
        doc.chop = {"K": _divisor(x, c.get("K", "K"), doc.divisors, "chop.K"),
                    "A": _divisor(x, c["A"], doc.divisors, "chop.A"), "boundary": tuple(boundary),
                    "b": tuple(parse_exact(t, f"chop.b[{i}]") for i, t in enumerate(c["b"]))}
    if "lifting" in data:
        items = data["lifting"]
        if not isinstance(items, list):
            raise InstanceError("lifting: expected a list of instances")
        doc.lifting = [_lifting(x, d, doc.divisors, f"lifting[{i}]") for i, d in enumerate(items)]
    if "certificate" in data:
        doc.certificate, doc.certificate_S = _certificate(x, data["certificate"])
    if "dioph" in data:
        d = data["dioph"]
        _keys(d, {"x", "eps", "M"}, "dioph", ("x", "eps"))
        doc.dioph = {"x": [parse_exact(t, f"dioph.x[{i}]") for i, t in enumerate(d["x"])],
                     "eps": parse_exact(d["eps"], "dioph.eps"), "M": _int(d.get("M", 1), "dioph.M", 1)}
    return doc


def parse_instance(path) -> InstanceDoc:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return load_instance(data, str(path))


def _reject_float(s):
    raise InstanceError(f"rationals must be strings like \"1/2\", got the JSON number {s}")


def bundled_instance(name: str) -> Path:
    """Path of a bundled instance file (``p1``, ``p2``, ``f1``, ``f1-lift``, ...)."""
    from importlib import resources
    p = resources.files("adjoint_kernel") / "instances" / f"{name}.json"
    return Path(str(p))
