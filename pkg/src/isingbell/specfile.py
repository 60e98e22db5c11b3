"""Reading and writing lattice spec files.

A spec file is a JSON document:

    {
      "n_sites": 10,
      "edges": [["1", "3", 1.4], ...],          # site refs: index or label
      "fields": [1.0, ...] or {"a": 0.4, ...},  # array by site, or map
      "beta": 1.0,
      "roles": {"outcome1": "1", "outcome2": "2",
                "settingA": "a", "settingB": "b", "hidden": ["3", ...]},
      "labels": {"1": 0, "3": 1, ...},          # optional label -> index
      "mirror_map": {"1": "2", ...},            # optional involution
      "quantum": {"J": 1.0, "h": 0.5, "beta": 1.0}   # optional
    }

Reals are written as plain decimal literals produced by repr(), which
round-trip bit-exactly through the JSON parser; quoted decimal strings are
accepted on input as well. Dumping a parsed spec and re-parsing it yields an
identical spec.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import SpecFileError
from .lattice import LatticeSpec, RoleAssignment


@dataclass(frozen=True)
class QuantumParams:
    """The quantum block: uniform coupling, transverse strength, temperature."""

    coupling: float
    transverse: float
    beta: float


@dataclass(frozen=True)
class SpecDocument:
    lattice: LatticeSpec
    quantum: QuantumParams | None = None


def _real(value, where: str) -> float:
    if isinstance(value, bool):
        raise SpecFileError(f"{where}: expected a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise SpecFileError(f"{where}: not a decimal real: {value!r}") from None
    raise SpecFileError(f"{where}: expected a real number, got {value!r}")


def _site(ref, labels: dict[str, int], n: int, where: str) -> int:
    if isinstance(ref, str):
        if ref in labels:
            return labels[ref]
        if ref.lstrip("-").isdigit():
            ref = int(ref)
        else:
            raise SpecFileError(f"{where}: unknown site label {ref!r}")
    if not isinstance(ref, int) or isinstance(ref, bool):
        raise SpecFileError(f"{where}: bad site reference {ref!r}")
    if not 0 <= ref < n:
        raise SpecFileError(f"{where}: site {ref} out of range [0, {n})")
    return ref


def parse_spec_text(text: str) -> SpecDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SpecFileError("spec file must contain a JSON object")

    try:
        n = int(doc["n_sites"])
    except KeyError:
        raise SpecFileError("missing required field n_sites") from None

    labels_raw = doc.get("labels") or {}
    if not isinstance(labels_raw, dict):
        raise SpecFileError("labels must be an object mapping label -> index")
    labels = {str(k): int(v) for k, v in labels_raw.items()}

    edges = []
    for k, entry in enumerate(doc.get("edges", [])):
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise SpecFileError(f"edges[{k}] must be [site, site, J]")
        i = _site(entry[0], labels, n, f"edges[{k}]")
        j = _site(entry[1], labels, n, f"edges[{k}]")
        edges.append((i, j, _real(entry[2], f"edges[{k}].J")))

    fields_raw = doc.get("fields", [0.0] * n)
    if isinstance(fields_raw, dict):
        fields = [0.0] * n
        for ref, v in fields_raw.items():
            fields[_site(ref, labels, n, "fields")] = _real(v, f"fields[{ref}]")
    elif isinstance(fields_raw, list):
        if len(fields_raw) != n:
            raise SpecFileError(
                f"fields array has {len(fields_raw)} entries, expected {n}")
        fields = [_real(v, f"fields[{k}]") for k, v in enumerate(fields_raw)]
    else:
        raise SpecFileError("fields must be an array or an object")

    beta = _real(doc.get("beta", 1.0), "beta")

    roles = None
    if "roles" in doc and doc["roles"] is not None:
        r = doc["roles"]
        try:
            roles = RoleAssignment(
                outcome1=_site(r["outcome1"], labels, n, "roles.outcome1"),
                outcome2=_site(r["outcome2"], labels, n, "roles.outcome2"),
                setting_a=_site(r["settingA"], labels, n, "roles.settingA"),
                setting_b=_site(r["settingB"], labels, n, "roles.settingB"),
                hidden=tuple(_site(s, labels, n, "roles.hidden")
                             for s in r.get("hidden", [])),
            )
        except KeyError as exc:
            raise SpecFileError(f"roles block missing {exc.args[0]!r}") from None

    mirror = None
    if "mirror_map" in doc and doc["mirror_map"] is not None:
        mm = doc["mirror_map"]
        if not isinstance(mm, dict):
            raise SpecFileError("mirror_map must be an object")
        mirror = {}
        for a, b in mm.items():
            sa = _site(a, labels, n, "mirror_map")
            sb = _site(b, labels, n, "mirror_map")
            mirror[sa] = sb
            mirror.setdefault(sb, sa)

    quantum = None
    if "quantum" in doc and doc["quantum"] is not None:
        q = doc["quantum"]
        try:
            quantum = QuantumParams(coupling=_real(q["J"], "quantum.J"),
                                    transverse=_real(q["h"], "quantum.h"),
                                    beta=_real(q["beta"], "quantum.beta"))
        except KeyError as exc:
            raise SpecFileError(f"quantum block missing {exc.args[0]!r}") from None

    lattice = LatticeSpec(n_sites=n, edges=tuple(edges), fields=tuple(fields),
                          beta=beta, roles=roles, labels=labels or None,
                          mirror=mirror)
    return SpecDocument(lattice=lattice, quantum=quantum)


def load_spec_file(path: str | Path) -> SpecDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc.strerror}") from exc
    return parse_spec_text(text)


def dump_spec_text(spec: LatticeSpec, quantum: QuantumParams | None = None) -> str:
    """Serialize to the canonical on-disk form (integer sites, repr reals)."""
    doc: dict = {
        "n_sites": spec.n_sites,
        "edges": [[int(i), int(j), float(k)] for i, j, k in spec.edges],
        "fields": [float(h) for h in spec.fields],
        "beta": float(spec.beta),
    }
    if spec.roles is not None:
        doc["roles"] = {
            "outcome1": spec.roles.outcome1,
            "outcome2": spec.roles.outcome2,
            "settingA": spec.roles.setting_a,
            "settingB": spec.roles.setting_b,
            "hidden": list(spec.roles.hidden),
        }
    if spec.labels is not None:
        doc["labels"] = dict(sorted(spec.labels.items()))
    if spec.mirror is not None:
        doc["mirror_map"] = {str(a): b for a, b in sorted(spec.mirror.items())}
    if quantum is not None:
        doc["quantum"] = {"J": quantum.coupling, "h": quantum.transverse,
                          "beta": quantum.beta}
    return json.dumps(doc, indent=2) + "\n"


def save_spec_file(path: str | Path, spec: LatticeSpec,
                   quantum: QuantumParams | None = None) -> None:
    Path(path).write_text(dump_spec_text(spec, quantum), encoding="utf-8")


BUNDLED = ("grid2x5_default", "grid2x5_tuned", "grid2x5_j0", "grid2x5_broken_cut")


def bundled_spec(name: str) -> SpecDocument:
    """Load one of the specs shipped with the package."""
    if name not in BUNDLED:
        raise SpecFileError(f"no bundled spec {name!r}; available: {BUNDLED}")
    text = resources.files("isingbell").joinpath(f"specs/{name}.json").read_text("utf-8")
    return parse_spec_text(text)
