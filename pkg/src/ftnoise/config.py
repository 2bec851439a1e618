"""Loading and checking run configurations

A configuration is a YAML document:

    t0: 1.0
    m: 2
    layout:
      count: 3
    coupling:
      variant: table
      table:
        - {qubits: [0, 1], norm: 0.01}
    envelope:
      variant: constant_one

Every problem is raised as a ConfigError naming the offending field by its
dotted path, e.g. "coupling.table[0].norm".
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Tuple

import yaml

from ftnoise.bound_engine import Envelope
from ftnoise.constants import (
    ALPHA0,
    COUPLING_VARIANTS,
    DEFAULT_M,
    DEFAULT_MAX_R,
    DEFAULT_T0,
    ENUMERATION_BUDGET,
    ENVELOPE_VARIANTS,
    EPSILON0,
    SWEEP_PARAMETERS,
)
from ftnoise.dyson import BathTerm, CouplingTerm, Gate, SimInstance, Step
from ftnoise.errors import ConfigError, FtNoiseException, InputError
from ftnoise.noise_model import CouplingSpec, NoiseModel, QubitLayout, validate

_logger = logging.getLogger(__name__)

TOP_LEVEL = {
    "t0",
    "m",
    "epsilon0",
    "alpha0",
    "enumeration_budget",
    "layout",
    "coupling",
    "envelope",
    "verify",
    "sweep",
}
LAYOUT_KEYS = {"count", "positions", "metric"}
COUPLING_KEYS = {"variant", "table", "amplitudes", "kernel", "rate", "k_max"}
TABLE_KEYS = {"qubits", "norm"}
ENVELOPE_KEYS = {"variant", "p", "values"}
VERIFY_KEYS = {"n_sys", "n_bath", "bath_h", "sb_terms", "steps", "max_r"}
BATH_KEYS = {"coefficient", "paulis"}
TERM_KEYS = {"coefficient", "qubits", "system", "bath"}
STEP_KEYS = {"locations", "duration", "gates"}
GATE_KEYS = {"name", "qubits"}
SWEEP_KEYS = {"parameter", "values"}

REQUIRED_SECTIONS = {
    "analyze": ["layout", "coupling"],
    "sweep": ["layout", "coupling", "sweep"],
    "verify": ["verify"],
}


@dataclass(frozen=True)
class VerifySection:
    instance: SimInstance
    max_r: int = DEFAULT_MAX_R


@dataclass(frozen=True)
class SweepSection:
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class Config:
    """A parsed and validated run configuration"""

    t0: float = DEFAULT_T0
    m: int = DEFAULT_M
    epsilon0: float = EPSILON0
    alpha0: float = ALPHA0
    enumeration_budget: int = ENUMERATION_BUDGET
    layout: Optional[QubitLayout] = None
    coupling: Optional[CouplingSpec] = None
    envelope: Envelope = field(default_factory=Envelope)
    verify: Optional[VerifySection] = None
    sweep: Optional[SweepSection] = None
    config_hash: str = ""

    def noise_model(self) -> NoiseModel:
        if self.layout is None or self.coupling is None:
            raise ConfigError("coupling", "no noise model is configured")
        return NoiseModel(layout=self.layout, coupling=self.coupling, t0=self.t0)


def config_hash(document: Any) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, compact) of a parsed
    configuration"""
    canonical = json.dumps(
        document, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _mapping(value: Any, path: str, allowed: set) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a mapping")
    for key in value:
        if key not in allowed:
            name = f"{path}.{key}" if path else str(key)
            raise ConfigError(name, "unknown field")
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    return value


def _number(value: Any, path: str) -> float:
    # YAML 1.1 reads exponents without a decimal point (1e-4) as strings
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(path, f"expected a number, got {value!r}")
    if not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value}")
    return value


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _positive(value: Any, path: str) -> float:
    number = _number(value, path)
    if number <= 0:
        raise ConfigError(path, f"must be positive, got {number}")
    return number


def _string(value: Any, path: str, choices: Optional[List[str]] = None) -> str:
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(path, f"'{value}' is not one of {choices}")
    return value


def _qubits(value: Any, path: str) -> Tuple[int, ...]:
    return tuple(
        _integer(q, f"{path}[{i}]") for i, q in enumerate(_list(value, path))
    )


def _layout(data: Any) -> QubitLayout:
    data = _mapping(data, "layout", LAYOUT_KEYS)
    if "count" not in data:
        raise ConfigError("layout.count", "missing")
    positions = None
    if "positions" in data:
        positions = tuple(
            tuple(
                _number(x, f"layout.positions[{i}][{j}]")
                for j, x in enumerate(_list(p, f"layout.positions[{i}]"))
            )
            for i, p in enumerate(_list(data["positions"], "layout.positions"))
        )
    return QubitLayout(
        count=_integer(data["count"], "layout.count"),
        positions=positions,
        metric=_string(data.get("metric", "euclidean"), "layout.metric"),
    )


def _coupling(data: Any) -> CouplingSpec:
    data = _mapping(data, "coupling", COUPLING_KEYS)
    variant = _string(
        data.get("variant", "table"), "coupling.variant", COUPLING_VARIANTS
    )
    table = {}
    for i, entry in enumerate(_list(data.get("table", []), "coupling.table")):
        path = f"coupling.table[{i}]"
        entry = _mapping(entry, path, TABLE_KEYS)
        for key in ("qubits", "norm"):
            if key not in entry:
                raise ConfigError(f"{path}.{key}", "missing")
        qubits = _qubits(entry["qubits"], f"{path}.qubits")
        if not qubits:
            raise ConfigError(f"{path}.qubits", "must name at least one qubit")
        if len(set(qubits)) != len(qubits):
            raise ConfigError(f"{path}.qubits", "repeated qubit index")
        key = tuple(sorted(qubits))
        if key in table:
            raise ConfigError(f"{path}.qubits", f"{list(key)} is declared twice")
        table[key] = _number(entry["norm"], f"{path}.norm")
    amplitudes = tuple(
        _number(a, f"coupling.amplitudes[{i}]")
        for i, a in enumerate(_list(data.get("amplitudes", []), "coupling.amplitudes"))
    )
    k_max = None
    if data.get("k_max") is not None:
        k_max = _integer(data["k_max"], "coupling.k_max")
    if variant == "table" and amplitudes:
        raise ConfigError("coupling.amplitudes", "not allowed for a table coupling")
    if variant == "parametric" and table:
        raise ConfigError("coupling.table", "not allowed for a parametric coupling")
    return CouplingSpec(
        variant=variant,
        table=table,
        amplitudes=amplitudes,
        kernel=_string(data.get("kernel", "exponential"), "coupling.kernel"),
        rate=_number(data.get("rate", 0.0), "coupling.rate"),
        k_max=k_max,
    )


def _envelope(data: Any) -> Envelope:
    if data is None:
        return Envelope()
    data = _mapping(data, "envelope", ENVELOPE_KEYS)
    variant = _string(
        data.get("variant", "constant_one"), "envelope.variant", ENVELOPE_VARIANTS
    )
    values = tuple(
        _number(v, f"envelope.values[{i}]")
        for i, v in enumerate(_list(data.get("values", []), "envelope.values"))
    )
    p = _number(data.get("p", 1.0), "envelope.p")
    try:
        return Envelope(variant, p=p, values=values)
    except FtNoiseException as e:
        raise ConfigError("envelope", str(e))


def _verify(data: Any) -> VerifySection:
    data = _mapping(data, "verify", VERIFY_KEYS)
    for key in ("n_sys", "n_bath", "steps"):
        if key not in data:
            raise ConfigError(f"verify.{key}", "missing")
    bath_h = []
    for i, term in enumerate(_list(data.get("bath_h", []), "verify.bath_h")):
        path = f"verify.bath_h[{i}]"
        term = _mapping(term, path, BATH_KEYS)
        bath_h.append(
            BathTerm(
                _number(term.get("coefficient", 0.0), f"{path}.coefficient"),
                _string(term.get("paulis", ""), f"{path}.paulis"),
            )
        )
    sb_terms = []
    for i, term in enumerate(_list(data.get("sb_terms", []), "verify.sb_terms")):
        path = f"verify.sb_terms[{i}]"
        term = _mapping(term, path, TERM_KEYS)
        try:
            sb_terms.append(
                CouplingTerm(
                    _number(term.get("coefficient", 0.0), f"{path}.coefficient"),
                    _qubits(term.get("qubits", []), f"{path}.qubits"),
                    _string(term.get("system", ""), f"{path}.system"),
                    _string(term.get("bath", ""), f"{path}.bath"),
                )
            )
        except ConfigError:
            raise
        except FtNoiseException as e:
            raise ConfigError(path, str(e))
    steps = []
    for i, step in enumerate(_list(data["steps"], "verify.steps")):
        path = f"verify.steps[{i}]"
        step = _mapping(step, path, STEP_KEYS)
        raw_locations = _list(step.get("locations", []), f"{path}.locations")
        locations = tuple(
            _qubits(loc, f"{path}.locations[{j}]")
            for j, loc in enumerate(raw_locations)
        )
        gates = []
        for j, gate in enumerate(_list(step.get("gates", []), f"{path}.gates")):
            gpath = f"{path}.gates[{j}]"
            gate = _mapping(gate, gpath, GATE_KEYS)
            gates.append(
                Gate(
                    _string(gate.get("name", ""), f"{gpath}.name").upper(),
                    _qubits(gate.get("qubits", []), f"{gpath}.qubits"),
                )
            )
        steps.append(
            Step(
                locations,
                _positive(step.get("duration", 1.0), f"{path}.duration"),
                tuple(gates),
            )
        )
    max_r = _integer(data.get("max_r", DEFAULT_MAX_R), "verify.max_r")
    if max_r < 1:
        raise ConfigError("verify.max_r", f"must be at least 1, got {max_r}")
    instance = SimInstance(
        n_sys=_integer(data["n_sys"], "verify.n_sys"),
        n_bath=_integer(data["n_bath"], "verify.n_bath"),
        bath_h=tuple(bath_h),
        sb_terms=tuple(sb_terms),
        steps=tuple(steps),
    )
    try:
        instance.validate()
    except InputError as e:
        raise ConfigError("verify", str(e))
    return VerifySection(instance=instance, max_r=max_r)


def _sweep(data: Any) -> SweepSection:
    data = _mapping(data, "sweep", SWEEP_KEYS)
    if "parameter" not in data:
        raise ConfigError("sweep.parameter", "missing")
    parameter = _string(data["parameter"], "sweep.parameter", SWEEP_PARAMETERS)
    values = tuple(
        _number(v, f"sweep.values[{i}]")
        for i, v in enumerate(_list(data.get("values", []), "sweep.values"))
    )
    if not values:
        raise ConfigError("sweep.values", "at least one value is required")
    if parameter == "t0" and any(v <= 0 for v in values):
        raise ConfigError("sweep.values", "t0 values must be positive")
    if parameter == "lambda_scale" and any(v < 0 for v in values):
        raise ConfigError("sweep.values", "lambda_scale values must be nonnegative")
    return SweepSection(parameter=parameter, values=values)


def parse_config(document: Any, command: Optional[str] = None) -> Config:
    """Builds a Config from a parsed YAML document

    Args:
      document: the result of yaml.safe_load
      command (str): "analyze", "verify" or "sweep"; the sections it needs
        must be present

    Returns:
      Config

    Raises:
      ConfigError naming the field at fault
    """
    if document is None:
        document = {}
    data = _mapping(document, "", TOP_LEVEL)
    for section in REQUIRED_SECTIONS.get(command, []):
        if data.get(section) is None:
            raise ConfigError(section, f"section is required for {command}")

    t0 = _positive(data.get("t0", DEFAULT_T0), "t0")
    m = _integer(data.get("m", DEFAULT_M), "m")
    if m < 1:
        raise ConfigError("m", f"must be at least 1, got {m}")
    budget = _integer(
        data.get("enumeration_budget", ENUMERATION_BUDGET), "enumeration_budget"
    )
    if budget < 1:
        raise ConfigError("enumeration_budget", f"must be positive, got {budget}")

    layout = coupling = None
    if data.get("layout") is not None:
        layout = _layout(data["layout"])
    if data.get("coupling") is not None:
        try:
            coupling = _coupling(data["coupling"])
        except ConfigError:
            raise
        except FtNoiseException as e:
            raise ConfigError("coupling", str(e))
    if (layout is None) != (coupling is None):
        missing = "coupling" if coupling is None else "layout"
        raise ConfigError(missing, "layout and coupling must be given together")

    config = Config(
        t0=t0,
        m=m,
        epsilon0=_positive(data.get("epsilon0", EPSILON0), "epsilon0"),
        alpha0=_positive(data.get("alpha0", ALPHA0), "alpha0"),
        enumeration_budget=budget,
        layout=layout,
        coupling=coupling,
        envelope=_envelope(data.get("envelope")),
        verify=_verify(data["verify"]) if data.get("verify") is not None else None,
        sweep=_sweep(data["sweep"]) if data.get("sweep") is not None else None,
        config_hash=config_hash(document),
    )
    if layout is not None:
        diagnostics = validate(config.noise_model())
        if diagnostics:
            for message in diagnostics:
                _logger.error(message)
            raise ConfigError(_diagnostic_field(diagnostics[0]), diagnostics[0])
    return config


def _diagnostic_field(message: str) -> str:
    for prefix, name in (
        ("t0", "t0"),
        ("table entry", "coupling.table"),
        ("amplitude", "coupling.amplitudes"),
        ("positions", "layout.positions"),
        ("layout", "layout"),
        ("unknown metric", "layout.metric"),
        ("unknown kernel", "coupling.kernel"),
        ("kernel rate", "coupling.rate"),
        ("k_max", "coupling.k_max"),
    ):
        if message.startswith(prefix):
            return name
    if "positions" in message:
        return "layout.positions"
    return "coupling"


def load_config(path: Path, command: Optional[str] = None) -> Config:
    """Reads and validates a YAML configuration file

    Args:
      path (Path): the file
      command (str): the CLI command the configuration is for

    Returns:
      Config

    Raises:
      ConfigError if the file can't be read or parsed, or breaks the schema
    """
    path = Path(path)
    try:
        with open(path, "r") as fh:
            document = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(str(path), f"can't read config: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"can't parse config: {e}")
    config = parse_config(document, command)
    _logger.info(f"loaded {path} ({config.config_hash[:12]})")
    return config
