"""Device configuration: one JSON document describing the full system.

Field names carry explicit units (e.g. ``L_pH``, ``I0_uA``).  Parsing is
strict: missing or unknown fields raise ConfigError naming the offender, and
parse -> emit -> parse round-trips are stable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .coupler import QubitPair
from .errors import ConfigError
from .noise import NoiseSpec
from .squid import SquidParams

_SQUID_FIELDS = ("L_pH", "C_fF", "I0_uA")
_QUBIT_FIELDS = (
    "Iq1_uA",
    "Iq2_uA",
    "delta1_GHz",
    "delta2_GHz",
    "eps1_GHz",
    "eps2_GHz",
    "Mqs_pH",
    "Mqq_pH",
)
_NOISE_FIELDS = ("R_kohm", "temperature_K")
_TOP_FIELDS = ("squid", "qubits", "noise", "phi_s", "crosstalk")
_CROSSTALK_FIELDS = ("kappa_mw", "bias_shift_sign")


@dataclass(frozen=True)
class DeviceConfig:
    """Complete device description consumed by the CLI commands."""

    squid: SquidParams
    qubits: QubitPair
    noise: NoiseSpec
    phi_s: float
    kappa_mw: float
    bias_shift_sign: int

    def __post_init__(self):
        if self.bias_shift_sign not in (-1, 1):
            raise ConfigError("crosstalk.bias_shift_sign must be -1 or +1")

    # -- JSON ---------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "squid": {
                "L_pH": self.squid.L_pH,
                "C_fF": self.squid.C_fF,
                "I0_uA": self.squid.I0_uA,
            },
            "qubits": {f: getattr(self.qubits, f) for f in _QUBIT_FIELDS},
            "noise": {
                "R_kohm": self.noise.R_kohm,
                "temperature_K": self.noise.temperature_K,
            },
            "phi_s": self.phi_s,
            "crosstalk": {
                "kappa_mw": self.kappa_mw,
                "bias_shift_sign": self.bias_shift_sign,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DeviceConfig":
        def section(name: str, fields: tuple[str, ...]) -> dict:
            if name not in doc:
                raise ConfigError(f"missing config section '{name}'")
            block = doc[name]
            for f in fields:
                if f not in block:
                    raise ConfigError(f"missing config field '{name}.{f}'")
            extra = set(block) - set(fields)
            if extra:
                raise ConfigError(f"unknown config fields in '{name}': {sorted(extra)}")
            return block

        if "phi_s" not in doc:
            raise ConfigError("missing config field 'phi_s'")
        extra = set(doc) - set(_TOP_FIELDS)
        if extra:
            raise ConfigError(f"unknown top-level config fields: {sorted(extra)}")
        squid = section("squid", _SQUID_FIELDS)
        qubits = section("qubits", _QUBIT_FIELDS)
        noise = section("noise", _NOISE_FIELDS)
        xt = section("crosstalk", _CROSSTALK_FIELDS)
        try:
            return cls(
                squid=SquidParams(**squid),
                qubits=QubitPair(**qubits),
                noise=NoiseSpec(**noise),
                phi_s=float(doc["phi_s"]),
                kappa_mw=float(xt["kappa_mw"]),
                bias_shift_sign=int(xt["bias_shift_sign"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "DeviceConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_json_dict(doc)

    @classmethod
    def load(cls, path: str | Path) -> "DeviceConfig":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def sha256(self) -> str:
        """Digest of the canonical JSON form, for output provenance headers."""
        canonical = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def paper_device() -> DeviceConfig:
    """Reference device bundled with the package."""
    text = resources.files("squidcoupler.data").joinpath("paper-device.json").read_text()
    return DeviceConfig.from_json(text)
