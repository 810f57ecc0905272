"""Run configuration: flat dotted-key text files or JSON, plus env overrides.

Text grammar (one assignment per line, ``#`` starts a comment)::

    channel.eta_loss_db = 42.0
    channel.p_ec = 1e-6
    sweep.eta_loss_db = 10, 20, 30        # comma list
    sweep.log10_pec = -7:-3:1             # start:stop:step, stop inclusive

JSON files hold the same keys as nested objects, one level per dot.
Environment variables prefixed ``FSQKD_`` override file values, e.g.
``FSQKD_CHANNEL_P_EC=1e-5`` sets ``channel.p_ec``.  Unknown keys are
rejected by name.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .channel import ChannelConditions, ParameterError, ProtocolParams
from .finitekey import SecurityParams
from .optimize import OptimizationSpec, Regime
from .scenarios import LossBudgetQuery, SweepSpec
from .uncertainty import IntensityUncertaintyModel

ENV_PREFIX = "FSQKD_"
# control variables that are not configuration overrides
ENV_RESERVED = {"FSQKD_NUMBA"}

FLOAT, INT, STR, FLOATLIST = "float", "int", "str", "floatlist"

SCHEMA: dict[str, str] = {
    "channel.eta_loss_db": FLOAT,
    "channel.p_ec": FLOAT,
    "channel.qber_i": FLOAT,
    "channel.p_ap": FLOAT,
    "channel.f_s": FLOAT,
    "channel.integration_time_s": FLOAT,
    "security.eps_s": FLOAT,
    "security.eps_c": FLOAT,
    "security.beta": FLOAT,
    "protocol.pax": FLOAT,
    "protocol.pbx": FLOAT,
    "protocol.mu1": FLOAT,
    "protocol.mu2": FLOAT,
    "protocol.mu3": FLOAT,
    "protocol.p_mu1": FLOAT,
    "protocol.p_mu2": FLOAT,
    "protocol.p_mu3": FLOAT,
    "ec.method": STR,
    "ec.f_ec": FLOAT,
    "optimize.regime": STR,
    "optimize.pbx": FLOAT,
    "optimize.mu1": FLOAT,
    "optimize.mu2": FLOAT,
    "optimize.mu3": FLOAT,
    "optimize.restarts": INT,
    "optimize.seed": INT,
    "optimize.tolerance": FLOAT,
    "optimize.max_evals": INT,
    "sweep.eta_loss_db": FLOATLIST,
    "sweep.log10_pec": FLOATLIST,
    "sweep.qber_i": FLOATLIST,
    "sweep.tau_s": FLOATLIST,
    "budget.target_bits": INT,
    "budget.eta_min_db": FLOAT,
    "budget.eta_max_db": FLOAT,
    "budget.resolution_db": FLOAT,
    "worstcase.f": FLOAT,
    "worstcase.grid_points": INT,
    "output.format": STR,
    "output.path": STR,
}

DEFAULTS: dict[str, Any] = {
    "channel.p_ap": 1e-3,
    "channel.f_s": 1e8,
    "security.eps_s": 1e-9,
    "security.eps_c": 1e-15,
    "ec.method": "binomial",
    "ec.f_ec": 1.16,
    "optimize.restarts": 8,
    "optimize.seed": 0,
    "optimize.tolerance": 1e-5,
    "optimize.max_evals": 2000,
    "optimize.mu3": 1e-9,
    "budget.target_bits": 0,
    "budget.eta_min_db": 0.0,
    "budget.eta_max_db": 60.0,
    "budget.resolution_db": 0.1,
    "worstcase.grid_points": 3,
}


class ConfigError(ValueError):
    """Malformed configuration input."""


def _parse_floatlist(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range syntax must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0:
            raise ConfigError(f"range step must be positive, got {step}")
        vals = []
        v = start
        while v <= stop + 1e-9 * max(1.0, abs(stop)):
            vals.append(v)
            v += step
        return tuple(vals)
    return tuple(float(p) for p in text.split(",") if p.strip())


def _coerce(key: str, value: Any) -> Any:
    kind = SCHEMA[key]
    try:
        if kind == FLOAT:
            v = float(value)
            if not math.isfinite(v):
                raise ValueError("non-finite")
            return v
        if kind == INT:
            if isinstance(value, str):
                return int(value, 0)
            iv = int(value)
            if iv != value:
                raise ValueError("not an integer")
            return iv
        if kind == FLOATLIST:
            if isinstance(value, (list, tuple)):
                return tuple(float(v) for v in value)
            return _parse_floatlist(str(value))
        return str(value).strip()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc


def _flatten(prefix: str, obj: Any, out: dict[str, Any]) -> None:
    if isinstance(obj, dict):
        for sub, val in obj.items():
            name = f"{prefix}.{sub}" if prefix else str(sub)
            _flatten(name, val, out)
    else:
        out[prefix] = obj


@dataclass
class RunConfig:
    """Validated flat configuration with typed section builders."""

    values: dict[str, Any]

    @classmethod
    def load(cls, path: str | Path | None, env: dict[str, str] | None = None) -> "RunConfig":
        """Read a config file (text or JSON by content), apply env overrides."""
        raw: dict[str, Any] = {}
        if path is not None:
            text = Path(path).read_text()
            stripped = text.lstrip()
            if stripped.startswith("{"):
                try:
                    nested = json.loads(text)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"invalid JSON config: {exc}") from exc
                if not isinstance(nested, dict):
                    raise ConfigError("JSON config must be an object")
                _flatten("", nested, raw)
            else:
                for lineno, line in enumerate(text.splitlines(), start=1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    if "=" not in line:
                        raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
                    key, value = line.split("=", 1)
                    raw[key.strip()] = value.strip()
        env = os.environ if env is None else env
        for name, value in env.items():
            if not name.startswith(ENV_PREFIX) or name in ENV_RESERVED:
                continue
            rest = name[len(ENV_PREFIX):].lower()
            if "_" not in rest:
                raise ConfigError(f"malformed override variable {name!r}")
            section, key = rest.split("_", 1)
            raw[f"{section}.{key}"] = value

        values = dict(DEFAULTS)
        for key, value in raw.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key {key!r}")
            values[key] = _coerce(key, value)
        return cls(values=values)

    def has(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.values:
            raise ConfigError(f"missing required configuration key {key!r}")
        return self.values[key]

    # --- section builders -------------------------------------------------
    def channel(self) -> ChannelConditions:
        try:
            return ChannelConditions(
                eta_loss_db=self.require("channel.eta_loss_db"),
                p_ec=self.require("channel.p_ec"),
                qber_i=self.require("channel.qber_i"),
                integration_time_s=self.require("channel.integration_time_s"),
                p_ap=self.get("channel.p_ap"),
                f_s=self.get("channel.f_s"),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def security(self) -> SecurityParams:
        try:
            return SecurityParams(
                eps_s=self.get("security.eps_s"),
                eps_c=self.get("security.eps_c"),
                beta=self.get("security.beta"),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def protocol(self) -> ProtocolParams:
        p1 = self.require("protocol.p_mu1")
        p2 = self.require("protocol.p_mu2")
        p3 = self.get("protocol.p_mu3")
        if p3 is None:
            p3 = 1.0 - p1 - p2
        try:
            return ProtocolParams(
                pax=self.require("protocol.pax"),
                pbx=self.require("protocol.pbx"),
                mu=(self.require("protocol.mu1"), self.require("protocol.mu2"),
                    self.get("protocol.mu3", 0.0)),
                p_mu=(p1, p2, p3),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def ec_method(self) -> tuple[str, float]:
        method = self.get("ec.method")
        if method not in ("binomial", "rate-factor"):
            raise ConfigError(f"ec.method must be 'binomial' or 'rate-factor', got {method!r}")
        return method, self.get("ec.f_ec")

    def opt_spec(self, seed_override: int | None = None) -> OptimizationSpec:
        regime_name = self.require("optimize.regime")
        try:
            regime = Regime(regime_name)
        except ValueError as exc:
            raise ConfigError(f"unknown optimize.regime {regime_name!r}") from exc
        mu = None
        if regime is Regime.FIXED_PBX_AND_MU:
            mu = (self.require("optimize.mu1"), self.require("optimize.mu2"),
                  self.get("optimize.mu3"))
        pbx = self.get("optimize.pbx")
        seed = self.get("optimize.seed") if seed_override is None else seed_override
        try:
            return OptimizationSpec(
                regime=regime, pbx=pbx, mu=mu, mu3=self.get("optimize.mu3"),
                restarts=self.get("optimize.restarts"), seed=seed,
                tolerance=self.get("optimize.tolerance"),
                max_evals_per_restart=self.get("optimize.max_evals"),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_spec(self, seed_override: int | None = None) -> SweepSpec:
        fixed = all(self.has(k) for k in
                    ("protocol.pax", "protocol.pbx", "protocol.mu1",
                     "protocol.mu2", "protocol.p_mu1", "protocol.p_mu2"))
        use_opt = self.has("optimize.regime")
        if use_opt and fixed:
            raise ConfigError("give either a protocol section or an optimize.regime, not both")
        try:
            return SweepSpec(
                eta_loss_db=self.require("sweep.eta_loss_db"),
                log10_pec=self.require("sweep.log10_pec"),
                qber_i=self.require("sweep.qber_i"),
                tau_s=self.require("sweep.tau_s"),
                params=self.protocol() if fixed else None,
                opt_spec=self.opt_spec(seed_override) if use_opt else None,
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def budget_query(self, seed_override: int | None = None) -> LossBudgetQuery:
        fixed = all(self.has(k) for k in
                    ("protocol.pax", "protocol.pbx", "protocol.mu1",
                     "protocol.mu2", "protocol.p_mu1", "protocol.p_mu2"))
        use_opt = self.has("optimize.regime")
        if use_opt and fixed:
            raise ConfigError("give either a protocol section or an optimize.regime, not both")
        try:
            return LossBudgetQuery(
                conditions=self.channel() if self.has("channel.eta_loss_db")
                else self._channel_without_loss(),
                target_bits=self.get("budget.target_bits"),
                eta_min_db=self.get("budget.eta_min_db"),
                eta_max_db=self.get("budget.eta_max_db"),
                resolution_db=self.get("budget.resolution_db"),
                params=self.protocol() if fixed else None,
                opt_spec=self.opt_spec(seed_override) if use_opt else None,
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def _channel_without_loss(self) -> ChannelConditions:
        try:
            return ChannelConditions(
                eta_loss_db=0.0,
                p_ec=self.require("channel.p_ec"),
                qber_i=self.require("channel.qber_i"),
                integration_time_s=self.require("channel.integration_time_s"),
                p_ap=self.get("channel.p_ap"),
                f_s=self.get("channel.f_s"),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def uncertainty_model(self) -> IntensityUncertaintyModel:
        try:
            return IntensityUncertaintyModel(
                f=self.require("worstcase.f"),
                nominal=self.protocol(),
                grid_points_per_dim=self.get("worstcase.grid_points"),
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
