"""YAML config parsing for the CLI.

A config file is a plain mapping with optional ``population``, ``trace``,
``attack`` and ``experiment`` sections; each subcommand reads the sections
it needs.  See the repository README and ``configs/`` for full examples.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .epochs import FlurryParams
from .errors import PlanInvalid
from .experiment import ExperimentPlan, TraceSettings
from .attack import AttackConfig
from .traffic import PopulationSpec, TraceConfig, UserProfile


def load_config(path: str | Path) -> dict:
    with open(path) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping at top level")
    return data


def population_from_dict(d: dict) -> PopulationSpec:
    """Build a population from ``m``/``k``/``t``/``r`` plus optional overrides.

    ``group`` may list explicit member ids; ``profiles`` may override
    individual users with ``{id: {t: ..., r: ...}}``.
    """
    m = int(d["m"])
    bob = int(d.get("bob", 0))
    t = float(d.get("t", 1.0))
    r = float(d.get("r", 0.1))
    if "group" in d:
        group = frozenset(int(u) for u in d["group"])
    else:
        k = int(d.get("k", 3))
        members = [u for u in range(m) if u != bob][:k]
        if len(members) < k:
            raise ValueError(f"cannot place a group of {k} among {m} users")
        group = frozenset(members)
    profiles = [
        UserProfile(r=r, t=t) if u in group else UserProfile(r=r, t=r) for u in range(m)
    ]
    for key, override in (d.get("profiles") or {}).items():
        u = int(key)
        profiles[u] = UserProfile(r=float(override["r"]), t=float(override["t"]))
    return PopulationSpec(total_users=m, bob=bob, group=group, profiles=tuple(profiles))


def trace_config_from_dict(d: dict) -> TraceConfig:
    """Trace knobs; ``sends: {count, spacing, start}`` expands to send_times."""
    epoch_length = float(d.get("epoch_length", 60.0))
    receipt_min = float(d.get("receipt_min", 0.1))
    receipt_max = float(d.get("receipt_max", 2.0))
    jitter_max = float(d.get("jitter_max", 0.0))
    send_times = d.get("send_times")
    send_rate = d.get("send_rate")
    if "sends" in d:
        sends = d["sends"]
        count = int(sends["count"])
        spacing = float(sends.get("spacing", 5 * epoch_length))
        start = float(sends.get("start", epoch_length))
        send_times = [start + i * spacing for i in range(count)]
    horizon = d.get("horizon")
    if horizon is None:
        if not send_times:
            raise ValueError("trace config needs a horizon (or forced sends to infer one)")
        horizon = max(send_times) + receipt_max + jitter_max + 1.0
    return TraceConfig(
        horizon=float(horizon),
        epoch_length=epoch_length,
        send_rate=float(send_rate) if send_rate is not None else None,
        send_times=[float(s) for s in send_times] if send_times is not None else None,
        receipt_min=receipt_min,
        receipt_max=receipt_max,
        jitter_max=jitter_max,
    )


def attack_config_from_dict(d: dict) -> tuple[int, int, AttackConfig]:
    """Returns (bob, total_users, AttackConfig) for the attack subcommand."""
    bob = int(d.get("bob", 0))
    m = int(d["m"])
    n = int(d["n"])
    k_hat = int(d.get("k_hat", 3))
    epoch_length = float(d.get("epoch_length", 60.0))
    fl = d.get("flurry") or {}
    flurry = FlurryParams(
        gap_max=float(fl.get("gap_max", 2.5)),
        min_size=int(fl.get("min_size", max(2, k_hat))),
    )
    return bob, m, AttackConfig(n=n, k_hat=k_hat, epoch_length=epoch_length, flurry=flurry)


def plan_from_dict(d: dict) -> ExperimentPlan:
    try:
        grid = d["grid"]
        plan = ExperimentPlan(
            mode=d.get("mode", "ideal"),
            m_values=[int(v) for v in grid["m"]],
            k_values=[int(v) for v in grid["k"]],
            tr_pairs=[(float(t), float(r)) for t, r in grid["t_r"]],
            n_values=[int(v) for v in grid.get("n", [])],
            confidences=[float(v) for v in grid.get("confidence", [])],
            trials=int(d.get("trials", 100)),
            base_seed=int(d.get("base_seed", 0)),
            trace=TraceSettings(**(d.get("trace") or {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanInvalid(f"malformed experiment plan: {exc}") from exc
    plan.validate()
    return plan
