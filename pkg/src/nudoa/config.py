"""JSON scenario files.

Canonical layout::

    {
      "array": {"m": 8, "spacing": 0.5},
      "sources": {"doas_deg": [-3, 6]},
      "noise": {"variances": [1, 1, 1, 1, 1, 20, 30, 50]},
      "snapshots": 500,
      "snr_db_list": [0, 5, 10],
      "k_trials": 500,
      "grid": {"min_deg": -90, "max_deg": 90, "step_deg": 0.05},
      "methods": ["phase1", "phase2", "classical"],
      "seed": 0
    }

``noise`` may instead be ``{"random": {"max_wnpr": 30, "realizations": 10,
"floor": 1.0}}``. The flat shorthand ``{"M": 8, "doas": [...], "noise":
[...], "N": 500}`` is also accepted.
"""
import json

from .array_model import ArrayGeometry, NoiseProfile
from .estimator import ALL_METHODS, GridSpec, Method
from .harness import RandomNoiseSpec, ScenarioConfig

_TOP_KEYS = {
    "array", "sources", "noise", "snapshots", "snr_db_list", "k_trials",
    "grid", "methods", "seed", "M", "doas", "N",
}


class ConfigError(ValueError):
    """Invalid scenario file; ``problems`` lists every field-level diagnostic."""

    def __init__(self, problems, source=None):
        self.problems = list(problems)
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(where + "; ".join(self.problems))


def _num(problems, field, value, kind=float, positive=False, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{field}: expected a number, got {value!r}")
        return None
    if kind is int and int(value) != value:
        problems.append(f"{field}: expected an integer, got {value!r}")
        return None
    if positive and not (value > 0 or (allow_zero and value == 0)):
        problems.append(f"{field}: must be positive, got {value!r}")
        return None
    return kind(value)


def _list(problems, field, value):
    if not isinstance(value, list) or not value:
        problems.append(f"{field}: expected a non-empty list")
        return None
    return value


def config_from_dict(d, source=None):
    """Validate a parsed JSON document and build a :class:`ScenarioConfig`.

    All problems are collected before raising, so one run reports every bad
    field.
    """
    problems = []
    if not isinstance(d, dict):
        raise ConfigError(["top level: expected a JSON object"], source)
    for key in sorted(set(d) - _TOP_KEYS):
        problems.append(f"{key}: unknown key")

    arr = d.get("array", {})
    if not isinstance(arr, dict):
        problems.append("array: expected an object")
        arr = {}
    m_raw = arr.get("m", d.get("M"))
    M = None
    if m_raw is None:
        problems.append("array.m: required")
    else:
        M = _num(problems, "array.m", m_raw, int)
        if M is not None and M < 2:
            problems.append("array.m: array needs at least 2 sensors")
            M = None
    spacing = _num(problems, "array.spacing", arr.get("spacing", 0.5), positive=True)

    src = d.get("sources", {})
    doas_raw = src.get("doas_deg") if isinstance(src, dict) else None
    doas_raw = d.get("doas") if doas_raw is None else doas_raw
    doas = None
    if doas_raw is None:
        problems.append("sources.doas_deg: required")
    elif _list(problems, "sources.doas_deg", doas_raw) is not None:
        vals = [_num(problems, f"sources.doas_deg[{i}]", v) for i, v in enumerate(doas_raw)]
        if None not in vals:
            doas = vals
            if any(not -90 < v < 90 for v in vals):
                problems.append("sources.doas_deg: DOAs must lie in (-90, 90) degrees")
                doas = None
            elif len(set(vals)) != len(vals):
                problems.append("sources.doas_deg: DOAs must be distinct")
                doas = None
            elif M is not None and len(vals) >= M:
                problems.append("sources.doas_deg: number of sources must be smaller than array.m")
                doas = None

    noise = None
    nz = d.get("noise")
    if isinstance(nz, list):
        nz = {"variances": nz}
    if nz is None:
        problems.append("noise: required")
    elif not isinstance(nz, dict) or ("variances" in nz) == ("random" in nz):
        problems.append("noise: expected exactly one of 'variances' or 'random'")
    elif "variances" in nz:
        v = _list(problems, "noise.variances", nz["variances"])
        if v is not None:
            vals = [_num(problems, f"noise.variances[{i}]", x) for i, x in enumerate(v)]
            if None not in vals:
                if any(not x > 0 for x in vals):
                    problems.append("noise.variances: noise variances must be positive")
                elif M is not None and len(vals) != M:
                    problems.append(f"noise.variances: expected {M} entries, got {len(vals)}")
                else:
                    noise = NoiseProfile(vals)
    else:
        rnd = nz["random"]
        if not isinstance(rnd, dict) or "max_wnpr" not in rnd:
            problems.append("noise.random: expected an object with 'max_wnpr'")
        else:
            w = _num(problems, "noise.random.max_wnpr", rnd["max_wnpr"])
            r = _num(problems, "noise.random.realizations", rnd.get("realizations", 10), int, True)
            f = _num(problems, "noise.random.floor", rnd.get("floor", 1.0), positive=True)
            if w is not None and w < 1:
                problems.append("noise.random.max_wnpr: must be >= 1")
            elif None not in (w, r, f):
                noise = RandomNoiseSpec(w, r, f)

    N = _num(problems, "snapshots", d.get("snapshots", d.get("N", 500)), int, True)
    K = _num(problems, "k_trials", d.get("k_trials", 500), int, True)
    seed = _num(problems, "seed", d.get("seed", 0), int)
    if seed is not None and not 0 <= seed < 2**64:
        problems.append("seed: must be an unsigned 64-bit integer")

    snrs = d.get("snr_db_list", [-5, 0, 5, 10, 15, 20])
    if _list(problems, "snr_db_list", snrs) is not None:
        snrs = [_num(problems, f"snr_db_list[{i}]", s) for i, s in enumerate(snrs)]

    g = d.get("grid", {})
    grid = None
    if not isinstance(g, dict):
        problems.append("grid: expected an object")
    else:
        gmin = _num(problems, "grid.min_deg", g.get("min_deg", -90.0))
        gmax = _num(problems, "grid.max_deg", g.get("max_deg", 90.0))
        step = _num(problems, "grid.step_deg", g.get("step_deg", 0.05), positive=True)
        if None not in (gmin, gmax, step):
            try:
                grid = GridSpec(gmin, gmax, step)
                grid.angles
            except ValueError as exc:
                problems.append(f"grid: {exc}")

    methods = d.get("methods", [m.value for m in ALL_METHODS])
    if _list(problems, "methods", methods) is not None:
        try:
            methods = tuple(Method(m) for m in methods)
        except ValueError:
            problems.append(
                f"methods: each entry must be one of {[m.value for m in ALL_METHODS]}"
            )

    if problems:
        raise ConfigError(problems, source)
    return ScenarioConfig(
        geometry=ArrayGeometry(M, spacing),
        doas_deg=tuple(doas),
        noise=noise,
        snapshots=N,
        methods=methods,
        grid=grid,
        seed=seed,
        snr_db_list=tuple(snrs),
        k_trials=K,
    )


def load_config(path):
    """Read and validate a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config file: {exc.strerror}"], path) from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"], path) from exc
    return config_from_dict(d, source=path)


def config_to_dict(cfg):
    """Canonical JSON-ready form; ``config_from_dict`` inverts it exactly."""
    if isinstance(cfg.noise, RandomNoiseSpec):
        noise = {
            "random": {
                "max_wnpr": cfg.noise.max_wnpr,
                "realizations": cfg.noise.realizations,
                "floor": cfg.noise.floor,
            }
        }
    else:
        noise = {"variances": list(cfg.noise.variances)}
    return {
        "array": {"m": cfg.geometry.sensor_count, "spacing": cfg.geometry.spacing_wavelengths},
        "sources": {"doas_deg": list(cfg.doas_deg)},
        "noise": noise,
        "snapshots": cfg.snapshots,
        "snr_db_list": list(cfg.snr_db_list),
        "k_trials": cfg.k_trials,
        "grid": {
            "min_deg": cfg.grid.min_deg,
            "max_deg": cfg.grid.max_deg,
            "step_deg": cfg.grid.step_deg,
        },
        "methods": [m.value for m in cfg.methods],
        "seed": cfg.seed,
    }


def dump_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")


EXAMPLE1 = {
    "array": {"m": 8, "spacing": 0.5},
    "sources": {"doas_deg": [-3.0, 6.0]},
    "noise": {"variances": [1, 1, 1, 1, 1, 20, 30, 50]},
    "snapshots": 500,
    "snr_db_list": [-5, 0, 5, 10, 15, 20],
    "k_trials": 500,
}

EXAMPLE2 = {
    "array": {"m": 8, "spacing": 0.5},
    "sources": {"doas_deg": [-3.0, 6.0]},
    "noise": {"random": {"max_wnpr": 30, "realizations": 10, "floor": 1.0}},
    "snapshots": 500,
    "snr_db_list": [-5, 0, 5, 10, 15, 20],
    "k_trials": 200,
}


def example1_config(**overrides):
    """Fixed nonuniform noise, ``Q = diag(1, 1, 1, 1, 1, 20, 30, 50)``."""
    return config_from_dict({**EXAMPLE1, **overrides})


def example2_config(**overrides):
    """Random noise covariances with WNPR capped at 30."""
    return config_from_dict({**EXAMPLE2, **overrides})
