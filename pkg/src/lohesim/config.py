"""Declarative experiment configs: one JSON document per run.

A config names a model kind, its coefficients, initial data, integration
parameters, and the diagnostic channels to record.  ``validate`` normalizes
a raw dict and raises :class:`ConfigError` with a readable message on any
schema violation; every entry point that consumes configs calls it first.

Common keys (all models)::

    name          run identifier; output files derive from it
    model         one of MODEL_KINDS
    dt, t_end     step size and horizon; t_end must be a multiple of dt
    sample_every  record every k-th step (default 1)
    channels      list of channel names (see lohesim.runner.CHANNELS doc)
    seed          integer; required whenever initial data are randomized

ODE-ensemble models (lt, kuramoto, sphere, lhs, matrix, sds, sdm,
unitary_pair) add shape/size and coupling keys; wave models (sl, gpl) add
grid/potential/beta/adjacency keys and may list snapshot times.  The
builders in :mod:`lohesim.runner` document the per-model keys.
"""

import json

MODEL_KINDS = (
    "lt", "kuramoto", "sphere", "lhs", "matrix", "sds", "sdm",
    "unitary_pair", "sl", "gpl",
)

WAVE_MODELS = ("sl", "gpl")

_RANDOM_INIT_KINDS = ("seeded-random", "separable-lift")


class ConfigError(ValueError):
    """Config failed schema validation."""


def require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return validate(cfg)


def _positive_number(cfg, key):
    val = cfg.get(key)
    require(isinstance(val, (int, float)) and val > 0, f"'{key}' must be positive")
    return float(val)


def _check_common(cfg):
    require(isinstance(cfg, dict), "config must be a JSON object")
    require(isinstance(cfg.get("name"), str) and cfg["name"], "'name' required")
    require(cfg.get("model") in MODEL_KINDS,
            f"'model' must be one of {', '.join(MODEL_KINDS)}")
    dt = _positive_number(cfg, "dt")
    t_end = _positive_number(cfg, "t_end")
    steps = t_end / dt
    require(abs(steps - round(steps)) < 1e-9 * max(1.0, steps),
            "'t_end' must be an integer multiple of 'dt'")
    sample = cfg.setdefault("sample_every", 1)
    require(isinstance(sample, int) and sample >= 1,
            "'sample_every' must be a positive integer")
    channels = cfg.setdefault("channels", [])
    require(isinstance(channels, list) and all(isinstance(c, str) for c in channels),
            "'channels' must be a list of strings")
    if "seed" in cfg:
        require(isinstance(cfg["seed"], int), "'seed' must be an integer")


def _needs_seed(cfg):
    init = cfg.get("init", {})
    kind = init.get("kind", "seeded-random")
    if cfg["model"] in WAVE_MODELS:
        return False  # wave initial data are explicit profiles
    if kind in _RANDOM_INIT_KINDS:
        return True
    flows = cfg.get("flows", {})
    return flows.get("kind") in ("common-skew", "random-skew")


def _check_ode(cfg):
    model = cfg["model"]
    init = cfg.setdefault("init", {"kind": "seeded-random"})
    require(isinstance(init, dict) and "kind" in init, "'init' needs a 'kind'")
    n = cfg.get("n")
    require(isinstance(n, int) and n >= 2, "'n' must be an integer >= 2")
    if model == "lt":
        shape = cfg.get("shape")
        require(isinstance(shape, list) and shape
                and all(isinstance(d, int) and d >= 1 for d in shape),
                "'shape' must be a list of positive integers")
        coupling = cfg.get("coupling")
        require(isinstance(coupling, dict) and coupling,
                "'coupling' must map index patterns to strengths")
        for key, val in coupling.items():
            bits = key.split(",")
            require(len(bits) == len(shape)
                    and all(b.strip() in ("0", "1") for b in bits),
                    f"coupling key '{key}' is not a 0/1 pattern of rank {len(shape)}")
            require(isinstance(val, (int, float)), f"coupling['{key}'] must be a number")
        require(init["kind"] in ("seeded-random", "separable-lift"),
                f"unsupported lt init '{init['kind']}'")
    elif model in ("kuramoto", "sphere", "lhs", "matrix"):
        require(isinstance(cfg.get("d"), int) and cfg["d"] >= 1,
                "'d' (state dimension) required") if model != "kuramoto" else None
        for key in {"kuramoto": ("kappa",), "sphere": ("kappa0",),
                    "lhs": ("kappa0", "kappa1"), "matrix": ("kappa1", "kappa2")}[model]:
            require(isinstance(cfg.get(key), (int, float)), f"'{key}' required")
    elif model in ("sds", "sdm", "unitary_pair"):
        require(isinstance(cfg.get("d"), int) and cfg["d"] >= 1, "'d' required")
        require(isinstance(cfg.get("kappa"), (int, float)), "'kappa' required")
    if _needs_seed(cfg):
        require("seed" in cfg, f"'{cfg['name']}': randomized initial data need a 'seed'")


def _check_wave(cfg):
    grid = cfg.get("grid")
    require(isinstance(grid, dict), "'grid' must be an object")
    for key in ("lo", "hi", "m"):
        require(isinstance(grid.get(key), list), f"grid '{key}' must be a list")
    require(len(grid["lo"]) == len(grid["hi"]) == len(grid["m"]),
            "grid axis lists must have equal length")
    require(len(grid["m"]) in (1, 2), "grid must be 1D or 2D")
    for m in grid["m"]:
        require(isinstance(m, int) and m >= 8 and m % 2 == 0,
                "grid point counts must be even integers >= 8")

    kappa = cfg.get("kappa")
    require(isinstance(kappa, (int, float)) and kappa >= 0, "'kappa' must be >= 0")

    init = cfg.get("init")
    require(isinstance(init, dict) and "kind" in init, "'init' needs a 'kind'")
    kind = init["kind"]
    if kind == "gaussian":
        centers, widths = init.get("centers"), init.get("widths")
        require(isinstance(centers, list) and centers, "'centers' required")
        require(isinstance(widths, list) and len(widths) == len(centers),
                "'widths' must match 'centers'")
        for c in centers:
            require(isinstance(c, list) and len(c) == len(grid["m"]),
                    "each center needs one coordinate per grid axis")
    elif kind == "hermite":
        require(init.get("family") in ("I", "II"), "'family' must be 'I' or 'II'")
        require(isinstance(init.get("k"), int) and init["k"] >= 0, "'k' must be >= 0")
        require(isinstance(init.get("n"), int) and init["n"] >= 2, "'n' must be >= 2")
        require(len(grid["m"]) == 1, "hermite initial data need a 1D grid")
    elif kind == "correlated":
        overlaps = init.get("overlaps")
        require(isinstance(overlaps, list) and overlaps, "'overlaps' matrix required")
        require(all(len(row) == len(overlaps) for row in overlaps),
                "'overlaps' must be square")
        require(len(grid["m"]) == 1, "correlated initial data need a 1D grid")
    else:
        raise ConfigError(f"unsupported wave init '{kind}'")

    n = _wave_component_count(cfg)
    pot = cfg.setdefault("potential", {"kind": "trap", "scales": [1.0] * n})
    require(isinstance(pot, dict) and "kind" in pot, "'potential' needs a 'kind'")
    if pot["kind"] == "trap":
        scales = pot.get("scales")
        require(isinstance(scales, list) and len(scales) == n,
                "'scales' must list one trap scale per component")
    elif pot["kind"] == "harmonic":
        require(isinstance(pot.get("coefficient"), (int, float)),
                "'coefficient' required for harmonic potential")
        shifts = pot.get("shifts")
        require(shifts is None or (isinstance(shifts, list) and len(shifts) == n),
                "'shifts' must list one value per component")
    else:
        raise ConfigError(f"unsupported potential '{pot['kind']}'")

    beta = cfg.setdefault("beta", 0.0)
    if isinstance(beta, list):
        require(len(beta) == n and all(len(row) == n for row in beta),
                "'beta' matrix must be n-by-n")
    else:
        require(isinstance(beta, (int, float)), "'beta' must be a number or matrix")
    if cfg["model"] == "sl":
        flat = beta if isinstance(beta, (int, float)) else sum(map(sum, beta))
        require(not flat, "'sl' runs have no cubic term; use model 'gpl'")

    adjacency = cfg.setdefault("adjacency", "all-ones")
    if isinstance(adjacency, list):
        require(len(adjacency) == n and all(len(row) == n for row in adjacency),
                "'adjacency' matrix must be n-by-n")
    else:
        require(adjacency in ("all-ones", "all-negative", "alternating"),
                "'adjacency' must be a matrix or a named pattern")

    kinetic = cfg.setdefault("kinetic", 0.5)
    require(isinstance(kinetic, (int, float)) and kinetic > 0,
            "'kinetic' must be positive")

    snapshots = cfg.setdefault("snapshots", [])
    require(isinstance(snapshots, list)
            and all(isinstance(t, (int, float)) and 0 <= t <= cfg["t_end"] + 1e-12
                    for t in snapshots),
            "'snapshots' must list times within [0, t_end]")


def _wave_component_count(cfg):
    init = cfg["init"]
    if init["kind"] == "gaussian":
        return len(init["centers"])
    if init["kind"] == "hermite":
        return init["n"]
    return len(init["overlaps"])


def component_count(cfg):
    """Number of coupled states/fields declared by a validated config."""
    if cfg["model"] in WAVE_MODELS:
        return _wave_component_count(cfg)
    return cfg["n"]


def validate(cfg):
    """Normalize defaults and verify the schema; returns the same dict."""
    _check_common(cfg)
    if cfg["model"] in WAVE_MODELS:
        _check_wave(cfg)
    else:
        _check_ode(cfg)
    return cfg
