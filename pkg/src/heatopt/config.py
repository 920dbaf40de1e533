"""Run configuration: flat key-value text, benchmark presets, validation.

The configuration format is ``key = value`` lines with ``#`` comments and
dotted section prefixes. Unknown keys are errors, so misspellings never fall
back to silent defaults. Boundary patches are declared in physical
coordinates (``patch.<name>.span.<axis> = lo hi``) and materialized to cell
index ranges for the configured resolution, which keeps presets meaningful
when the grid is scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .assembly import SimpParams, filter_length_from_spacing
from .errors import ConfigurationError
from .grid import DIRICHLET, HI, LO, NEUMANN, BoundaryPatch, StructuredGrid, build_grid

_AXIS_NAMES = "xyz"
_SIDES = {"min": LO, "max": HI}
_CRITERIA = ("w1", "w2")
_STRATEGIES = ("mgcg", "mgcg1", "mor_mgcg", "mor_mgcg1")

REQUIRED_KEYS = ("grid.dims", "grid.extents")


@dataclass(frozen=True)
class PatchSpec:
    """Physical-coordinate description of a boundary patch."""

    name: str
    kind: str
    value: float
    axis: int
    side: int
    spans: tuple  # per-axis (lo, hi) physical interval or None for full


@dataclass(frozen=True)
class RunConfig:
    label: str
    dims: tuple
    extents: tuple
    patch_specs: tuple
    default_bc_kind: str
    default_bc_value: float
    source: float
    kappa_min: float
    kappa_max: float
    simp_exponent: float
    filter_lambda: float | None  # None: support-radius rule from the spacing
    filter_radius_factor: float
    t_ref: float
    v_frac: float
    move_limit: float
    max_iterations: int
    strategy_name: str
    criterion: str
    tau_fom: float
    tau_mor: float
    r_max_forward: int
    r_max_adjoint: int
    max_cg_iters: int
    warm_start_rejected: bool
    mg_coarsest_max: int
    out_dir: str
    checkpoint_interval: int

    def with_updates(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)

    def make_simp(self) -> SimpParams:
        return SimpParams(self.kappa_min, self.kappa_max, self.simp_exponent)

    def filter_length(self, grid: StructuredGrid) -> float:
        if self.filter_lambda is not None:
            return self.filter_lambda
        return filter_length_from_spacing(grid, self.filter_radius_factor)

    def make_grid(self) -> StructuredGrid:
        patches = [self._materialize(spec) for spec in self.patch_specs]
        patches.append(
            BoundaryPatch(name="default", kind=self.default_bc_kind, value=self.default_bc_value)
        )
        return build_grid(self.dims, self.extents, patches)

    def _materialize(self, spec: PatchSpec) -> BoundaryPatch:
        if spec.axis >= len(self.dims):
            raise ConfigurationError(
                f"patch {spec.name!r} uses axis {_AXIS_NAMES[spec.axis]} "
                f"on a {len(self.dims)}D grid"
            )
        ranges = []
        for a, d in enumerate(self.dims):
            h = self.extents[a] / d
            span = spec.spans[a] if a < len(spec.spans) else None
            if a == spec.axis or span is None:
                ranges.append((0, d))
                continue
            lo, hi = span
            ilo = max(0, math.ceil(lo / h - 0.5))
            ihi = min(d, math.ceil(hi / h - 0.5))
            if ilo >= ihi:
                raise ConfigurationError(
                    f"patch {spec.name!r} span {span} on axis {_AXIS_NAMES[a]} "
                    f"covers no cell faces at resolution {d}"
                )
            ranges.append((ilo, ihi))
        return BoundaryPatch(
            name=spec.name,
            kind=spec.kind,
            value=spec.value,
            axis=spec.axis,
            side=spec.side,
            ranges=tuple(ranges),
        )


_DEFAULTS = {
    "label": "run",
    "bc.default": "neumann",
    "bc.default_value": "0.0",
    "source.q": "0.0",
    "simp.kappa_min": "1.0",
    "simp.kappa_max": "100.0",
    "simp.exponent": "3.0",
    "filter.lambda": "auto",
    "filter.radius_factor": "2.0",
    "objective.t_ref": "0.0",
    "constraint.vfrac": "0.5",
    "optimizer.move_limit": "0.1",
    "optimizer.max_iterations": "250",
    "solver.strategy": "mgcg",
    "solver.criterion": "w2",
    "solver.tau_fom": "1e-13",
    "solver.tau_mor": "1e-6",
    "solver.r_max": "10",
    "solver.max_cg_iters": "5000",
    "solver.warm_start_rejected": "true",
    "mg.coarsest_max": "1000",
    "output.dir": "out",
    "output.checkpoint_interval": "0",
}

_OPTIONAL_KEYS = ("solver.r_max_forward", "solver.r_max_adjoint")

_PATCH_ATTRS = ("axis", "side", "kind", "value")


def _parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigurationError(f"line {lineno}: empty key or value in {raw!r}")
        if key in pairs:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _floats(value: str, count: int | None, key: str):
    parts = value.split()
    if count is not None and len(parts) != count:
        raise ConfigurationError(f"{key}: expected {count} values, got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _ints(value: str, key: str):
    try:
        return tuple(int(p) for p in value.split())
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _bool(value: str, key: str) -> bool:
    if value.lower() in ("true", "yes", "1"):
        return True
    if value.lower() in ("false", "no", "0"):
        return False
    raise ConfigurationError(f"{key}: expected true/false, got {value!r}")


def _choice(value: str, allowed, key: str) -> str:
    if value not in allowed:
        raise ConfigurationError(f"{key}: expected one of {allowed}, got {value!r}")
    return value


def _collect_patches(pairs: dict, ndim: int, extents) -> tuple:
    groups: dict[str, dict] = {}
    for key, value in pairs.items():
        if not key.startswith("patch."):
            continue
        parts = key.split(".")
        if len(parts) == 3 and parts[2] in _PATCH_ATTRS:
            groups.setdefault(parts[1], {})[parts[2]] = value
        elif len(parts) == 4 and parts[2] == "span" and parts[3] in _AXIS_NAMES[:ndim]:
            groups.setdefault(parts[1], {})[f"span.{parts[3]}"] = value
        else:
            raise ConfigurationError(f"unknown patch key {key!r}")

    specs = []
    for name in sorted(groups):
        attrs = groups[name]
        for required in ("axis", "side", "kind"):
            if required not in attrs:
                raise ConfigurationError(f"patch {name!r}: missing patch.{name}.{required}")
        axis_name = attrs["axis"]
        if axis_name not in _AXIS_NAMES[:ndim]:
            raise ConfigurationError(f"patch {name!r}: bad axis {axis_name!r}")
        axis = _AXIS_NAMES.index(axis_name)
        side = _SIDES.get(attrs["side"])
        if side is None:
            raise ConfigurationError(f"patch {name!r}: side must be min or max")
        kind = _choice(attrs["kind"], (DIRICHLET, NEUMANN), f"patch.{name}.kind")
        value = _float(attrs.get("value", "0.0"), f"patch.{name}.value")
        spans = []
        for a in range(ndim):
            raw = attrs.get(f"span.{_AXIS_NAMES[a]}")
            if raw is None:
                spans.append(None)
            else:
                lo, hi = _floats(raw, 2, f"patch.{name}.span.{_AXIS_NAMES[a]}")
                if not 0 <= lo < hi <= extents[a] + 1e-12:
                    raise ConfigurationError(
                        f"patch {name!r}: span {raw!r} outside [0, {extents[a]}]"
                    )
                spans.append((lo, hi))
        specs.append(
            PatchSpec(name=name, kind=kind, value=value, axis=axis, side=side,
                      spans=tuple(spans))
        )
    return tuple(specs)


def config_from_pairs(pairs: dict) -> RunConfig:
    missing = [k for k in REQUIRED_KEYS if k not in pairs]
    if missing:
        raise ConfigurationError(
            "missing required keys: " + ", ".join(missing)
            + f" (required: {', '.join(REQUIRED_KEYS)})"
        )

    merged = dict(_DEFAULTS)
    patch_keys = {k: v for k, v in pairs.items() if k.startswith("patch.")}
    for key, value in pairs.items():
        if key.startswith("patch."):
            continue
        if key not in merged and key not in REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ConfigurationError(f"unknown key {key!r}")
        merged[key] = value

    dims = _ints(merged["grid.dims"], "grid.dims")
    if len(dims) not in (2, 3):
        raise ConfigurationError(f"grid.dims: need 2 or 3 entries, got {dims}")
    extents = _floats(merged["grid.extents"], len(dims), "grid.extents")

    lam_raw = merged["filter.lambda"]
    filter_lambda = None if lam_raw == "auto" else _float(lam_raw, "filter.lambda")

    r_max = _int(merged["solver.r_max"], "solver.r_max")
    r_fwd = _int(merged.get("solver.r_max_forward", str(r_max)), "solver.r_max_forward")
    r_adj = _int(merged.get("solver.r_max_adjoint", str(r_max)), "solver.r_max_adjoint")

    config = RunConfig(
        label=merged["label"],
        dims=dims,
        extents=extents,
        patch_specs=_collect_patches(patch_keys, len(dims), extents),
        default_bc_kind=_choice(merged["bc.default"], (DIRICHLET, NEUMANN), "bc.default"),
        default_bc_value=_float(merged["bc.default_value"], "bc.default_value"),
        source=_float(merged["source.q"], "source.q"),
        kappa_min=_float(merged["simp.kappa_min"], "simp.kappa_min"),
        kappa_max=_float(merged["simp.kappa_max"], "simp.kappa_max"),
        simp_exponent=_float(merged["simp.exponent"], "simp.exponent"),
        filter_lambda=filter_lambda,
        filter_radius_factor=_float(merged["filter.radius_factor"], "filter.radius_factor"),
        t_ref=_float(merged["objective.t_ref"], "objective.t_ref"),
        v_frac=_float(merged["constraint.vfrac"], "constraint.vfrac"),
        move_limit=_float(merged["optimizer.move_limit"], "optimizer.move_limit"),
        max_iterations=_int(merged["optimizer.max_iterations"], "optimizer.max_iterations"),
        strategy_name=_choice(merged["solver.strategy"], _STRATEGIES, "solver.strategy"),
        criterion=_choice(merged["solver.criterion"], _CRITERIA, "solver.criterion"),
        tau_fom=_float(merged["solver.tau_fom"], "solver.tau_fom"),
        tau_mor=_float(merged["solver.tau_mor"], "solver.tau_mor"),
        r_max_forward=r_fwd,
        r_max_adjoint=r_adj,
        max_cg_iters=_int(merged["solver.max_cg_iters"], "solver.max_cg_iters"),
        warm_start_rejected=_bool(
            merged["solver.warm_start_rejected"], "solver.warm_start_rejected"
        ),
        mg_coarsest_max=_int(merged["mg.coarsest_max"], "mg.coarsest_max"),
        out_dir=merged["output.dir"],
        checkpoint_interval=_int(
            merged["output.checkpoint_interval"], "output.checkpoint_interval"
        ),
    )
    validate_config(config)
    return config


def validate_config(config: RunConfig):
    """Field-level checks plus a full grid materialization for patch cover."""
    if not 0 < config.v_frac <= 1:
        raise ConfigurationError(f"constraint.vfrac must be in (0, 1], got {config.v_frac}")
    if not 0 < config.move_limit <= 1:
        raise ConfigurationError(f"optimizer.move_limit must be in (0, 1], got {config.move_limit}")
    if config.max_iterations < 0:
        raise ConfigurationError("optimizer.max_iterations must be >= 0")
    if config.tau_fom <= 0 or config.tau_mor <= 0:
        raise ConfigurationError("solver tolerances must be positive")
    if min(config.r_max_forward, config.r_max_adjoint) < 1:
        raise ConfigurationError("solver.r_max must be >= 1")
    if config.filter_lambda is not None and config.filter_lambda < 0:
        raise ConfigurationError("filter.lambda must be >= 0")
    if config.checkpoint_interval < 0:
        raise ConfigurationError("output.checkpoint_interval must be >= 0")
    config.make_simp()
    config.make_grid()


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate configuration text."""
    return config_from_pairs(_parse_pairs(text))


def render_config(config: RunConfig) -> str:
    """Canonical text for a config; parse(render(c)) == c."""
    lines = [
        f"label = {config.label}",
        "grid.dims = " + " ".join(str(d) for d in config.dims),
        "grid.extents = " + " ".join(repr(e) for e in config.extents),
        f"bc.default = {config.default_bc_kind}",
        f"bc.default_value = {config.default_bc_value!r}",
    ]
    for spec in config.patch_specs:
        base = f"patch.{spec.name}"
        lines.append(f"{base}.axis = {_AXIS_NAMES[spec.axis]}")
        lines.append(f"{base}.side = {'min' if spec.side == LO else 'max'}")
        lines.append(f"{base}.kind = {spec.kind}")
        lines.append(f"{base}.value = {spec.value!r}")
        for a, span in enumerate(spec.spans):
            if span is not None:
                lines.append(f"{base}.span.{_AXIS_NAMES[a]} = {span[0]!r} {span[1]!r}")
    lines += [
        f"source.q = {config.source!r}",
        f"simp.kappa_min = {config.kappa_min!r}",
        f"simp.kappa_max = {config.kappa_max!r}",
        f"simp.exponent = {config.simp_exponent!r}",
        "filter.lambda = " + ("auto" if config.filter_lambda is None else repr(config.filter_lambda)),
        f"filter.radius_factor = {config.filter_radius_factor!r}",
        f"objective.t_ref = {config.t_ref!r}",
        f"constraint.vfrac = {config.v_frac!r}",
        f"optimizer.move_limit = {config.move_limit!r}",
        f"optimizer.max_iterations = {config.max_iterations}",
        f"solver.strategy = {config.strategy_name}",
        f"solver.criterion = {config.criterion}",
        f"solver.tau_fom = {config.tau_fom!r}",
        f"solver.tau_mor = {config.tau_mor!r}",
        f"solver.r_max_forward = {config.r_max_forward}",
        f"solver.r_max_adjoint = {config.r_max_adjoint}",
        f"solver.max_cg_iters = {config.max_cg_iters}",
        f"solver.warm_start_rejected = {'true' if config.warm_start_rejected else 'false'}",
        f"mg.coarsest_max = {config.mg_coarsest_max}",
        f"output.dir = {config.out_dir}",
        f"output.checkpoint_interval = {config.checkpoint_interval}",
    ]
    return "\n".join(lines) + "\n"


PRESET_PAPER_2D = """\
# 2D heat-sink benchmark: square plate, fixed temperature on the middle third
# of the top edge, insulated elsewhere, uniform out-of-plane heating modeled
# as a volumetric source with unit thickness.
label = paper-2d
grid.dims = 360 360
grid.extents = 12 12
bc.default = neumann
bc.default_value = 0
patch.heatsink.axis = y
patch.heatsink.side = max
patch.heatsink.kind = dirichlet
patch.heatsink.value = 300
patch.heatsink.span.x = 4 8
source.q = 1000
simp.kappa_min = 1
simp.kappa_max = 100
simp.exponent = 3
filter.lambda = auto
objective.t_ref = 300
constraint.vfrac = 0.4
optimizer.move_limit = 0.1
optimizer.max_iterations = 500
solver.strategy = mor_mgcg
solver.criterion = w2
solver.tau_fom = 1e-13
solver.tau_mor = 1e-6
solver.r_max = 10
output.dir = out/paper-2d
"""

PRESET_PAPER_3D = """\
# 3D heat-sink benchmark: unit cube, fixed temperature on a centered square
# patch covering half the bottom-face edge, insulated elsewhere, uniform
# volumetric heating.
label = paper-3d
grid.dims = 200 200 200
grid.extents = 1 1 1
bc.default = neumann
bc.default_value = 0
patch.heatsink.axis = z
patch.heatsink.side = min
patch.heatsink.kind = dirichlet
patch.heatsink.value = 273
patch.heatsink.span.x = 0.25 0.75
patch.heatsink.span.y = 0.25 0.75
source.q = 1e4
simp.kappa_min = 1
simp.kappa_max = 100
simp.exponent = 3
filter.lambda = auto
objective.t_ref = 273
constraint.vfrac = 0.05
optimizer.move_limit = 0.1
optimizer.max_iterations = 250
solver.strategy = mor_mgcg
solver.criterion = w2
solver.tau_fom = 1e-13
solver.tau_mor = 5e-6
solver.r_max = 2
output.dir = out/paper-3d
"""

PRESETS = {"paper-2d": PRESET_PAPER_2D, "paper-3d": PRESET_PAPER_3D}


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return parse_config(PRESETS[name])


def config_from_sources(
    preset: str | None = None,
    text: str | None = None,
    overrides=(),
    out_dir: str | None = None,
) -> RunConfig:
    """Merge preset, config text, and key=value overrides (later wins)."""
    pairs: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        pairs.update(_parse_pairs(PRESETS[preset]))
    if text is not None:
        pairs.update(_parse_pairs(text))
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override must be key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        pairs[key] = value
    if out_dir is not None:
        pairs["output.dir"] = out_dir
    if not pairs:
        raise ConfigurationError(
            "empty configuration; required keys: " + ", ".join(REQUIRED_KEYS)
        )
    return config_from_pairs(pairs)
