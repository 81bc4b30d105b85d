"""Run configuration: solver/analysis/sweep blocks, flat-key config files.

The config file format is TOML-style flat keys, one per line::

    solver.terms = 20
    solver.sigma_tol = 1e-5
    sweep.resolution = 24

Command-line flags override file values; HOTSPOTS_SEED overrides the seed.
Every output file header embeds config_hash() and the seed so runs can be
reproduced byte-for-byte.
"""

import hashlib
import os
from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class SolverConfig:
    terms: int = 20                  # Bessel orders per vertex block
    edge_terms: int = 10             # half-disk harmonics per edge midpoint
    sigma_tol: float = 1e-5          # certificate gate on the smallest gsv
    boundary_factor: int = 3         # boundary points per edge = factor*terms
    interior_factor: int = 3         # interior points = factor*total terms
    exclusion_radius: float = 1e-3   # vertex exclusion, fraction of diameter
    fem_n: int = 24                  # internal FEM bracket refinement
    scan_lo: float = 0.6             # scan window, fraction of the bracket
    scan_hi: float = 1.4
    scan_divisor: int = 200          # scan step = bracket / divisor
    rank_rtol: float = 1e-14         # pivoted-QR column cutoff
    seed: int = 0


@dataclass(frozen=True)
class AnalysisConfig:
    eps_g: float = 1e-7              # gradient residual margin, / field scale
    delta_v: float = 1e-3            # vertex exclusion for loci, x diameter
    degeneracy_tol: float = 1e-4     # Hessian relative degeneracy threshold
    coeff_floor: float = 1e-5        # max(|c0|,|c1|)/scale floor per vertex
    mixed_term_tol: float = 1e-6     # |d_tn u| bound at edge critical points
    probe_frac: float = 0.05         # c_n probe radius, x shortest adj. edge
    edge_samples: int = 400          # tangential-derivative samples per edge
    boundary_zero_samples: int = 800 # boundary samples for the nodal scan
    trace_step: float = 1e-2         # nodal tracer step, x diameter
    newton_grid: int = 30            # interior critical point seed grid
    extremum_grid: int = 200         # dense extremum sample grid
    extremum_boundary: int = 600     # dense extremum boundary samples


@dataclass(frozen=True)
class SweepConfig:
    resolution: int = 24
    margin: float = 0.05             # radians, excludes sliver triangles
    workers: int = 0                 # 0 = available parallelism
    near_equilateral_band: float = 0.03
    path_steps: int = 100


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "."

    def __post_init__(self):
        for name, value in self.flat_items():
            if name.split(".")[-1] in _POSITIVE_KEYS and not value > 0:
                raise ValueError(f"config key {name} must be positive, got {value}")

    def flat_items(self):
        out = []
        for block_name in ("solver", "analysis", "sweep"):
            block = getattr(self, block_name)
            for f in fields(block):
                out.append((f"{block_name}.{f.name}", getattr(block, f.name)))
        out.append(("output_dir", self.output_dir))
        return out

    def with_updates(self, updates):
        """New config with {'solver.terms': 24, ...} style overrides."""
        blocks = {"solver": self.solver, "analysis": self.analysis,
                  "sweep": self.sweep}
        other = {}
        grouped = {k: {} for k in blocks}
        for key, value in updates.items():
            if "." in key:
                block_name, attr = key.split(".", 1)
                if block_name not in blocks:
                    raise KeyError(f"unknown config block in {key!r}")
                if not hasattr(blocks[block_name], attr):
                    raise KeyError(f"unknown config key {key!r}")
                current = getattr(blocks[block_name], attr)
                grouped[block_name][attr] = type(current)(value) \
                    if not isinstance(value, type(current)) else value
            elif key == "output_dir":
                other["output_dir"] = str(value)
            else:
                raise KeyError(f"unknown config key {key!r}")
        new_blocks = {name: replace(block, **grouped[name]) if grouped[name]
                      else block for name, block in blocks.items()}
        return RunConfig(**new_blocks, **{**{"output_dir": self.output_dir}, **other})


_POSITIVE_KEYS = {
    "terms", "sigma_tol", "boundary_factor", "interior_factor",
    "exclusion_radius", "fem_n", "scan_lo", "scan_hi", "scan_divisor",
    "rank_rtol", "eps_g", "delta_v", "degeneracy_tol", "coeff_floor",
    "mixed_term_tol", "probe_frac", "edge_samples", "boundary_zero_samples",
    "trace_step", "newton_grid", "extremum_grid", "extremum_boundary",
    "resolution", "margin", "near_equilateral_band", "path_steps",
}


def _parse_scalar(text):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if text.startswith('"') and text.endswith('"'):
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_flat_config(text):
    """Dict from flat `key = value` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = _parse_scalar(value)
    return out


def load_config(path=None, overrides=None):
    """RunConfig from an optional flat-key file plus override dict and env."""
    cfg = RunConfig()
    if path is not None:
        with open(path) as fh:
            cfg = cfg.with_updates(parse_flat_config(fh.read()))
    if overrides:
        cfg = cfg.with_updates(overrides)
    env_seed = os.environ.get("HOTSPOTS_SEED")
    if env_seed is not None:
        cfg = cfg.with_updates({"solver.seed": int(env_seed)})
    return cfg


def config_hash(cfg):
    """Stable short hash of the computation-relevant flat configuration
    (the output directory does not affect results)."""
    canon = "\n".join(f"{k} = {v!r}" for k, v in sorted(cfg.flat_items())
                      if k != "output_dir")
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def header_line(cfg, comment="#"):
    return f"{comment} config_hash={config_hash(cfg)} seed={cfg.solver.seed}"
