"""Model hyperparameters and their key=value text representation.

The same key=value syntax is used by the CLI config file and by the config
block embedded in saved model files, so one parser/formatter pair lives
here. Floats are rendered with ``repr`` (shortest round-trip form), which
is locale-independent and reconstructs the exact float64.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import DataError

__all__ = ["MenConfig", "config_to_lines", "config_from_mapping", "parse_kv_lines"]


@dataclass(frozen=True)
class MenConfig:
    """Hyperparameters of a single fit.

    alpha      weight of the manifold-alignment term (>= 0)
    beta       weight of the linearization term (> 0)
    kappa      within-patch push/pull trade-off (>= 0)
    lambda2    ridge weight of the elastic net penalty (>= 0)
    lambda1    conceptual l1 weight; never used as a numeric threshold
               (sparsity is governed by K), only recorded on the
               augmented problem when given
    k1, k2     same-class / different-class neighbours per patch
    d          number of projection columns
    K          entry-event budget per column (each column has <= K nonzeros)
    pca_retain PCA preprocessing dimensions: None = auto (min(n-1, p)),
               0 = no preprocessing
    eig_floor  relative eigenvalue clamp for the spectral factorization
    double_shrinkage_correction
               report columns as sqrt(1+lambda2)*W* (elastic-net
               de-shrinking) instead of the default W*/sqrt(1+lambda2)
    center_class_means
               subtract the weighted global mean before the class-center
               PCA (conventional centering; off by default)
    """

    alpha: float = 1.0
    beta: float = 100.0
    kappa: float = 1.0
    lambda2: float = 0.01
    lambda1: float | None = None
    k1: int = 3
    k2: int = 3
    d: int = 2
    K: int = 10
    pca_retain: int | None = None
    eig_floor: float = 1e-10
    double_shrinkage_correction: bool = False
    center_class_means: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise DataError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta <= 0:
            raise DataError(f"beta must be > 0, got {self.beta}")
        if self.kappa < 0:
            raise DataError(f"kappa must be >= 0, got {self.kappa}")
        if self.lambda2 < 0:
            raise DataError(f"lambda2 must be >= 0, got {self.lambda2}")
        if self.lambda1 is not None and self.lambda1 < 0:
            raise DataError(f"lambda1 must be >= 0, got {self.lambda1}")
        if self.k1 < 0 or self.k2 < 0:
            raise DataError(f"k1 and k2 must be >= 0, got k1={self.k1} k2={self.k2}")
        if self.d < 1:
            raise DataError(f"d must be >= 1, got {self.d}")
        if self.K < 1:
            raise DataError(f"K must be >= 1, got {self.K}")
        if self.pca_retain is not None and self.pca_retain < 0:
            raise DataError(f"pca_retain must be >= 0 or auto, got {self.pca_retain}")
        if self.eig_floor < 0:
            raise DataError(f"eig_floor must be >= 0, got {self.eig_floor}")

    def with_overrides(self, **kwargs) -> "MenConfig":
        return replace(self, **kwargs)


# key -> coercion function; order fixed for deterministic serialization
def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_opt_int(text: str):
    low = text.strip().lower()
    if low in ("auto", "none", ""):
        return None
    return int(low)


_SCHEMA = {
    "alpha": float,
    "beta": float,
    "kappa": float,
    "lambda2": float,
    "lambda1": lambda t: None if t.strip().lower() in ("none", "") else float(t),
    "k1": int,
    "k2": int,
    "d": int,
    "K": int,
    "pca_retain": _parse_opt_int,
    "eig_floor": float,
    "double_shrinkage_correction": _parse_bool,
    "center_class_means": _parse_bool,
}


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_lines(cfg: MenConfig) -> list[str]:
    """Render a config as key=value lines in fixed field order."""
    return [f"{f.name}={_format_value(getattr(cfg, f.name))}" for f in fields(cfg)]


def parse_kv_lines(lines) -> dict[str, str]:
    """Parse key=value text with '#' comments into a string mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_mapping(mapping: dict[str, str], *, reject_unknown: bool = True) -> MenConfig:
    """Build a MenConfig from a string mapping, coercing per the key schema.

    Keys absent from the mapping keep their defaults. Unknown keys raise
    DataError naming the key (unless reject_unknown is False, in which
    case they are ignored; the CLI uses that mode after extracting its
    own evaluation keys).
    """
    kwargs = {}
    for key, text in mapping.items():
        if key not in _SCHEMA:
            if reject_unknown:
                raise DataError(f"unknown config key: {key}")
            continue
        try:
            kwargs[key] = _SCHEMA[key](text)
        except (ValueError, TypeError) as exc:
            raise DataError(f"bad value for config key {key}: {text!r} ({exc})") from exc
    return MenConfig(**kwargs)
