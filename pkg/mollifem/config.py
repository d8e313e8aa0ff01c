"""Study configuration: pydantic model, TOML files and flag overrides."""
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .errors import MissingFile, MollifemError, ParseError, UnknownFamily, UnknownKernel, ValidationError
from .mesh_fe import Family

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

SEED_ENV = "MOLLIFEM_SEED"
DEFAULT_SEED = 42
KERNEL_NAMES = ("K", "H")
MAX_SEED = 2 ** 64 - 1
DEFAULT_N_VALUES = (11, 101, 1001)
DECADE_NOTE = "n_values 11, 101, 1001 stand in for 10, 100, 1000 so that P1 and P2 share odd node counts"

# TOML table -> {key in table: StudyConfig field}
SECTIONS: Dict[str, Dict[str, str]] = {
    "mesh_fe": {"family": "family"},
    "kernel": {"name": "kernel"},
    "quadrature": {"simpson_m": "simpson_m"},
    "experiment": {"draws": "draws", "seed": "seed", "workers": "workers",
                   "test_function": "test_function", "sobolev_radius": "sobolev_radius"},
    "rates": {"lambda_grid": "lambda_grid", "n_values": "n_values"},
}


def lambda_range(start: float, stop: float, step: float) -> List[float]:
    """Inclusive grid start, start + step, ..., stop."""
    if step <= 0:
        raise ValidationError("lambda_grid step must be positive")
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(max(count, 0))]


def default_lambda_grid() -> List[float]:
    return lambda_range(0.0, 5.0, 0.25)


def normalise_n_values(family: Family, n_values: List[int]) -> Tuple[List[int], List[str]]:
    """P2 needs odd n: even values move up to the next odd one."""
    if Family(family) is not Family.P2:
        return list(n_values), []
    notes = []
    out = []
    for n in n_values:
        if n % 2 == 0:
            notes.append(f"P2 needs odd n: {n} replaced by {n + 1}")
            n += 1
        out.append(n)
    return out, notes


class StudyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Family = Family.P1
    kernel: Optional[str] = None
    lambda_grid: List[float] = Field(default_factory=default_lambda_grid)
    n_values: List[int] = Field(default_factory=lambda: list(DEFAULT_N_VALUES))
    draws: int = 1000
    seed: int = DEFAULT_SEED
    simpson_m: int = 100_000
    workers: int = 1
    test_function: Literal["damped_sine"] = "damped_sine"
    # Sobolev-ball radius; recorded, never used numerically.
    sobolev_radius: Optional[float] = None
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _substitute_odd_n(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        try:
            family = Family(data.get("family", Family.P1))
            n_values = [int(n) for n in data.get("n_values", DEFAULT_N_VALUES)]
        except (TypeError, ValueError):
            return data  # field validation reports it
        n_values, notes = normalise_n_values(family, n_values)
        notes = [note for note in notes if note not in data.get("notes", [])]
        if tuple(n_values) == DEFAULT_N_VALUES and DECADE_NOTE not in data.get("notes", []):
            notes.append(DECADE_NOTE)
        if notes or "n_values" in data:
            data = dict(data, n_values=n_values, notes=list(data.get("notes", [])) + notes)
        return data

    @field_validator("kernel")
    @classmethod
    def _known_kernel(cls, v: Optional[str]) -> Optional[str]:
        if v is None or v.lower() == "none":
            return None
        if v not in KERNEL_NAMES:
            raise UnknownKernel(f"unknown kernel {v!r}, expected one of {', '.join(KERNEL_NAMES)}")
        return v

    @field_validator("lambda_grid")
    @classmethod
    def _lambda_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValidationError("lambda_grid is empty")
        if any(lam < 0 for lam in v):
            raise ValidationError("lambda values must be nonnegative")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValidationError("lambda_grid must be sorted")
        return v

    @field_validator("n_values")
    @classmethod
    def _n_values(cls, v: List[int]) -> List[int]:
        if len(v) < 2:
            raise ValidationError("need at least two n values to fit a rate")
        if any(n < 3 for n in v):
            raise ValidationError("every n must be >= 3")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValidationError("n_values must be strictly increasing")
        return v

    @field_validator("draws", "workers")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValidationError("must be >= 1")
        return v

    @field_validator("seed")
    @classmethod
    def _seed(cls, v: int) -> int:
        if not 0 <= v <= MAX_SEED:
            raise ValidationError("seed must be a nonnegative 64-bit integer")
        return v

    @field_validator("simpson_m")
    @classmethod
    def _simpson_m(cls, v: int) -> int:
        if v < 2 or v % 2:
            raise ValidationError("simpson_m must be even and >= 2")
        return v

    @model_validator(mode="after")
    def _p2_needs_odd(self) -> "StudyConfig":
        if self.family is Family.P2 and any(n % 2 == 0 for n in self.n_values):
            raise ValidationError("P2 needs odd n values")
        return self

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def build_config(data: Mapping[str, Any]) -> StudyConfig:
    """StudyConfig from plain data, raising mollifem errors instead of pydantic's."""
    try:
        config = StudyConfig.model_validate(dict(data))
    except PydanticValidationError as exc:
        for err in exc.errors():
            original = err.get("ctx", {}).get("error")
            if isinstance(original, MollifemError):
                field = ".".join(str(p) for p in err.get("loc", ()))
                raise type(original)(f"{field}: {original}" if field else str(original)) from exc
            if err.get("loc") == ("family",):
                raise UnknownFamily(f"unknown family {err.get('input')!r}, expected P1 or P2") from exc
        raise ValidationError(str(exc)) from exc
    for note in config.notes:
        logger.log(logging.INFO if note == DECADE_NOTE else logging.WARNING, note)
    return config


def _parse_toml(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    try:
        document = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), line=int(match.group(1)) if match else None) from exc

    data: Dict[str, Any] = {}
    for section, table in document.items():
        if section not in SECTIONS or not isinstance(table, dict):
            raise ValidationError(f"unknown config table [{section}]")
        for key, value in table.items():
            if key not in SECTIONS[section]:
                raise ValidationError(f"unknown key {key!r} in [{section}]")
            if key == "lambda_grid" and isinstance(value, dict):
                try:
                    value = lambda_range(float(value["start"]), float(value["stop"]), float(value["step"]))
                except KeyError as exc:
                    raise ValidationError(f"lambda_grid table needs {exc.args[0]!r}") from exc
            data[SECTIONS[section][key]] = value
    return data


def _env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def parse_config(path: Optional[os.PathLike] = None,
                 overrides: Optional[Mapping[str, Any]] = None) -> StudyConfig:
    """Defaults, then the TOML file, then overrides (None values are ignored)."""
    data: Dict[str, Any] = {}
    if path is not None:
        data.update(_parse_toml(Path(path)))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "seed" not in data:
        env_seed = _env_seed()
        if env_seed is not None:
            data["seed"] = env_seed
    return build_config(data)
