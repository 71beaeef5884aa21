"""Functions on a finite metric space: coordinate presets and tabulated values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metric_space import MetricSpace

PRESETS = ("constant", "projection", "cone", "polynomial", "sin")


class FunctionError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionOnM:
    """A preset (name + parameters) or a table of values indexed like the cloud.

    Complex tables are accepted; ``[re, im]`` pairs in JSON become complex
    entries. ``NaN`` marks a point where the function is not evaluable.
    """

    preset: str | None = None
    params: dict = field(default_factory=dict)
    table: tuple | None = None
    label: str | None = None

    def __post_init__(self):
        if (self.preset is None) == (self.table is None):
            raise FunctionError("give exactly one of a preset name or tabulated values")
        if self.preset is not None and self.preset not in PRESETS:
            raise FunctionError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        for key, val in self.params.items():
            vals = np.atleast_1d(np.asarray(val, dtype=float))
            if not np.all(np.isfinite(vals)):
                raise FunctionError(f"preset parameter {key!r} must be finite")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.table is not None:
            return "tabulated"
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.preset}({inner})"

    # -- construction ----------------------------------------------------

    @classmethod
    def constant(cls, c: float = 1.0) -> FunctionOnM:
        return cls("constant", {"c": float(c)})

    @classmethod
    def projection(cls, axis: int = 0) -> FunctionOnM:
        return cls("projection", {"axis": int(axis)})

    @classmethod
    def cone(cls, L: float = 1.0, x0=None, center: int | None = None) -> FunctionOnM:
        params = {"L": float(L)}
        if center is not None:
            params["center"] = int(center)
        else:
            params["x0"] = tuple(float(v) for v in np.atleast_1d(0.0 if x0 is None else x0))
        return cls("cone", params)

    @classmethod
    def polynomial(cls, coeffs, axis: int = 0) -> FunctionOnM:
        return cls("polynomial", {"coeffs": tuple(float(c) for c in coeffs), "axis": int(axis)})

    @classmethod
    def sin(cls, nu: float, axis: int = 0) -> FunctionOnM:
        return cls("sin", {"nu": float(nu), "axis": int(axis)})

    @classmethod
    def tabulated(cls, values, label: str | None = None) -> FunctionOnM:
        arr = _parse_table(values)
        return cls(table=tuple(arr.tolist()), label=label)

    @classmethod
    def from_spec(cls, spec) -> FunctionOnM:
        """Build from a JSON-style dict or a ``name:arg,arg`` string."""
        if isinstance(spec, FunctionOnM):
            return spec
        if isinstance(spec, str):
            return cls._from_string(spec)
        spec = dict(spec)
        label = spec.pop("label", None)
        if "values" in spec:
            return cls.tabulated(spec["values"], label=label)
        name = spec.pop("preset", None)
        if name is None:
            raise FunctionError(f"function spec needs 'preset' or 'values': {spec!r}")
        if name == "constant":
            f = cls.constant(spec.get("c", 1.0))
        elif name == "projection":
            f = cls.projection(spec.get("axis", 0))
        elif name == "cone":
            f = cls.cone(spec.get("L", 1.0), spec.get("x0"), spec.get("center"))
        elif name == "polynomial":
            f = cls.polynomial(spec["coeffs"], spec.get("axis", 0))
        elif name == "sin":
            f = cls.sin(spec["nu"], spec.get("axis", 0))
        else:
            raise FunctionError(f"unknown preset {name!r}")
        return f if label is None else cls(f.preset, f.params, None, label)

    @classmethod
    def _from_string(cls, text: str) -> FunctionOnM:
        name, _, rest = text.partition(":")
        args = [float(a) for a in rest.split(",") if a.strip()] if rest else []
        try:
            if name == "constant":
                return cls.constant(*args)
            if name == "projection":
                return cls.projection(*(int(a) for a in args))
            if name == "cone":
                L = args[0] if args else 1.0
                return cls.cone(L, args[1:] or None)
            if name == "polynomial":
                return cls.polynomial(args)
            if name == "sin":
                return cls.sin(*args)
        except TypeError as exc:
            raise FunctionError(f"bad arguments for preset {name!r}: {rest!r}") from exc
        raise FunctionError(f"unknown preset {name!r}")

    def to_dict(self) -> dict:
        if self.table is not None:
            vals = [[v.real, v.imag] if isinstance(v, complex) else v for v in self.table]
            out = {"values": vals}
        else:
            out = {"preset": self.preset}
            out.update({k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()})
        if self.label:
            out["label"] = self.label
        return out

    # -- evaluation --------------------------------------------------------

    def values(self, space: MetricSpace) -> np.ndarray:
        """Values at every cloud point (float, or complex for complex tables)."""
        if self.table is not None:
            arr = np.asarray(self.table)
            if arr.shape != (space.n,):
                raise FunctionError(
                    f"tabulated function has {arr.size} values, cloud has {space.n} points")
            return arr
        p = self.params
        if self.preset == "constant":
            return np.full(space.n, p["c"])
        if self.preset == "cone":
            if "center" in p:
                return p["L"] * space.distances_from(p["center"])
            x0 = np.asarray(p["x0"], dtype=float)
            if space.coords is not None and x0.size == 1 and space.dim > 1:
                x0 = np.full(space.dim, x0[0])
            return p["L"] * space.distances_to_coords(x0)
        x = self._axis(space, p.get("axis", 0))
        if self.preset == "projection":
            return x.copy()
        if self.preset == "polynomial":
            # Horner, highest power first
            out = np.zeros_like(x)
            for c in reversed(p["coeffs"]):
                out = out * x + c
            return out
        if self.preset == "sin":
            return np.sin(2.0 * math.pi * p["nu"] * x)
        raise FunctionError(f"unknown preset {self.preset!r}")

    def _axis(self, space: MetricSpace, axis: int) -> np.ndarray:
        if space.coords is None:
            raise FunctionError(f"preset {self.preset!r} needs point coordinates")
        if not 0 <= axis < space.dim:
            raise FunctionError(f"axis {axis} out of range for {space.dim}-dimensional cloud")
        return np.asarray(space.coords[:, axis], dtype=float)


def _parse_table(values) -> np.ndarray:
    vals = list(values)
    if any(isinstance(v, (list, tuple)) for v in vals):
        out = np.empty(len(vals), dtype=complex)
        for i, v in enumerate(vals):
            if isinstance(v, (list, tuple)):
                if len(v) != 2:
                    raise FunctionError(f"complex entry {i} must be a [re, im] pair")
                out[i] = complex(float(v[0]), float(v[1]))
            else:
                out[i] = complex(float(v), 0.0)
        return out
    return np.asarray([float("nan") if v is None else float(v) for v in vals], dtype=float)


def sin_family(nus, axis: int = 0) -> list[FunctionOnM]:
    return [FunctionOnM.sin(nu, axis) for nu in nus]


def default_presets(dim: int = 1) -> list[FunctionOnM]:
    """The standard preset family used by sweeps and acceptance runs."""
    centre = [0.5] * dim
    family = [
        FunctionOnM.constant(1.0),
        FunctionOnM.projection(0),
        FunctionOnM.cone(1.0, centre),
        FunctionOnM.cone(5.0, centre),
        FunctionOnM.polynomial([0.5, -1.0, 0.0, 2.0]),
    ]
    family += sin_family(range(1, 9))
    return family
