"""Synthetic instance family and dataset persistence.

Instances mimic a ring cross-section: n measurement angles and m actuator
angles sit uniformly on a circle, each actuator's displacement column is a
smooth localized bump (a tapered sum of the first k cosine modes centered
at the actuator's angle, coefficient-noised, then max-abs scaled), and the
initial deviation is a random field in the same k-mode span scaled to a
target magnitude.  Keeping the noise on mode coefficients rather than on
samples means every column lies exactly inside the first k Fourier modes.

Datasets are JSON with full-precision floats: round trips are bit-exact.
"""

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DatasetFormatError, DegenerateInputError
from .model import Instance

DATASET_VERSION = 1


@dataclass(frozen=True)
class GenSpec:
    n: int = 40
    m: int = 12
    force_bound: float = 5.0
    smoothness: int = 6
    noise_level: float = 0.05
    deviation_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise DegenerateInputError("n must be >= 2")
        if self.m < 1:
            raise DegenerateInputError("m must be >= 1")
        if self.smoothness < 1:
            raise DegenerateInputError("smoothness must be >= 1")
        if not self.force_bound > 0.0:
            raise DegenerateInputError("force_bound must be positive")
        if self.noise_level < 0.0:
            raise DegenerateInputError("noise_level must be >= 0")
        if self.deviation_scale < 0.0:
            raise DegenerateInputError("deviation_scale must be >= 0")


def generate_instance(spec: GenSpec, rng, actuator_angles=None) -> Instance:
    """One instance from the family; pure function of (spec, rng state).

    ``actuator_angles`` overrides the uniform actuator placement (same
    length as m); the draw order is fixed so results are reproducible.
    """
    n, m, k = spec.n, spec.m, spec.smoothness
    theta = 2.0 * np.pi * np.arange(n) / n
    if actuator_angles is None:
        phis = 2.0 * np.pi * np.arange(m) / m
    else:
        phis = np.asarray(actuator_angles, dtype=np.float64)
        if phis.shape != (m,):
            raise DegenerateInputError("need one angle per actuator")

    taper = 1.0 - np.arange(k) / k  # Fejer-style: localized, positive peak
    U = np.empty((n, m))
    for j in range(m):
        coeffs = taper * (1.0 + spec.noise_level * rng.standard_normal(k))
        col = np.zeros(n)
        for q in range(k):
            col += coeffs[q] * np.cos(q * (theta - phis[j]))
        peak = np.max(np.abs(col))
        if peak < 1e-12:
            raise DegenerateInputError(
                "actuator %d produced a zero displacement column" % j)
        U[:, j] = col / peak

    a = taper * rng.standard_normal(k)
    b = taper * rng.standard_normal(k)
    psi = np.zeros(n)
    for q in range(k):
        psi += a[q] * np.cos(q * theta) + b[q] * np.sin(q * theta)
    if spec.deviation_scale == 0.0:
        psi[:] = 0.0
    else:
        # scale by RMS, not by peak: the worst gap then varies with the
        # field's shape instead of being pinned to deviation_scale
        rms = np.sqrt(np.mean(psi ** 2))
        if rms < 1e-12:
            raise DegenerateInputError("deviation field degenerated to zero")
        psi *= spec.deviation_scale / rms

    B = spec.force_bound
    return Instance(psi=psi, U=U,
                    f_lower=np.full(m, -B), f_upper=np.full(m, B))


def generate_dataset(spec: GenSpec, count: int) -> list:
    """``count`` independent instances; stream j comes from spawn child j."""
    if count < 0:
        raise DegenerateInputError("count must be >= 0")
    root = np.random.SeedSequence(spec.seed)
    return [generate_instance(spec, np.random.default_rng(child))
            for child in root.spawn(count)]


def save_dataset(path, instances, gen_spec: GenSpec = None):
    """Atomic JSON dump; numbers keep full 64-bit precision."""
    blob = {
        "version": DATASET_VERSION,
        "gen_spec": asdict(gen_spec) if gen_spec is not None else None,
        "instances": [
            {
                "n": inst.n,
                "m": inst.m,
                "psi": inst.psi.tolist(),
                "U": inst.U.tolist(),
                "f_lower": inst.f_lower.tolist(),
                "f_upper": inst.f_upper.tolist(),
            }
            for inst in instances
        ],
    }
    tmp = str(path) + ".partial"
    with open(tmp, "w") as fh:
        json.dump(blob, fh, indent=0, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _field(record, key, idx):
    if key not in record:
        raise DatasetFormatError(
            "instance %d is missing field %r" % (idx, key))
    return record[key]


def load_dataset(path):
    """Returns (instances, gen_spec or None).  Shape errors name the field."""
    with open(path) as fh:
        try:
            blob = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError("not valid JSON: %s" % exc) from exc
    if blob.get("version") != DATASET_VERSION:
        raise DatasetFormatError(
            "unsupported dataset version %r" % blob.get("version"))
    if "instances" not in blob or not isinstance(blob["instances"], list):
        raise DatasetFormatError("missing or malformed 'instances' list")

    instances = []
    for idx, rec in enumerate(blob["instances"]):
        n = int(_field(rec, "n", idx))
        m = int(_field(rec, "m", idx))
        psi = np.asarray(_field(rec, "psi", idx), dtype=np.float64)
        if psi.shape != (n,):
            raise DatasetFormatError(
                "instance %d field 'psi' has length %d, expected n=%d"
                % (idx, psi.size, n))
        U = np.asarray(_field(rec, "U", idx), dtype=np.float64)
        if U.ndim != 2 or U.shape != (n, m):
            raise DatasetFormatError(
                "instance %d field 'U' has shape %r, expected (%d, %d)"
                % (idx, tuple(U.shape), n, m))
        f_lower = np.asarray(_field(rec, "f_lower", idx), dtype=np.float64)
        if f_lower.shape != (m,):
            raise DatasetFormatError(
                "instance %d field 'f_lower' has length %d, expected m=%d"
                % (idx, f_lower.size, m))
        f_upper = np.asarray(_field(rec, "f_upper", idx), dtype=np.float64)
        if f_upper.shape != (m,):
            raise DatasetFormatError(
                "instance %d field 'f_upper' has length %d, expected m=%d"
                % (idx, f_upper.size, m))
        try:
            instances.append(Instance(psi=psi, U=U,
                                      f_lower=f_lower, f_upper=f_upper))
        except (ValueError, DegenerateInputError) as exc:
            raise DatasetFormatError("instance %d invalid: %s" % (idx, exc)) from exc

    gen_spec = None
    if blob.get("gen_spec") is not None:
        try:
            gen_spec = GenSpec(**blob["gen_spec"])
        except TypeError as exc:
            raise DatasetFormatError("malformed gen_spec: %s" % exc) from exc
    return instances, gen_spec
