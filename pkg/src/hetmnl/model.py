"""Core data model: long-format choice data, identification, design assembly.

Each chooser faces the same J alternatives and picks exactly one.  Covariates
play one of three roles: choice-specific columns (z) vary over alternatives
and carry a single generic coefficient each; chooser-specific columns (s) are
constant over a chooser's rows and carry one coefficient per non-reference
alternative; heterogeneity columns (w) are chooser-specific and feed the
latent-utility scale term.  Identification fixes the reference alternative's
constant and s-coefficients at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "ChoiceRow",
    "ChoiceDataset",
    "ModelSpec",
    "ParameterVector",
    "DesignBlock",
    "Design",
    "build_design",
    "make_block",
    "pack",
    "unpack",
    "build_proximity",
]


@dataclass(frozen=True, eq=False)
class ChoiceRow:
    """One chooser-alternative record in long format."""

    chooser_id: str
    alternative: int            # 1-based index in 1..J
    chosen: int | None          # 1 if this row was picked, 0 otherwise; None if unobserved
    covariates: Mapping[str, float]


@dataclass(frozen=True, eq=False)
class ChoiceDataset:
    """Immutable collection of long-format rows, J per chooser."""

    rows: tuple[ChoiceRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def chooser_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.chooser_id for r in self.rows}))

    @property
    def n_choosers(self) -> int:
        return len(self.chooser_ids)

    def grouped(self) -> dict[str, list[ChoiceRow]]:
        """Rows per chooser, choosers in string order, rows by alternative."""
        groups: dict[str, list[ChoiceRow]] = {}
        for row in self.rows:
            groups.setdefault(row.chooser_id, []).append(row)
        return {
            cid: sorted(groups[cid], key=lambda r: r.alternative)
            for cid in sorted(groups)
        }

    def validate(self, n_alternatives: int | None = None) -> None:
        """Check the structural invariants; raises DataError naming the chooser."""
        groups = self.grouped()
        if not groups:
            raise DataError("dataset contains no rows")
        if n_alternatives is None:
            n_alternatives = len(next(iter(groups.values())))
        for cid, rows in groups.items():
            _check_block_structure(cid, rows, n_alternatives)


def _check_block_structure(cid: str, rows: Sequence[ChoiceRow], n_alternatives: int) -> int | None:
    """Validate one chooser's rows; returns the 0-based chosen index (None if unobserved)."""
    alts = [r.alternative for r in rows]
    if len(rows) != n_alternatives or alts != list(range(1, n_alternatives + 1)):
        raise DataError(
            f"chooser {cid!r}: expected {n_alternatives} rows covering alternatives "
            f"1..{n_alternatives}, got alternatives {alts}"
        )
    flags = [r.chosen for r in rows]
    if all(f is None for f in flags):
        return None
    if any(f is None for f in flags):
        raise DataError(f"chooser {cid!r}: chosen indicator is set on some rows but not all")
    if any(f not in (0, 1) for f in flags):
        raise DataError(f"chooser {cid!r}: chosen indicator must be 0 or 1")
    if sum(flags) != 1:
        raise DataError(f"chooser {cid!r}: expected exactly one chosen row, got {sum(flags)}")
    return flags.index(1)


@dataclass(frozen=True)
class ModelSpec:
    """Covariate roles and identification choices for one model.

    The reference alternative's constant and chooser-attribute coefficients
    are fixed at zero.  ``penalty`` is the ridge weight applied to all
    non-constant coefficients during fitting (0 disables it).
    """

    n_alternatives: int
    z_names: tuple[str, ...] = ()
    s_names: tuple[str, ...] = ()
    w_names: tuple[str, ...] = ()
    reference_alternative: int = 1
    penalty: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z_names", tuple(self.z_names))
        object.__setattr__(self, "s_names", tuple(self.s_names))
        object.__setattr__(self, "w_names", tuple(self.w_names))
        j = self.n_alternatives
        if not isinstance(j, int) or j < 2:
            raise ConfigError(f"n_alternatives must be an integer >= 2, got {j!r}")
        if not 1 <= self.reference_alternative <= j:
            raise ConfigError(
                f"reference_alternative must lie in 1..{j}, got {self.reference_alternative}"
            )
        if self.penalty < 0:
            raise ConfigError(f"penalty must be nonnegative, got {self.penalty}")
        for role, names in (("z", self.z_names), ("s", self.s_names), ("w", self.w_names)):
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate column name in {role}_names: {names}")
        # w may overlap s (a chooser attribute can drive both location and scale),
        # but z must stay disjoint from both.
        for other, names in (("s", self.s_names), ("w", self.w_names)):
            shared = set(self.z_names) & set(names)
            if shared:
                raise ConfigError(
                    f"column(s) {sorted(shared)} appear in both z_names and {other}_names"
                )

    @property
    def non_reference(self) -> tuple[int, ...]:
        """Non-reference alternatives, ascending, 1-based."""
        return tuple(
            j for j in range(1, self.n_alternatives + 1) if j != self.reference_alternative
        )

    @property
    def n_location(self) -> int:
        j, k, m = self.n_alternatives, len(self.z_names), len(self.s_names)
        return (j - 1) + k + (j - 1) * m

    @property
    def n_free(self) -> int:
        return self.n_location + len(self.w_names)

    def labels(self) -> tuple[str, ...]:
        """Free-parameter labels in packing order."""
        out = [f"const[{j}]" for j in self.non_reference]
        out += [f"z[{name}]" for name in self.z_names]
        for j in self.non_reference:
            out += [f"s[{name}][{j}]" for name in self.s_names]
        out += [f"w[{name}]" for name in self.w_names]
        return tuple(out)

    def penalized_mask(self) -> np.ndarray:
        """Boolean mask over the free vector: True where the ridge penalty applies.

        Alternative constants are never penalized; every other coefficient is.
        """
        mask = np.ones(self.n_free, dtype=bool)
        mask[: self.n_alternatives - 1] = False
        return mask


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Model parameters under the reference-alternative constraints.

    ``constants`` has length J, ``betas`` shape (J, M); the reference row of
    each is identically zero and is excluded from the packed free vector.
    """

    constants: np.ndarray
    alpha: np.ndarray
    betas: np.ndarray
    gamma: np.ndarray
    reference: int = 1

    def __post_init__(self):
        constants = np.array(self.constants, dtype=float).reshape(-1)
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        gamma = np.array(self.gamma, dtype=float).reshape(-1)
        betas = np.array(self.betas, dtype=float)
        j = constants.size
        if j < 2:
            raise ConfigError("constants must have one entry per alternative (J >= 2)")
        if betas.size == 0:
            betas = betas.reshape(j, 0)
        if betas.ndim != 2 or betas.shape[0] != j:
            raise ConfigError(
                f"betas must have shape (J, M) = ({j}, M), got {betas.shape}"
            )
        if not 1 <= self.reference <= j:
            raise ConfigError(f"reference must lie in 1..{j}, got {self.reference}")
        for name, arr in (("constants", constants), ("alpha", alpha),
                          ("betas", betas), ("gamma", gamma)):
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"{name} contains non-finite values")
        r0 = self.reference - 1
        if constants[r0] != 0.0 or (betas.shape[1] and np.any(betas[r0] != 0.0)):
            raise ConfigError(
                f"reference alternative {self.reference} must have zero constant "
                "and zero chooser-attribute coefficients"
            )
        for arr in (constants, alpha, betas, gamma):
            arr.flags.writeable = False
        object.__setattr__(self, "constants", constants)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_alternatives(self) -> int:
        return self.constants.size

    @property
    def n_location(self) -> int:
        j = self.n_alternatives
        return (j - 1) + self.alpha.size + (j - 1) * self.betas.shape[1]

    @property
    def n_free(self) -> int:
        return self.n_location + self.gamma.size

    @property
    def _non_reference0(self) -> list[int]:
        return [j for j in range(self.n_alternatives) if j != self.reference - 1]

    @property
    def delta(self) -> np.ndarray:
        """Location coefficients in design order (constants, alpha, beta blocks)."""
        nr = self._non_reference0
        return np.concatenate([self.constants[nr], self.alpha, self.betas[nr].ravel()])

    def pack(self) -> np.ndarray:
        """Free vector: (constants, alpha, beta blocks, gamma), reference excluded."""
        return np.concatenate([self.delta, self.gamma])

    @classmethod
    def unpack(cls, theta: Sequence[float], spec: ModelSpec) -> "ParameterVector":
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != spec.n_free:
            raise ConfigError(
                f"parameter vector has length {theta.size}, expected {spec.n_free} "
                f"for this specification"
            )
        j = spec.n_alternatives
        k, m, length = len(spec.z_names), len(spec.s_names), len(spec.w_names)
        nr = [a - 1 for a in spec.non_reference]
        constants = np.zeros(j)
        constants[nr] = theta[: j - 1]
        alpha = theta[j - 1 : j - 1 + k]
        betas = np.zeros((j, m))
        if m:
            betas[nr] = theta[j - 1 + k : j - 1 + k + (j - 1) * m].reshape(j - 1, m)
        gamma = theta[spec.n_location :]
        return cls(constants, alpha, betas, gamma, reference=spec.reference_alternative)

    @classmethod
    def from_dict(cls, d: Mapping, spec: ModelSpec) -> "ParameterVector":
        """Build from a plain mapping, filling absent blocks with zeros."""
        j = spec.n_alternatives
        m = len(spec.s_names)
        constants = d.get("constants", np.zeros(j))
        alpha = d.get("alpha", np.zeros(len(spec.z_names)))
        betas = d.get("betas", np.zeros((j, m)))
        gamma = d.get("gamma", np.zeros(len(spec.w_names)))
        betas = np.array(betas, dtype=float)
        if betas.size == 0:
            betas = np.zeros((j, m))
        ref = int(d.get("reference_alternative", spec.reference_alternative))
        if ref != spec.reference_alternative:
            raise ConfigError(
                f"parameters use reference alternative {ref} but the specification "
                f"uses {spec.reference_alternative}"
            )
        params = cls(constants, alpha, betas, gamma, reference=ref)
        if params.n_free != spec.n_free or params.n_alternatives != j:
            raise ConfigError(
                f"parameter dimensions do not match the specification "
                f"(got {params.n_free} free parameters, expected {spec.n_free})"
            )
        return params

    def to_dict(self) -> dict:
        return {
            "constants": self.constants.tolist(),
            "alpha": self.alpha.tolist(),
            "betas": self.betas.tolist(),
            "gamma": self.gamma.tolist(),
            "reference_alternative": self.reference,
        }

    def rebase(self, new_reference: int) -> "ParameterVector":
        """Express the same model with a different reference alternative.

        Choice probabilities are invariant under this transformation.
        """
        if not 1 <= new_reference <= self.n_alternatives:
            raise ConfigError(f"new reference {new_reference} out of range")
        r0 = new_reference - 1
        return ParameterVector(
            self.constants - self.constants[r0],
            self.alpha,
            self.betas - self.betas[r0],
            self.gamma,
            reference=new_reference,
        )

    def replace_gamma(self, gamma: Sequence[float]) -> "ParameterVector":
        return ParameterVector(
            self.constants, self.alpha, self.betas, gamma, reference=self.reference
        )


def pack(params: ParameterVector) -> np.ndarray:
    """Pack a ParameterVector into the free-parameter vector."""
    return params.pack()


def unpack(theta: Sequence[float], spec: ModelSpec) -> ParameterVector:
    """Inverse of :func:`pack` for the given specification."""
    return ParameterVector.unpack(theta, spec)


@dataclass(frozen=True, eq=False)
class DesignBlock:
    """One chooser's design: J stacked x-rows, the w vector, and the choice.

    ``choice`` is the 0-based index of the chosen alternative (None when the
    outcome is unobserved, e.g. for prediction).
    """

    chooser_id: str
    x: np.ndarray          # (J, n_location)
    w: np.ndarray          # (L,)
    choice: int | None = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        w = np.array(self.w, dtype=float).reshape(-1)
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)

    @property
    def n_alternatives(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True, eq=False)
class Design:
    """All choosers' design blocks stacked for vectorized evaluation."""

    spec: ModelSpec
    chooser_ids: tuple[str, ...]
    x: np.ndarray                 # (n, J, n_location)
    w: np.ndarray                 # (n, L)
    choices: np.ndarray | None    # (n,) 0-based, or None when unobserved

    def __post_init__(self):
        for arr in (self.x, self.w, self.choices):
            if arr is not None:
                arr.flags.writeable = False

    @property
    def n_choosers(self) -> int:
        return self.x.shape[0]

    def __len__(self) -> int:
        return self.n_choosers

    def block(self, i: int) -> DesignBlock:
        choice = None if self.choices is None else int(self.choices[i])
        return DesignBlock(self.chooser_ids[i], self.x[i], self.w[i], choice)

    def __iter__(self) -> Iterator[DesignBlock]:
        return (self.block(i) for i in range(self.n_choosers))


def _layout_rows(spec: ModelSpec, z: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Assemble the (J, n_location) x-matrix for one chooser.

    Columns: alternative dummies, then z values, then dummy-times-s
    interactions, so that x_ij . delta = const_j + z_ij . alpha + s_i . beta_j
    with the reference alternative's blocks zeroed.
    """
    j = spec.n_alternatives
    k, m = len(spec.z_names), len(spec.s_names)
    x = np.zeros((j, spec.n_location))
    for pos, alt in enumerate(spec.non_reference):
        x[alt - 1, pos] = 1.0
    if k:
        x[:, j - 1 : j - 1 + k] = z
    if m:
        for pos, alt in enumerate(spec.non_reference):
            start = j - 1 + k + pos * m
            x[alt - 1, start : start + m] = s
    return x


def _covariate(row: ChoiceRow, name: str) -> float:
    try:
        value = float(row.covariates[name])
    except KeyError:
        raise ConfigError(f"covariate column {name!r} is missing from the data") from None
    except (TypeError, ValueError):
        raise DataError(
            f"chooser {row.chooser_id!r}: covariate {name!r} is not numeric"
        ) from None
    if not np.isfinite(value):
        raise DataError(
            f"chooser {row.chooser_id!r}: covariate {name!r} is not finite"
        )
    return value


def build_design(dataset: ChoiceDataset, spec: ModelSpec) -> Design:
    """Assemble per-chooser design blocks, ordered by chooser id.

    Validates the dataset structure (J rows per chooser, one chosen row) and
    the covariate contract (all referenced columns present, finite, and
    constant over a chooser's rows for the s and w roles).
    """
    groups = dataset.grouped()
    if not groups:
        raise DataError("dataset contains no rows")
    j = spec.n_alternatives
    k, m, length = len(spec.z_names), len(spec.s_names), len(spec.w_names)
    ids = tuple(groups)
    n = len(ids)
    x = np.zeros((n, j, spec.n_location))
    w = np.zeros((n, length))
    choices = np.full(n, -1, dtype=np.int64)
    seen_choice = 0
    for i, cid in enumerate(ids):
        rows = groups[cid]
        choice = _check_block_structure(cid, rows, j)
        if choice is not None:
            choices[i] = choice
            seen_choice += 1
        z = np.zeros((j, k))
        for a, row in enumerate(rows):
            for t, name in enumerate(spec.z_names):
                z[a, t] = _covariate(row, name)
        s = np.array([_covariate(rows[0], name) for name in spec.s_names])
        w[i] = [_covariate(rows[0], name) for name in spec.w_names]
        for name in set(spec.s_names) | set(spec.w_names):
            first = _covariate(rows[0], name)
            for row in rows[1:]:
                if _covariate(row, name) != first:
                    raise DataError(
                        f"chooser {cid!r}: chooser-specific column {name!r} varies "
                        "across alternatives"
                    )
        x[i] = _layout_rows(spec, z, s)
    if seen_choice not in (0, n):
        raise DataError("chosen indicator is present for some choosers but not all")
    return Design(spec, ids, x, w, choices if seen_choice else None)


def make_block(
    spec: ModelSpec,
    z: Mapping[str, Sequence[float]] | None = None,
    s: Mapping[str, float] | None = None,
    w: Mapping[str, float] | None = None,
    chooser_id: str = "block",
) -> DesignBlock:
    """Build a single design block from covariate values keyed by name.

    ``z`` maps each choice-specific column to its J per-alternative values;
    ``s`` and ``w`` map chooser-specific columns to scalars.  A w column that
    also appears in s may be given in either mapping.
    """
    z = dict(z or {})
    s = dict(s or {})
    w = dict(w or {})
    j = spec.n_alternatives
    zmat = np.zeros((j, len(spec.z_names)))
    for t, name in enumerate(spec.z_names):
        if name not in z:
            raise ConfigError(f"covariate column {name!r} is missing from the data")
        vals = np.asarray(z[name], dtype=float).reshape(-1)
        if vals.size != j:
            raise ConfigError(
                f"choice-specific column {name!r} needs {j} values, got {vals.size}"
            )
        zmat[:, t] = vals
    svec = np.empty(len(spec.s_names))
    for t, name in enumerate(spec.s_names):
        if name not in s and name not in w:
            raise ConfigError(f"covariate column {name!r} is missing from the data")
        svec[t] = float(s.get(name, w.get(name, 0.0)))
    wvec = np.empty(len(spec.w_names))
    for t, name in enumerate(spec.w_names):
        if name not in w and name not in s:
            raise ConfigError(f"covariate column {name!r} is missing from the data")
        wvec[t] = float(w.get(name, s.get(name, 0.0)))
    for vec in (zmat, svec, wvec):
        if not np.all(np.isfinite(vec)):
            raise DataError(f"chooser {chooser_id!r}: covariates must be finite")
    return DesignBlock(chooser_id, _layout_rows(spec, zmat, svec), wvec)


def build_proximity(self_position: float, perceived_positions: Sequence[float]) -> np.ndarray:
    """Negative absolute distance between a self-placement and J perceived positions.

    This is the standard construction for issue-proximity z columns: larger
    (closer to zero) means the alternative is perceived as closer.
    """
    self_position = float(self_position)
    positions = np.asarray(perceived_positions, dtype=float).reshape(-1)
    if not np.isfinite(self_position) or not np.all(np.isfinite(positions)):
        raise DataError("proximity inputs must be finite")
    return -np.abs(self_position - positions)
