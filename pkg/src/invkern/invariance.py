"""Group invariances, invariant inner kernels, and their combination.

An invariance here is a group acting on the data space by scalar
multiplication (sign/root-of-unity flips, complex phases, positive
scales, or arbitrary nonzero scalars).  Each one owns an *invariant
inner kernel*: a kernel whose implicit feature map is the quotient map
collapsing group orbits.  Feeding that kernel's triple into any base
kernel from :mod:`invkern.kernels` yields a fully invariant kernel
without ever materializing the quotient features.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import FieldError, OracleSizeError, ParseError, ZeroVectorError
from .kernels import (
    BaseKernel,
    ScalarTriple,
    eval_base,
    make_triple,
)

KINDS = ("rotation", "phase", "scale", "proj", "chain")

# Chained pairs whose composed quotient is known to be well behaved.
# Other combinations still evaluate but may collapse all orbits.
_VALIDATED_PAIRS = frozenset(
    {frozenset(("scale", "rotation")), frozenset(("scale", "phase"))}
)

_MAX_CHAIN_DEPTH = 4


class ChainCompatibilityWarning(UserWarning):
    """Chained invariances outside the validated pairs may trivialize."""


@dataclass(frozen=True)
class Invariance:
    """Specification of one invariance, or an ordered chain of them.

    Kinds: ``rotation`` (multiplication by m-th roots of unity, m=2 is
    sign invariance), ``phase`` (unit complex factors), ``scale``
    (positive factors), ``proj`` (any nonzero factor), ``chain``.
    """

    kind: str
    m: int = 0
    parts: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown invariance kind {self.kind!r}")
        if self.kind == "rotation" and self.m < 2:
            raise ValueError("rotation order m must be at least 2")
        if self.kind == "chain":
            object.__setattr__(self, "parts", tuple(self.parts))
            if not self.parts:
                raise ValueError("chain must contain at least one invariance")
            if any(not isinstance(p, Invariance) for p in self.parts):
                raise ValueError("chain parts must be Invariance instances")
            if _depth(self) > _MAX_CHAIN_DEPTH:
                raise ValueError(f"chain nesting deeper than {_MAX_CHAIN_DEPTH}")
            _warn_if_unvalidated(self)


def _depth(spec: Invariance) -> int:
    if spec.kind != "chain":
        return 1
    return 1 + max(_depth(p) for p in spec.parts)


def _flatten(spec: Invariance) -> list:
    if spec.kind != "chain":
        return [spec]
    out = []
    for part in spec.parts:
        out.extend(_flatten(part))
    return out


def _warn_if_unvalidated(spec: Invariance) -> None:
    kinds = [p.kind for p in _flatten(spec)]
    if len(kinds) < 2:
        return
    duplicated = len(set(kinds)) < len(kinds)
    unvalidated = any(
        frozenset((a, b)) not in _VALIDATED_PAIRS
        for i, a in enumerate(kinds)
        for b in kinds[i + 1 :]
    )
    if duplicated or unvalidated:
        warnings.warn(
            f"chain {kinds} is outside the validated combinations; "
            "the composed quotient may collapse all orbits to one point",
            ChainCompatibilityWarning,
            stacklevel=3,
        )


def rotation(m: int) -> Invariance:
    """Invariance under multiplication by the m-th roots of unity."""
    return Invariance("rotation", m=int(m))


def chain(*parts: Invariance) -> Invariance:
    """Ordered composition of invariances, applied left to right."""
    return Invariance("chain", parts=tuple(parts))


SIGN = rotation(2)
PHASE = Invariance("phase")
SCALE = Invariance("scale")
PROJ = Invariance("proj")


@dataclass(frozen=True)
class KernelSpec:
    """A base kernel plus the invariance driving its triple."""

    base: BaseKernel
    invariance: Invariance | None = None


def kernel_label(spec: KernelSpec) -> str:
    """Canonical one-line description, e.g. ``gaussian(sigma=22)+sign``."""
    base = spec.base
    if base.family in ("gaussian", "laplace"):
        text = f"{base.family}(sigma={base.sigma:g})"
    elif base.family in ("poly", "polyhom"):
        text = f"{base.family}(degree={base.degree})"
    else:
        text = "linear"
    if spec.invariance is not None:
        text += "+" + format_invariance(spec.invariance)
    return text


# ---------------------------------------------------------------------------
# Group elements and actions


@dataclass(frozen=True)
class GroupElement:
    """One element of an invariance group.

    The payload ``value`` depends on ``kind``: rotation stores the
    residue ell (with the order in ``m``), phase the angle in [0, 1),
    scale the log-factor, proj the nonzero complex factor; chains hold
    one element per stage in ``parts``.
    """

    kind: str
    value: object = None
    m: int = 0
    parts: tuple = ()


def identity_element(spec: Invariance) -> GroupElement:
    """The identity of the group described by ``spec``."""
    if spec.kind == "chain":
        return GroupElement("chain", parts=tuple(identity_element(p) for p in spec.parts))
    if spec.kind == "rotation":
        return GroupElement("rotation", value=0, m=spec.m)
    if spec.kind == "phase":
        return GroupElement("phase", value=0.0)
    if spec.kind == "scale":
        return GroupElement("scale", value=0.0)
    return GroupElement("proj", value=1.0 + 0.0j)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product g*h (apply h first, then g)."""
    if g.kind != h.kind or (g.kind == "rotation" and g.m != h.m):
        raise ValueError("cannot compose elements of different groups")
    if g.kind == "chain":
        return GroupElement(
            "chain", parts=tuple(compose(a, b) for a, b in zip(g.parts, h.parts))
        )
    if g.kind == "rotation":
        return GroupElement("rotation", value=(g.value + h.value) % g.m, m=g.m)
    if g.kind == "phase":
        return GroupElement("phase", value=(g.value + h.value) % 1.0)
    if g.kind == "scale":
        return GroupElement("scale", value=g.value + h.value)
    return GroupElement("proj", value=g.value * h.value)


def _element_factor(g: GroupElement):
    """Multiplicative factor of an atomic element and whether it is real.

    Realness is decided from the element's parameters, not from the
    floating factor, so sign flips stay exact on real data.
    """
    if g.kind == "rotation":
        ell = g.value % g.m
        if ell == 0:
            return 1.0, True
        if 2 * ell == g.m:
            return -1.0, True
        return complex(np.exp(2j * np.pi * ell / g.m)), False
    if g.kind == "phase":
        angle = g.value % 1.0
        if angle == 0.0:
            return 1.0, True
        if angle == 0.5:
            return -1.0, True
        return complex(np.exp(2j * np.pi * angle)), False
    if g.kind == "scale":
        return float(np.exp(g.value)), True
    factor = complex(g.value)
    if factor == 0:
        raise ValueError("proj group elements must be nonzero")
    return (factor.real, True) if factor.imag == 0.0 else (factor, False)


def apply_group(g: GroupElement, x):
    """Apply one group element to a data point."""
    x = np.asarray(x)
    if g.kind == "chain":
        for part in g.parts:
            x = apply_group(part, x)
        return x
    factor, is_real = _element_factor(g)
    if not is_real and not np.iscomplexobj(x):
        raise FieldError(
            f"{g.kind} element with a genuinely complex factor cannot act on real data"
        )
    return x * factor


def sample_group_element(spec: Invariance, rng, complex_field: bool) -> GroupElement:
    """Draw a random group element with full support on the group.

    On a real data field, continuous phase-like groups are restricted to
    the subgroup that preserves real vectors (the sign subgroup).
    """
    if spec.kind == "chain":
        return GroupElement(
            "chain",
            parts=tuple(sample_group_element(p, rng, complex_field) for p in spec.parts),
        )
    if spec.kind == "rotation":
        return GroupElement("rotation", value=int(rng.integers(spec.m)), m=spec.m)
    if spec.kind == "phase":
        if complex_field:
            return GroupElement("phase", value=float(rng.random()))
        return GroupElement("phase", value=0.5 * float(rng.integers(2)))
    if spec.kind == "scale":
        return GroupElement("scale", value=float(rng.standard_normal()))
    magnitude = float(np.exp(rng.standard_normal()))
    if complex_field:
        return GroupElement(
            "proj", value=magnitude * complex(np.exp(2j * np.pi * rng.random()))
        )
    return GroupElement("proj", value=complex(magnitude * (2.0 * rng.integers(2) - 1.0)))


# ---------------------------------------------------------------------------
# Invariant inner kernels via triple rewriting


def transform_triples(spec: Invariance, sxx, sxy, syy):
    """Rewrite triple components into the invariance's orbit geometry.

    Works elementwise on arrays; chains fold left to right, each stage
    consuming the triple produced by the previous one.
    """
    if spec.kind == "chain":
        for part in spec.parts:
            sxx, sxy, syy = transform_triples(part, sxx, sxy, syy)
        return sxx, sxy, syy
    if spec.kind == "rotation":
        return sxx**spec.m, sxy**spec.m, syy**spec.m
    if spec.kind == "phase":
        return sxx**2, np.real(sxy * np.conj(sxy)), syy**2
    denom = np.asarray(sxx, dtype=float) * np.asarray(syy, dtype=float)
    zero = np.atleast_1d(denom == 0.0)
    if np.any(zero):
        raise ZeroVectorError(
            f"{spec.kind} invariance is undefined for zero-norm points "
            f"(offending pair index {int(np.argmax(zero))})"
        )
    ones = np.ones_like(denom)
    if spec.kind == "scale":
        return ones, sxy / np.sqrt(denom), ones
    return ones, np.real(sxy * np.conj(sxy)) / denom, ones


def _requires_complex(spec: Invariance) -> bool:
    return any(p.kind == "rotation" and p.m >= 3 for p in _flatten(spec))


def _check_field(spec: Invariance, complex_data: bool) -> None:
    # Root-of-unity actions with m >= 3 move real vectors out of R^n.
    if not complex_data and _requires_complex(spec):
        raise FieldError("rotation invariance with m >= 3 requires complex data")


def _scalarize(value):
    value = complex(value)
    return value if value.imag != 0.0 else value.real


def kernel_triple(spec: KernelSpec, x, y) -> ScalarTriple:
    """The scalar-product triple the base kernel will consume."""
    x = np.asarray(x)
    y = np.asarray(y)
    t = make_triple(x, y)
    if spec.invariance is None:
        return t
    _check_field(spec.invariance, np.iscomplexobj(x) or np.iscomplexobj(y))
    sxx, sxy, syy = transform_triples(spec.invariance, t.sxx, t.sxy, t.syy)
    return ScalarTriple(float(sxx), _scalarize(sxy), float(syy))


def invariant_inner(spec: Invariance, x, y):
    """Invariant inner kernel value <q(x), q(y)> without computing q."""
    return kernel_triple(KernelSpec(BaseKernel("linear"), spec), x, y).sxy


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate the (optionally invariant) kernel on a pair of points."""
    return eval_base(spec.base, kernel_triple(spec, x, y))


# ---------------------------------------------------------------------------
# Explicit quotient features (brute-force reference)


def quotient_map_oracle(spec: Invariance, x) -> np.ndarray:
    """Explicit invariant features of one point.

    This is the slow reference path: the m-fold outer tensor for
    rotation invariance, v v* for phase, x/||x|| for scale and
    x x*/||x||^2 for proj.  Pairing two outputs with the Frobenius
    inner product reproduces :func:`invariant_inner`.
    """
    x = np.asarray(x)
    if spec.kind == "chain":
        raise ValueError("chained invariances have no explicit feature oracle")
    if spec.kind == "rotation":
        if spec.m > 3 or x.size > 8:
            raise OracleSizeError(
                f"outer-tensor oracle limited to m <= 3 and dim <= 8 "
                f"(got m={spec.m}, dim={x.size})"
            )
        return reduce(np.multiply.outer, [x] * spec.m)
    if spec.kind == "phase":
        return np.outer(x, np.conj(x))
    norm_sq = float(np.real(np.vdot(x, x)))
    if norm_sq == 0.0:
        raise ZeroVectorError(f"{spec.kind} quotient is undefined at the origin")
    if spec.kind == "scale":
        return x / np.sqrt(norm_sq)
    return np.outer(x, np.conj(x)) / norm_sq


def frobenius_inner(a: np.ndarray, b: np.ndarray):
    """Hermitian Frobenius pairing sum a_i * conj(b_i) over all entries."""
    value = complex(np.vdot(np.asarray(b).ravel(), np.asarray(a).ravel()))
    if not (np.iscomplexobj(a) or np.iscomplexobj(b)):
        return value.real
    return value


# ---------------------------------------------------------------------------
# Randomized invariance testing


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of randomized invariance testing for one kernel spec."""

    passed: bool
    max_deviation: float
    threshold: float
    tolerance: float
    kernel_scale: float
    n_group_samples: int


def check_invariance(
    spec: KernelSpec,
    samples,
    n_group_samples: int = 16,
    seed: int = 0,
    group: Invariance | None = None,
    tolerance: float = 1e-10,
) -> InvarianceReport:
    """Test k(g.x, h.y) == k(x, y) on random pairs and group elements.

    ``group`` defaults to the spec's own invariance; passing a different
    group turns this into a falsifier for kernels that should *not* be
    invariant.  The pass threshold is ``tolerance`` relative to the
    largest kernel magnitude seen, floored at 1.
    """
    points = np.asarray(getattr(samples, "points", samples))
    if len(points) == 0:
        raise ValueError("samples must be non-empty")
    if n_group_samples < 1:
        raise ValueError("n_group_samples must be at least 1")
    if group is None:
        group = spec.invariance
    if group is None:
        return InvarianceReport(True, 0.0, tolerance, tolerance, 0.0, 0)
    rng = np.random.default_rng(seed)
    complex_field = np.iscomplexobj(points)
    max_dev = 0.0
    scale = 0.0
    for _ in range(n_group_samples):
        i, j = rng.integers(len(points), size=2)
        g = sample_group_element(group, rng, complex_field)
        h = sample_group_element(group, rng, complex_field)
        plain = eval_kernel(spec, points[i], points[j])
        moved = eval_kernel(spec, apply_group(g, points[i]), apply_group(h, points[j]))
        max_dev = max(max_dev, abs(moved - plain))
        scale = max(scale, abs(plain), abs(moved))
    threshold = tolerance * max(1.0, scale)
    return InvarianceReport(
        max_dev <= threshold, max_dev, threshold, tolerance, scale, n_group_samples
    )


def median_heuristic_sigma(points, invariance: Invariance | None = None) -> float:
    """Median pairwise distance in the (possibly invariant) feature geometry.

    Distances are read off the triple as sqrt(i(x,x) - 2 Re i(x,y) + i(y,y)),
    so no explicit quotient features are formed.
    """
    pts = np.asarray(getattr(points, "points", points))
    n = len(pts)
    if n < 2:
        raise ValueError("median heuristic needs at least two points")
    if invariance is not None:
        _check_field(invariance, np.iscomplexobj(pts))
    rows, cols = np.triu_indices(n, k=1)
    norms_sq = np.real(np.sum(pts * np.conj(pts), axis=1))
    sxy = np.sum(pts[rows] * np.conj(pts[cols]), axis=1)
    sxx = norms_sq[rows]
    syy = norms_sq[cols]
    if invariance is not None:
        sxx, sxy, syy = transform_triples(invariance, sxx, sxy, syy)
    d2 = np.maximum(sxx - 2.0 * np.real(sxy) + syy, 0.0)
    return max(float(np.median(np.sqrt(d2))), 1e-12)


# ---------------------------------------------------------------------------
# Text grammar (CLI serialization)

_NAMED = {"sign": SIGN, "phase": PHASE, "scale": SCALE, "proj": PROJ}


def format_invariance(spec: Invariance) -> str:
    """Canonical text form: sign, rot:m, phase, scale, proj, chain(a,b)."""
    if spec.kind == "chain":
        return "chain(" + ",".join(format_invariance(p) for p in spec.parts) + ")"
    if spec.kind == "rotation":
        return "sign" if spec.m == 2 else f"rot:{spec.m}"
    return spec.kind


def parse_invariance(text: str) -> Invariance:
    """Parse the grammar accepted by ``--inv`` (case-insensitive)."""
    token = text.strip().lower()
    if not token:
        raise ParseError("empty invariance specification")
    if token in _NAMED:
        return _NAMED[token]
    if token.startswith("rot:"):
        try:
            m = int(token[4:])
        except ValueError:
            raise ParseError(f"invalid rotation order in {text!r}") from None
        if m < 2:
            raise ParseError(f"rotation order must be at least 2, got {m}")
        return rotation(m)
    if token.startswith("chain(") and token.endswith(")"):
        inner = token[len("chain(") : -1]
        parts = []
        depth = 0
        start = 0
        for pos, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise ParseError(f"unbalanced parentheses in {text!r}")
            elif ch == "," and depth == 0:
                parts.append(inner[start:pos])
                start = pos + 1
        if depth != 0:
            raise ParseError(f"unbalanced parentheses in {text!r}")
        parts.append(inner[start:])
        if any(not p.strip() for p in parts):
            raise ParseError(f"empty chain member in {text!r}")
        return chain(*(parse_invariance(p) for p in parts))
    raise ParseError(f"cannot parse invariance {text!r}")
