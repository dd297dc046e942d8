"""Graph and graphon filters.

Two filter families live here:

* polynomial (LSI) filters ``H(S) = sum_k h_k S^k`` applied in the vertex
  domain by repeated shifts of the raw shift operator, and
* spectral filters given by a function ``h`` on [-1, 1].  On a graph with
  ``n`` nodes ``h`` is applied to the normalized eigenvalues
  ``lambda_j(S) / n``; on a graphon it is applied to ``lambda_j(T_W)``.

Because of that normalization, a polynomial with taps ``h_k`` on the raw
shift equals the spectral filter of :meth:`PolyFilter.rescaled` ``(n)``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ValidationError
from .graph import Graph, SpectralBasis, _as_signal, gft
from .spectral import GraphonBasis, GraphonSignal, iwft, wft

__all__ = [
    "SpectralFilterFn",
    "PolyFilter",
    "PiecewiseLinear",
    "ConstantResponse",
    "LinearResponse",
    "lowpass",
    "apply_poly",
    "poly_freq_response",
    "apply_spectral_graph_filter",
    "apply_graphon_filter",
    "bandlimit",
    "critical_bandwidth",
    "lipschitz_verify",
    "normalize_filter",
    "parse_filter_spec",
]

MAX_TAPS = 65
_DOMAIN_SLACK = 1e-12


class SpectralFilterFn:
    """Real function ``h`` on [-1, 1] with an optional Lipschitz constant."""

    lipschitz_L: float | None = None

    def _h(self, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(np.abs(lam) > 1 + _DOMAIN_SLACK):
            raise DomainError("filter functions are defined on [-1, 1]")
        out = self._h(np.clip(lam, -1.0, 1.0))
        return float(out) if np.ndim(out) == 0 else out

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec})"


class PolyFilter(SpectralFilterFn):
    """Filter taps ``h_0..h_K``; as a function, ``h(lambda) = sum_k h_k lambda^k``."""

    def __init__(self, taps, lipschitz_L: float | None = None):
        taps = np.array(taps, dtype=float, ndmin=1)
        if taps.ndim != 1 or len(taps) == 0:
            raise ValidationError("need at least one tap")
        if len(taps) > MAX_TAPS:
            raise ValidationError(f"at most {MAX_TAPS} taps are supported")
        if not np.all(np.isfinite(taps)):
            raise ValidationError("taps must be finite")
        taps.setflags(write=False)
        self.taps = taps
        self.lipschitz_L = lipschitz_L

    @property
    def K(self) -> int:
        return len(self.taps) - 1

    def _h(self, lam):
        return poly_freq_response(self, lam)

    def rescaled(self, n: float) -> "PolyFilter":
        """Taps ``h_k n^k``: the same filter expressed on eigenvalues divided by ``n``."""
        return PolyFilter(self.taps * float(n) ** np.arange(len(self.taps)))

    @property
    def spec(self):
        return "poly:" + ",".join(repr(float(t)) for t in self.taps)


class PiecewiseLinear(SpectralFilterFn):
    """Linear interpolation through ``(breakpoints, values)``, flat outside them."""

    def __init__(self, breakpoints, values, lipschitz_L: float | None = None):
        x = np.array(breakpoints, dtype=float)
        y = np.array(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 1:
            raise ValidationError("breakpoints and values must be equal-length vectors")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("breakpoints and values must be finite")
        self.breakpoints, self.values = x, y
        slopes = np.abs(np.diff(y) / np.diff(x)) if len(x) > 1 else np.zeros(1)
        self.max_slope = float(slopes.max()) if slopes.size else 0.0
        self.lipschitz_L = self.max_slope if lipschitz_L is None else lipschitz_L

    def _h(self, lam):
        return np.interp(lam, self.breakpoints, self.values)

    @property
    def spec(self):
        pts = ",".join(f"{a!r}:{b!r}" for a, b in zip(self.breakpoints.tolist(), self.values.tolist()))
        return f"pwl:{pts}"


class ConstantResponse(SpectralFilterFn):
    def __init__(self, value: float = 1.0):
        self.value = float(value)
        self.lipschitz_L = 0.0

    def _h(self, lam):
        return np.full(np.shape(lam), self.value)

    @property
    def spec(self):
        return f"const:{self.value!r}"


class LinearResponse(SpectralFilterFn):
    """``h(lambda) = lambda``; on a graph this is the normalized shift ``S / n``."""

    lipschitz_L = 1.0

    def _h(self, lam):
        return np.array(lam, dtype=float)

    @property
    def spec(self):
        return "linear"


def lowpass(cutoff: float, width: float) -> PiecewiseLinear:
    """Pass ``|lambda| >= cutoff``, stop ``|lambda| <= cutoff - width``, linear in between.

    Large ``|lambda|`` are the smooth end of an adjacency spectrum, so this
    keeps the slowly varying components.  Lipschitz constant ``1 / width``.
    """
    if width <= 0 or cutoff - width < 0 or cutoff > 1:
        raise DomainError("need 0 < width <= cutoff <= 1")
    lo = cutoff - width
    if lo == 0:
        x = [-cutoff, 0.0, cutoff]
        y = [1.0, 0.0, 1.0]
    else:
        x = [-cutoff, -lo, lo, cutoff]
        y = [1.0, 0.0, 0.0, 1.0]
    return PiecewiseLinear(x, y)


def apply_poly(G: Graph, f: PolyFilter, x) -> np.ndarray:
    """``y = sum_k h_k S^k x`` by Horner's scheme on shifts (never forms ``S^k``)."""
    x = _as_signal(x, G.n)
    S = G.S
    y = f.taps[-1] * x
    for h in f.taps[-2::-1]:
        y = S @ y + h * x
    return y


def poly_freq_response(f: PolyFilter, lam):
    """``h(lambda) = sum_k h_k lambda^k`` by Horner evaluation."""
    lam = np.asarray(lam, dtype=float)
    out = np.full(lam.shape, f.taps[-1])
    for h in f.taps[-2::-1]:
        out = out * lam + h
    return float(out) if out.ndim == 0 else out


def apply_spectral_graph_filter(basis: SpectralBasis, h: SpectralFilterFn, x) -> np.ndarray:
    """``y = V h(Lambda / n) V^T x`` with ``n`` the number of nodes."""
    x = _as_signal(x, basis.n)
    lam = basis.eigvals / basis.n
    assert np.all(np.abs(lam) <= 1 + 1e-9), "normalized eigenvalues escaped [-1, 1]"
    return basis.eigvecs @ (h(np.clip(lam, -1, 1)) * gft(basis, x))


def apply_graphon_filter(basis: GraphonBasis, h: SpectralFilterFn, phi: GraphonSignal) -> GraphonSignal:
    """``gamma = sum_j h(lambda_j) phi_hat_j phi_j`` over the retained eigenpairs."""
    c = wft(basis, phi)
    return iwft(basis, h(basis.eigvals) * c)


def bandlimit(basis, c: float, signal):
    """Drop spectral components with ``|lambda| < c``.

    Works on a :class:`GraphonBasis` with a :class:`GraphonSignal`, and on a
    graph :class:`SpectralBasis` with a vertex signal, where the comparison uses
    the normalized eigenvalues ``lambda_j(S) / n``.
    """
    if isinstance(basis, GraphonBasis):
        coeffs = wft(basis, signal)
        return iwft(basis, np.where(np.abs(basis.eigvals) >= c, coeffs, 0.0))
    coeffs = gft(basis, signal)
    keep = np.abs(basis.eigvals / basis.n) >= c
    return basis.eigvecs @ np.where(keep, coeffs, 0.0)


def critical_bandwidth(h0: float, L: float, signal_norm: float, eps: float) -> float:
    """Spectral threshold ``c = (1 - |h0|) / (L (2 ||phi|| / eps + 1))``.

    Below ``c`` a Lipschitz filter with ``h(0) = h0`` (normalized so
    ``max |h| = 1``) varies by less than ``L c``.
    """
    if L <= 0 or eps <= 0:
        raise DomainError("L and eps must be positive")
    if abs(h0) >= 1:
        raise DomainError("|h0| must be < 1 for a positive bandwidth")
    if signal_norm < 0:
        raise DomainError("signal norm must be nonnegative")
    return (1.0 - abs(h0)) / (L * (2.0 * signal_norm / eps + 1.0))


def lipschitz_verify(h: SpectralFilterFn, L: float, grid_points: int = 10_000) -> tuple[bool, float]:
    """Check ``|h(a) - h(b)| <= L |a - b|`` on adjacent points of a uniform grid of [-1, 1].

    Returns ``(holds, worst observed ratio)``; the bound is allowed 1e-9 slack.
    """
    lam = np.linspace(-1.0, 1.0, grid_points)
    vals = np.asarray(h(lam), dtype=float)
    dh = np.abs(np.diff(vals))
    dl = np.diff(lam)
    ratio = float(np.max(dh / dl))
    return bool(np.all(dh <= L * dl + 1e-9)), ratio


class _Scaled(SpectralFilterFn):
    def __init__(self, base: SpectralFilterFn, scale: float):
        self.base, self.scale = base, scale
        self.lipschitz_L = None if base.lipschitz_L is None else base.lipschitz_L / scale

    def _h(self, lam):
        return self.base._h(lam) / self.scale

    @property
    def spec(self):
        return f"normalized({self.base.spec})"


def normalize_filter(h: SpectralFilterFn, grid_points: int = 10_001) -> SpectralFilterFn:
    """``h / max|h|`` with the maximum taken on a grid of [-1, 1]."""
    m = float(np.max(np.abs(h(np.linspace(-1, 1, grid_points)))))
    if m == 0:
        raise DomainError("cannot normalize the zero filter")
    return _Scaled(h, m)


def parse_filter_spec(text: str) -> SpectralFilterFn:
    """Parse a filter spec.

    ``poly:h0,h1,..`` | ``pwl:x0:y0,x1:y1,..`` | ``lowpass:cutoff,width`` |
    ``const:a`` | ``identity`` | ``linear``.  A trailing ``;L=value`` sets
    the declared Lipschitz constant.
    """
    text = text.strip()
    body, _, extra = text.partition(";")
    L = None
    if extra:
        key, _, val = extra.partition("=")
        if key.strip() != "L":
            raise ValidationError(f"unknown filter option {extra!r}")
        L = float(val)
    family, _, params = body.partition(":")
    family = family.strip().lower()
    try:
        if family == "poly":
            h = PolyFilter([float(t) for t in params.split(",")])
        elif family == "pwl":
            pts = [p.split(":") for p in params.split(",")]
            h = PiecewiseLinear([float(a) for a, _ in pts], [float(b) for _, b in pts])
        elif family == "lowpass":
            c, w = (float(v) for v in params.split(","))
            h = lowpass(c, w)
        elif family == "const":
            h = ConstantResponse(float(params))
        elif family == "identity":
            h = ConstantResponse(1.0)
        elif family == "linear":
            h = LinearResponse()
        else:
            raise ValidationError(f"unknown filter family {family!r}")
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad filter spec {text!r}: {exc}") from exc
    if L is not None:
        h.lipschitz_L = L
    return h
