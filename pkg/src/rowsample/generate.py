"""Synthetic test matrices with a prescribed spectrum and leverage profile."""
import numpy as np

from .errors import InvalidInputError
from .rng import make_rng

UNIFORM = "uniform"
PLANTED = "planted"


def _orthonormal(rng, m, d, planted_row=None):
    g = rng.standard_normal((m, d))
    if planted_row is not None:
        g[planted_row] *= np.sqrt(m)
    q, r = np.linalg.qr(g)
    # make the factorization unique so the result depends only on the draw
    return q * np.sign(np.diag(r))


def generate_matrix(m, d, spectrum, coherence=UNIFORM, seed=0, planted_row=0):
    """``A = U diag(spectrum) V^T`` with random orthonormal ``U`` and orthogonal ``V``.

    With ``coherence="uniform"`` the leverage scores of ``U`` are all close
    to ``d/m``. With ``coherence="planted"`` the row ``planted_row`` is
    inflated before orthonormalization and ends up carrying most of one
    direction's leverage.
    """
    if int(m) != m or int(d) != d or d < 1 or m < d:
        raise InvalidInputError(f"need integers m >= d >= 1, got m={m}, d={d}")
    s = np.asarray(spectrum, dtype=np.float64).reshape(-1)
    if s.shape[0] != d or np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise InvalidInputError(f"spectrum must hold {d} positive finite values")
    if coherence not in (UNIFORM, PLANTED):
        raise InvalidInputError(f"unknown coherence {coherence!r}")
    if coherence == PLANTED and not 0 <= planted_row < m:
        raise InvalidInputError(f"planted row {planted_row} outside [0, {m})")
    rng = make_rng(seed)
    u = _orthonormal(rng, int(m), int(d), planted_row if coherence == PLANTED else None)
    v = _orthonormal(rng, int(d), int(d))
    return (u * s) @ v.T


def parse_spectrum(text, d):
    """Spectrum shorthand used on the command line.

    ``ones``, ``linear:HI:LO`` (evenly spaced), ``geometric:RATIO`` (starting
    at 1), or explicit values joined by ``:``.
    """
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "ones":
            return np.ones(d)
        if kind == "linear":
            hi, lo = float(parts[1]), float(parts[2])
            return np.linspace(hi, lo, d)
        if kind == "geometric":
            ratio = float(parts[1])
            return ratio ** np.arange(d, dtype=np.float64)
        values = np.array([float(p) for p in parts])
    except (IndexError, ValueError):
        raise InvalidInputError(f"cannot parse spectrum {text!r}") from None
    if values.shape[0] != d:
        raise InvalidInputError(f"spectrum {text!r} has {values.shape[0]} values, expected {d}")
    return values


def parse_generate_spec(text):
    """Parse ``"m,d,spectrum,coherence"``; coherence is ``uniform`` or ``planted:T``."""
    fields = [f.strip() for f in text.split(",")]
    if len(fields) != 4:
        raise InvalidInputError(f"--generate expects m,d,spectrum,coherence; got {text!r}")
    try:
        m, d = int(fields[0]), int(fields[1])
    except ValueError:
        raise InvalidInputError(f"m and d must be integers in {text!r}") from None
    spectrum = parse_spectrum(fields[2], d)
    coh = fields[3].split(":")
    if coh[0] == UNIFORM and len(coh) == 1:
        return dict(m=m, d=d, spectrum=spectrum, coherence=UNIFORM, planted_row=0)
    if coh[0] == PLANTED and len(coh) == 2:
        try:
            return dict(m=m, d=d, spectrum=spectrum, coherence=PLANTED, planted_row=int(coh[1]))
        except ValueError:
            pass
    raise InvalidInputError(f"cannot parse coherence {fields[3]!r}")
