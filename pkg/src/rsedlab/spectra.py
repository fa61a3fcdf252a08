"""Eigenvalue statistics: nearest-neighbor spacings against the Wigner
surmises, and spectral form factors with the embedded-degeneracy factor."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .bitcore import SystemShape
from .subsystem import SubHamiltonian

DEGENERACY_TOL_SCALE = 1e-10


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray = field(repr=False)
    spacings: np.ndarray = field(repr=False)
    degeneracy_multiplicity: int
    histogram: tuple[np.ndarray, np.ndarray]  # (bin edges, densities)


def level_spacing_stats(
    evals: np.ndarray,
    exclude_degenerate: bool = False,
    tolerance: float | None = None,
    bins: int = 40,
) -> SpectrumReport:
    """Sorted spectrum, unit-mean normalized gaps, histogram.

    exclude_degenerate drops gaps below the tolerance (default 1e-10 times
    the spectral range) before normalizing.  degeneracy_multiplicity is the
    modal size of eigenvalue clusters at that tolerance (1 for a simple
    spectrum, 2**(n-k) for an embedded one).
    """
    evals = np.sort(np.asarray(evals, dtype=np.float64))
    if len(evals) < 3:
        raise ValueError("need at least 3 eigenvalues")
    spread = evals[-1] - evals[0]
    tol = tolerance if tolerance is not None else DEGENERACY_TOL_SCALE * spread
    gaps = np.diff(evals)
    cluster_sizes = []
    run = 1
    for g in gaps:
        if g < tol:
            run += 1
        else:
            cluster_sizes.append(run)
            run = 1
    cluster_sizes.append(run)
    sizes, counts = np.unique(cluster_sizes, return_counts=True)
    multiplicity = int(sizes[np.argmax(counts)])
    if exclude_degenerate:
        gaps = gaps[gaps >= tol]
    if len(gaps) == 0 or gaps.mean() == 0:
        raise ValueError("no nonzero gaps to normalize")
    spacings = gaps / gaps.mean()
    top = max(4.0, float(spacings.max()))
    dens, edges = np.histogram(spacings, bins=bins, range=(0.0, top), density=True)
    return SpectrumReport(evals, spacings, multiplicity, (edges, dens))


def wigner_dyson_pdf(s, ensemble: str = "GOE"):
    """Wigner-surmise nearest-neighbor spacing density.

    GOE: (pi/2) s exp(-pi s^2/4); GUE: (32/pi^2) s^2 exp(-4 s^2/pi).
    """
    s = np.asarray(s, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("spacings must be >= 0")
    if ensemble == "GOE":
        out = (np.pi / 2.0) * s * np.exp(-np.pi * s**2 / 4.0)
    elif ensemble == "GUE":
        out = (32.0 / np.pi**2) * s**2 * np.exp(-4.0 * s**2 / np.pi)
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    return out if out.shape else float(out)


def wigner_dyson_cdf(s, ensemble: str = "GOE"):
    s = np.asarray(s, dtype=np.float64)
    if ensemble == "GOE":
        out = 1.0 - np.exp(-np.pi * s**2 / 4.0)
    elif ensemble == "GUE":
        a = 2.0 * s / np.sqrt(np.pi)
        out = erf(a) - a * np.exp(-(a**2)) * 2.0 / np.sqrt(np.pi)
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    return out if out.shape else float(out)


def ks_distance(spacings: np.ndarray, ensemble: str = "GOE") -> float:
    """Two-sided Kolmogorov-Smirnov distance to the surmise CDF."""
    s = np.sort(np.asarray(spacings, dtype=np.float64))
    m = len(s)
    cdf = wigner_dyson_cdf(s, ensemble)
    upper = np.max(np.arange(1, m + 1) / m - cdf)
    lower = np.max(cdf - np.arange(0, m) / m)
    return float(max(upper, lower))


def spectral_form_factor(h: SubHamiltonian, beta: float, t: float) -> float:
    """R_2S(beta, t) = |sum_m e^{-beta e_m - i e_m t}|^2 for the subsystem."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    z = np.sum(np.exp(-(beta + 1j * t) * h.eigenvalues))
    return float(np.abs(z) ** 2)


def rsed_sff(shape: SystemShape, h: SubHamiltonian, beta: float, t: float) -> float:
    """Full-system form factor: exactly 4**(n-k) times the subsystem value."""
    if h.k != shape.k:
        raise ValueError("Hamiltonian subsystem size does not match shape")
    return 4.0 ** (shape.n - shape.k) * spectral_form_factor(h, beta, t)


def sff_from_eigenvalues(evals: np.ndarray, beta: float, t: float) -> float:
    """|tr e^{-beta H - i H t}|^2 from an explicit spectrum (dense oracle)."""
    z = np.sum(np.exp(-(beta + 1j * t) * np.asarray(evals)))
    return float(np.abs(z) ** 2)


def embed_spectrum(shape: SystemShape, evals_sub: np.ndarray) -> np.ndarray:
    """Each subsystem eigenvalue repeated 2**(n-k) times, sorted."""
    evals_sub = np.asarray(evals_sub, dtype=np.float64)
    if len(evals_sub) != shape.subdim:
        raise ValueError(f"expected {shape.subdim} eigenvalues, got {len(evals_sub)}")
    return np.sort(np.repeat(evals_sub, shape.num_seeds))


def export_histogram_csv(report: SpectrumReport, path) -> None:
    """CSV columns: bin_left, bin_right, density."""
    edges, dens = report.histogram
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "density"])
        for lo, hi, d in zip(edges[:-1], edges[1:], dens):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(d))])
