//! Diagonalization of the model matrices, edge-state detection and
//! classification, the SSH bulk winding number, and the bosonic
//! dynamical-matrix spectrum.

use faer::{c64, Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::model::QuadraticHamiltonian;

/// Absolute Hermiticity tolerance (relative to the Frobenius norm) accepted
/// by [`eig_hermitian`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Fraction of sites counted as "edge" in the per-state metadata.
pub const DEFAULT_EDGE_FRACTION: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("input matrix is not Hermitian within {HERMITICITY_TOL:e}")]
    NonHermitian,
    #[error("eigendecomposition failed to converge")]
    EigFailure,
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("|v| = |w| within 1e-12: gap closes, winding undefined")]
    GapClosing,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Per-state localization metadata. Edge weights use the first/last
/// ceil([`DEFAULT_EDGE_FRACTION`] * M) sites of the mode block.
#[derive(Debug, Clone, Copy)]
pub struct StateMeta {
    pub ipr: f64,
    pub left_weight: f64,
    pub right_weight: f64,
}

/// Eigenvalues (ascending by real part, then imaginary part), eigenvector
/// columns aligned with them, and per-state metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Array2<Complex64>,
    pub metadata: Vec<StateMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side3 {
    Left,
    Right,
    BothEnds,
}

impl std::fmt::Display for Side3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side3::Left => write!(f, "left"),
            Side3::Right => write!(f, "right"),
            Side3::BothEnds => write!(f, "both-ends"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EdgeState {
    /// Index into the spectrum the report was built from.
    pub index: usize,
    pub energy: f64,
    pub side: Side3,
    pub ipr: f64,
    /// Exponential localization length in sites; infinite when the profile
    /// does not decay.
    pub localization_length: f64,
    /// Probability profile after degenerate-pair disambiguation.
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct EdgeStateReport {
    pub states: Vec<EdgeState>,
}

fn to_faer(a: &Array2<Complex64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn hermiticity_defect(a: &Array2<Complex64>) -> (f64, f64) {
    let n = a.nrows();
    let mut defect = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        for j in 0..n {
            defect += (a[[i, j]] - a[[j, i]].conj()).norm_sqr();
            scale += a[[i, j]].norm_sqr();
        }
    }
    (defect.sqrt(), scale.sqrt().max(1.0))
}

/// Rotates each eigenvector column so its first non-negligible component is
/// real and positive.
fn phase_fix_columns(v: &mut Array2<Complex64>) {
    let (n, cols) = (v.nrows(), v.ncols());
    for c in 0..cols {
        let col_max = (0..n).map(|i| v[[i, c]].norm()).fold(0.0, f64::max);
        if col_max == 0.0 {
            continue;
        }
        let pivot = (0..n).find(|&i| v[[i, c]].norm() > 1e-12 * col_max);
        if let Some(p) = pivot {
            let phase = v[[p, c]] / v[[p, c]].norm();
            for i in 0..n {
                v[[i, c]] /= phase;
            }
        }
    }
}

fn state_meta(v: &Array2<Complex64>, col: usize, edge_fraction: f64) -> StateMeta {
    let n = v.nrows();
    let edge = ((edge_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut norm = 0.0;
    let mut ipr = 0.0;
    let mut left = 0.0;
    let mut right = 0.0;
    for i in 0..n {
        let p = v[[i, col]].norm_sqr();
        norm += p;
        ipr += p * p;
        if i < edge {
            left += p;
        }
        if i >= n - edge {
            right += p;
        }
    }
    if norm > 0.0 {
        ipr /= norm * norm;
        left /= norm;
        right /= norm;
    }
    StateMeta {
        ipr,
        left_weight: left,
        right_weight: right,
    }
}

/// Dense Hermitian eigendecomposition with deterministic ordering: ascending
/// eigenvalues, each eigenvector phase-fixed so its first nonzero component
/// is real positive.
pub fn eig_hermitian(h: &Array2<Complex64>) -> Result<SpectrumResult, SpectralError> {
    let n = h.nrows();
    if n == 0 {
        return Err(SpectralError::EmptySpectrum);
    }
    if h.ncols() != n {
        return Err(SpectralError::DimensionMismatch("matrix not square".into()));
    }
    let (defect, scale) = hermiticity_defect(h);
    if defect > HERMITICITY_TOL * scale {
        return Err(SpectralError::NonHermitian);
    }
    let decomp = to_faer(h)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| SpectralError::EigFailure)?;
    let u = decomp.U();
    let s = decomp.S().column_vector();
    let mut eigenvectors = Array2::from_shape_fn((n, n), |(i, j)| *u.get(i, j));
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| Complex64::new(s.get(i).re, 0.0)).collect();
    phase_fix_columns(&mut eigenvectors);
    let metadata = (0..n)
        .map(|c| state_meta(&eigenvectors, c, DEFAULT_EDGE_FRACTION))
        .collect();
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        metadata,
    })
}

/// Spectrum of the first-moment dynamical matrix Sigma_z M built from the
/// hopping and pairing blocks. Eigenvalues are complex in general; nonzero
/// imaginary parts flag parametric instability. Sorted by (real, imaginary).
pub fn bosonic_dynamical_spectrum(
    qh: &QuadraticHamiltonian,
) -> Result<SpectrumResult, SpectralError> {
    let d = qh.dynamical_matrix();
    let n = d.nrows();
    let decomp = to_faer(&d).eigen().map_err(|_| SpectralError::EigFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    let sdiag = decomp.S().column_vector();
    let vals: Vec<Complex64> = (0..n).map(|i| *sdiag.get(i)).collect();
    order.sort_by(|&a, &b| {
        (vals[a].re, vals[a].im)
            .partial_cmp(&(vals[b].re, vals[b].im))
            .unwrap()
    });
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
    let u = decomp.U();
    let mut eigenvectors = Array2::from_shape_fn((n, n), |(i, j)| *u.get(i, order[j]));
    phase_fix_columns(&mut eigenvectors);
    let metadata = (0..n)
        .map(|c| state_meta(&eigenvectors, c, DEFAULT_EDGE_FRACTION))
        .collect();
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        metadata,
    })
}

/// Default gap window for edge detection, half the bulk gap of the SSH chain
/// with bond magnitudes (v, w).
pub fn default_gap_window(v: f64, w: f64) -> f64 {
    0.5 * (w.abs() - v.abs()).abs()
}

/// Default IPR threshold for a chain of `m` sites.
pub fn default_ipr_threshold(m: usize) -> f64 {
    4.0 / m as f64
}

/// Finds in-gap localized states of a pairing-free chain spectrum.
///
/// States with |E| < `gap_window` and IPR > `ipr_threshold` are reported.
/// Near-degenerate pairs are rotated onto maximal left/right imbalance
/// before labeling, since raw eigenvectors of a degenerate pair mix
/// arbitrarily.
pub fn detect_edge_states(
    spectrum: &SpectrumResult,
    gap_window: f64,
    ipr_threshold: f64,
    edge_fraction: f64,
) -> Result<EdgeStateReport, SpectralError> {
    let n = spectrum.eigenvalues.len();
    if n == 0 {
        return Err(SpectralError::EmptySpectrum);
    }
    let m = spectrum.eigenvectors.nrows();
    let scale = spectrum
        .eigenvalues
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    let candidates: Vec<usize> = (0..n)
        .filter(|&k| {
            spectrum.eigenvalues[k].re.abs() < gap_window
                && spectrum.eigenvalues[k].im.abs() < 1e-9 * scale
                && spectrum.metadata[k].ipr > ipr_threshold
        })
        .collect();

    // probability profiles, disambiguating degenerate pairs
    let mut profiles: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut k = 0;
    while k < candidates.len() {
        let a = candidates[k];
        let degenerate = k + 1 < candidates.len() && {
            let b = candidates[k + 1];
            (spectrum.eigenvalues[a].re - spectrum.eigenvalues[b].re).abs() < 1e-8 * scale
        };
        if degenerate {
            let b = candidates[k + 1];
            let (pa, pb) = split_degenerate_pair(&spectrum.eigenvectors, a, b, m);
            profiles.push((a, pa));
            profiles.push((b, pb));
            k += 2;
        } else {
            let p: Vec<f64> = (0..m)
                .map(|i| spectrum.eigenvectors[[i, a]].norm_sqr())
                .collect();
            profiles.push((a, normalize(p)));
            k += 1;
        }
    }

    let edge = ((edge_fraction * m as f64).ceil() as usize).clamp(1, m);
    let mut states = Vec::new();
    for (idx, profile) in profiles {
        let half = m / 2;
        let left_half: f64 = profile[..half].iter().sum();
        let right_half: f64 = profile[m - half..].iter().sum();
        let side = if left_half >= 0.9 {
            Side3::Left
        } else if right_half >= 0.9 {
            Side3::Right
        } else {
            Side3::BothEnds
        };
        let _ = edge;
        states.push(EdgeState {
            index: idx,
            energy: spectrum.eigenvalues[idx].re,
            side,
            ipr: spectrum.metadata[idx].ipr,
            localization_length: localization_length(&profile, side),
            profile,
        });
    }
    Ok(EdgeStateReport { states })
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        for x in &mut p {
            *x /= s;
        }
    }
    p
}

/// Rotates a degenerate pair onto the eigenbasis of the left/right imbalance
/// operator, returning the two probability profiles.
fn split_degenerate_pair(
    v: &Array2<Complex64>,
    a: usize,
    b: usize,
    m: usize,
) -> (Vec<f64>, Vec<f64>) {
    let half = m / 2;
    let imbalance = |i: usize| -> f64 {
        if i < half {
            1.0
        } else if i >= m - half {
            -1.0
        } else {
            0.0
        }
    };
    // 2x2 Hermitian matrix of the imbalance operator in the pair subspace
    let mut o = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..m {
        let w = imbalance(i);
        let va = v[[i, a]];
        let vb = v[[i, b]];
        o[0][0] += va.conj() * va * w;
        o[0][1] += va.conj() * vb * w;
        o[1][0] += vb.conj() * va * w;
        o[1][1] += vb.conj() * vb * w;
    }
    // closed-form 2x2 Hermitian eigenvectors
    let (c1, c2) = two_by_two_eigvecs(o);
    let build = |c: (Complex64, Complex64)| -> Vec<f64> {
        normalize(
            (0..m)
                .map(|i| (c.0 * v[[i, a]] + c.1 * v[[i, b]]).norm_sqr())
                .collect(),
        )
    };
    (build(c1), build(c2))
}

fn two_by_two_eigvecs(
    o: [[Complex64; 2]; 2],
) -> ((Complex64, Complex64), (Complex64, Complex64)) {
    let a = o[0][0].re;
    let d = o[1][1].re;
    let b = o[0][1];
    if b.norm() < 1e-14 {
        return (
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        );
    }
    let tr_half = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    let mk = |l: f64| {
        let v0 = b;
        let v1 = Complex64::new(l - a, 0.0);
        let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        (v0 / norm, v1 / norm)
    };
    (mk(l1), mk(l2))
}

fn localization_length(profile: &[f64], side: Side3) -> f64 {
    let m = profile.len();
    // distance from the relevant edge
    let dist = |i: usize| -> f64 {
        match side {
            Side3::Left => i as f64,
            Side3::Right => (m - 1 - i) as f64,
            Side3::BothEnds => i.min(m - 1 - i) as f64,
        }
    };
    // least-squares slope of ln p vs distance
    let pts: Vec<(f64, f64)> = (0..m)
        .filter(|&i| profile[i] > 1e-14)
        .map(|i| (dist(i), profile[i].ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return f64::INFINITY;
    }
    let slope = (n * sxy - sx * sy) / denom;
    if slope >= -1e-12 {
        f64::INFINITY
    } else {
        -2.0 / slope
    }
}

/// Bulk winding number of the two-band chain h(k) = v + w e^{-ik}, computed
/// by integrating the phase winding over the Brillouin zone.
pub fn winding_number(v: f64, w: f64) -> Result<i32, SpectralError> {
    if (v.abs() - w.abs()).abs() < 1e-12 {
        return Err(SpectralError::GapClosing);
    }
    let n = 4096;
    let h = |k: f64| Complex64::new(v + w * k.cos(), -w * k.sin());
    let mut total = 0.0;
    let mut prev = h(0.0);
    for i in 1..=n {
        let k = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let cur = h(k);
        total += (cur / prev).arg();
        prev = cur;
    }
    let wind = (total / (2.0 * std::f64::consts::PI)).round() as i32;
    Ok(wind.abs())
}
